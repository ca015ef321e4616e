#include "seal/loss.hpp"

#include <cmath>
#include <string>

#include "seal/errors.hpp"

namespace seal {

namespace {

void check_shapes(const ProbMap& prob, const MultiLabelMap& labels) {
  if (prob.height() != labels.height() || prob.width() != labels.width() ||
      prob.num_classes() != labels.num_classes()) {
    throw InvalidArgument("probability map " + std::to_string(prob.num_classes()) + "x" +
                          std::to_string(prob.height()) + "x" + std::to_string(prob.width()) +
                          " does not match labels " + std::to_string(labels.num_classes()) + "x" +
                          std::to_string(labels.height()) + "x" + std::to_string(labels.width()));
  }
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
}

LossReport weighted_loss(const ProbMap& prob, const MultiLabelMap& labels, double pos_weight,
                         double neg_weight) {
  check_shapes(prob, labels);
  LossReport report;
  report.per_class.assign(static_cast<std::size_t>(prob.num_classes()), 0.0);
  report.pixel_count = static_cast<std::int64_t>(prob.height()) * prob.width();
  for (int k = 0; k < prob.num_classes(); ++k) {
    double sum = 0.0;
    for (int r = 0; r < prob.height(); ++r) {
      for (int c = 0; c < prob.width(); ++c) {
        const double s = prob.at(k, r, c);
        sum -= labels.has(r, c, k) ? pos_weight * std::log(s) : neg_weight * std::log1p(-s);
      }
    }
    report.per_class[static_cast<std::size_t>(k)] = sum;
    report.total += sum;
  }
  return report;
}

}  // namespace

LossReport sigmoid_ce_loss(const ProbMap& prob, const MultiLabelMap& labels) {
  return weighted_loss(prob, labels, 1.0, 1.0);
}

LossReport reweighted_ce_loss(const ProbMap& prob, const MultiLabelMap& labels, double beta) {
  check_beta(beta);
  return weighted_loss(prob, labels, beta, 1.0 - beta);
}

LogitGradient loss_gradient(const ProbMap& prob, const MultiLabelMap& labels,
                            std::optional<double> beta) {
  check_shapes(prob, labels);
  if (beta) check_beta(*beta);
  LogitGradient grad{prob.height(), prob.width(), prob.num_classes(), {}};
  grad.values.reserve(prob.values().size());
  for (int k = 0; k < prob.num_classes(); ++k) {
    for (int r = 0; r < prob.height(); ++r) {
      for (int c = 0; c < prob.width(); ++c) {
        const double s = prob.at(k, r, c);
        const bool positive = labels.has(r, c, k);
        if (!beta) {
          grad.values.push_back(s - (positive ? 1.0 : 0.0));
        } else {
          grad.values.push_back(positive ? *beta * (s - 1.0) : (1.0 - *beta) * s);
        }
      }
    }
  }
  return grad;
}

double non_edge_fraction(const MultiLabelMap& labels) {
  std::int64_t positives = 0;
  for (int k = 0; k < labels.num_classes(); ++k) {
    for (int r = 0; r < labels.height(); ++r) {
      for (int c = 0; c < labels.width(); ++c) positives += labels.has(r, c, k) ? 1 : 0;
    }
  }
  const double total =
      static_cast<double>(labels.height()) * labels.width() * labels.num_classes();
  return 1.0 - static_cast<double>(positives) / total;
}

}  // namespace seal
