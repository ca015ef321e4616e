#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seal/grid.hpp"

namespace seal {

struct LossReport {
  double total = 0.0;
  std::vector<double> per_class;
  std::int64_t pixel_count = 0;
};

// Gradient of a loss w.r.t. pre-sigmoid logits, same layout as ProbMap.
struct LogitGradient {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::vector<double> values;

  double at(int k, int row, int col) const {
    return values[(static_cast<std::size_t>(k) * static_cast<std::size_t>(height) +
                   static_cast<std::size_t>(row)) *
                      static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
};

// Summed (not averaged) sigmoid cross-entropy over all pixels and classes.
LossReport sigmoid_ce_loss(const ProbMap& prob, const MultiLabelMap& labels);

// Positives weighted by beta, negatives by 1 - beta; 0 < beta < 1.
LossReport reweighted_ce_loss(const ProbMap& prob, const MultiLabelMap& labels, double beta);

// Unweighted: sigma - y. Weighted: beta*y*(sigma - 1) + (1 - beta)*(1 - y)*sigma.
LogitGradient loss_gradient(const ProbMap& prob, const MultiLabelMap& labels,
                            std::optional<double> beta = std::nullopt);

// Fraction of non-edge pixels over all classes, the usual per-image beta.
double non_edge_fraction(const MultiLabelMap& labels);

}  // namespace seal
