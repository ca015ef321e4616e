#include "seal/buffer_api.hpp"

#include <string>
#include <vector>

#include "seal/errors.hpp"
#include "seal/loss.hpp"

namespace seal {

namespace {

void check_shape(const BufferShape& shape) {
  if (shape.batch <= 0) throw InvalidArgument("batch: must be positive");
  if (shape.num_classes <= 0 || shape.num_classes > MultiLabelMap::kMaxClasses) {
    throw InvalidArgument("num_classes: must be in 1..32");
  }
  if (shape.height <= 0) throw InvalidArgument("height: must be positive");
  if (shape.width <= 0) throw InvalidArgument("width: must be positive");
}

void check_size(const char* field, std::size_t have, std::size_t want) {
  if (have != want) {
    throw InvalidArgument(std::string(field) + ": expected " + std::to_string(want) + " elements, got " +
                          std::to_string(have));
  }
}

ProbMap prob_at(std::span<const float> probs, const BufferShape& shape, int b) {
  const auto n = shape.image_elements();
  const auto first = probs.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(b) * n);
  try {
    return ProbMap(shape.height, shape.width, shape.num_classes,
                   std::vector<float>(first, first + static_cast<std::ptrdiff_t>(n)));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("probs: ") + e.what());
  }
}

MultiLabelMap labels_at(std::span<const std::uint8_t> labels, const BufferShape& shape, int b,
                        const char* field) {
  MultiLabelMap out(shape.height, shape.width, shape.num_classes);
  const std::size_t base = static_cast<std::size_t>(b) * shape.image_elements();
  std::size_t i = base;
  for (int k = 0; k < shape.num_classes; ++k) {
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c, ++i) {
        if (labels[i] > 1) throw InvalidArgument(std::string(field) + ": values must be 0 or 1");
        if (labels[i]) out.set(r, c, k);
      }
    }
  }
  return out;
}

}  // namespace

void align_batch(std::span<const float> probs, std::span<const std::uint8_t> noisy,
                 const BufferShape& shape, const AlignConfig& cfg, AlignMode mode,
                 std::span<std::uint8_t> aligned, int threads) {
  check_shape(shape);
  check_size("probs", probs.size(), shape.elements());
  check_size("noisy", noisy.size(), shape.elements());
  check_size("aligned", aligned.size(), shape.elements());
  for (int b = 0; b < shape.batch; ++b) {
    const MultiLabelMap result =
        align_all_classes(labels_at(noisy, shape, b, "noisy"), prob_at(probs, shape, b), cfg, mode,
                          nullptr, threads);
    std::size_t i = static_cast<std::size_t>(b) * shape.image_elements();
    for (int k = 0; k < shape.num_classes; ++k) {
      for (int r = 0; r < shape.height; ++r) {
        for (int c = 0; c < shape.width; ++c, ++i) aligned[i] = result.has(r, c, k) ? 1 : 0;
      }
    }
  }
}

double loss_and_grad(std::span<const float> probs, std::span<const std::uint8_t> labels,
                     const BufferShape& shape, std::span<float> grad, std::optional<double> beta) {
  check_shape(shape);
  check_size("probs", probs.size(), shape.elements());
  check_size("labels", labels.size(), shape.elements());
  check_size("grad", grad.size(), shape.elements());
  double total = 0.0;
  for (int b = 0; b < shape.batch; ++b) {
    const ProbMap prob = prob_at(probs, shape, b);
    const MultiLabelMap y = labels_at(labels, shape, b, "labels");
    total += beta ? reweighted_ce_loss(prob, y, *beta).total : sigmoid_ce_loss(prob, y).total;
    const LogitGradient g = loss_gradient(prob, y, beta);
    const std::size_t base = static_cast<std::size_t>(b) * shape.image_elements();
    for (std::size_t i = 0; i < g.values.size(); ++i) grad[base + i] = static_cast<float>(g.values[i]);
  }
  return total;
}

}  // namespace seal
