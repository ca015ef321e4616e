#pragma once

// Alignment and loss over caller-owned contiguous buffers, for host-side
// training loops. Layouts are row-major:
//   probs   f32 [batch][K][H][W]   (or [K][H][W] for a single image)
//   labels  u8  [batch][K][H][W]   0 or 1
// No global state; every call takes its configuration explicitly.

#include <cstdint>
#include <optional>
#include <span>

#include "seal/align.hpp"

namespace seal {

inline constexpr const char* kVersion = "1.0.0";

struct BufferShape {
  int batch = 1;
  int num_classes = 0;
  int height = 0;
  int width = 0;

  std::size_t image_elements() const {
    return static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  std::size_t elements() const { return static_cast<std::size_t>(batch) * image_elements(); }
};

// Writes aligned labels into `aligned` (same layout as `noisy`). Images are
// independent; each is aligned exactly as the command-line `align` would.
// Shape problems throw InvalidArgument naming the offending field.
void align_batch(std::span<const float> probs, std::span<const std::uint8_t> noisy,
                 const BufferShape& shape, const AlignConfig& cfg, AlignMode mode,
                 std::span<std::uint8_t> aligned, int threads = 1);

// Summed sigmoid cross-entropy over the whole batch; writes d loss / d logit
// into `grad` (same layout as `probs`). Weighted form when beta is given.
double loss_and_grad(std::span<const float> probs, std::span<const std::uint8_t> labels,
                     const BufferShape& shape, std::span<float> grad,
                     std::optional<double> beta = std::nullopt);

}  // namespace seal
