#pragma once

// Colour coding of multi-class edge maps. Per pixel and channel:
//   I = 255 - max_c P_c * sum_c P_c (255 - M_c) / sum_c P_c
// or white where every P_c is 0. Channels are rounded half-up to u8.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "seal/grid.hpp"
#include "seal/manifest.hpp"

namespace seal {

struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major

  Rgb at(int row, int col) const {
    const std::size_t i = 3 * (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                               static_cast<std::size_t>(col));
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
};

// Unrounded channel values for one pixel.
std::array<double, 3> color_code(std::span<const double> probs, std::span<const Rgb> colors);

std::uint8_t round_half_up(double channel);

// Throws InvalidArgument when colors.size() != num_classes.
RgbImage visualize(const ProbMap& prob, std::span<const Rgb> colors);
RgbImage visualize(const MultiLabelMap& labels, std::span<const Rgb> colors);

void write_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace seal
