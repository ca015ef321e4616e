#include "seal/visualize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include <png.h>

#include "seal/errors.hpp"

namespace seal {

std::array<double, 3> color_code(std::span<const double> probs, std::span<const Rgb> colors) {
  if (probs.size() != colors.size()) {
    throw InvalidArgument("got " + std::to_string(colors.size()) + " colours for " +
                          std::to_string(probs.size()) + " classes");
  }
  double sum = 0.0;
  double peak = 0.0;
  for (double p : probs) {
    sum += p;
    peak = std::max(peak, p);
  }
  if (!(sum > 0.0)) return {255.0, 255.0, 255.0};
  std::array<double, 3> out{};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    double acc = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) acc += probs[c] * (255.0 - colors[c][ch]);
    out[ch] = 255.0 - peak * acc / sum;
  }
  return out;
}

std::uint8_t round_half_up(double channel) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(channel + 0.5), 0.0, 255.0));
}

RgbImage visualize(const ProbMap& prob, std::span<const Rgb> colors) {
  if (static_cast<int>(colors.size()) != prob.num_classes()) {
    throw InvalidArgument("got " + std::to_string(colors.size()) + " colours for " +
                          std::to_string(prob.num_classes()) + " classes");
  }
  RgbImage img{prob.height(), prob.width(), {}};
  img.pixels.reserve(3 * static_cast<std::size_t>(img.height) * static_cast<std::size_t>(img.width));
  std::vector<double> p(static_cast<std::size_t>(prob.num_classes()));
  for (int r = 0; r < prob.height(); ++r) {
    for (int c = 0; c < prob.width(); ++c) {
      for (int k = 0; k < prob.num_classes(); ++k) p[static_cast<std::size_t>(k)] = prob.at(k, r, c);
      for (double v : color_code(p, colors)) img.pixels.push_back(round_half_up(v));
    }
  }
  return img;
}

RgbImage visualize(const MultiLabelMap& labels, std::span<const Rgb> colors) {
  ProbMap prob(labels.height(), labels.width(), labels.num_classes());
  for (int k = 0; k < labels.num_classes(); ++k) {
    for (int r = 0; r < labels.height(); ++r) {
      for (int c = 0; c < labels.width(); ++c) {
        if (labels.has(r, c, k)) prob.set(k, r, c, 1.0F);
      }
    }
  }
  return visualize(prob, colors);
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw InvalidArgument("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw InvariantViolation("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InvalidArgument("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.height; ++r) {
    png_write_row(png, image.pixels.data() + 3 * static_cast<std::size_t>(r) *
                                                 static_cast<std::size_t>(image.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace seal
