#include "seal/grid.hpp"

#include <algorithm>
#include <string>

#include "seal/errors.hpp"

namespace seal {

namespace {

void check_dims(int height, int width) {
  if (height <= 0 || width <= 0) {
    throw InvalidArgument("grid dimensions must be positive, got " + std::to_string(height) +
                          "x" + std::to_string(width));
  }
}

std::size_t area(int height, int width) {
  return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
}

}  // namespace

EdgeLabelMap::EdgeLabelMap(int height, int width, int class_id)
    : height_(height), width_(width), class_id_(class_id) {
  check_dims(height, width);
  if (class_id < 0) throw InvalidArgument("class id must be non-negative");
  bits_.assign(area(height, width), 0);
}

std::size_t EdgeLabelMap::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

MultiLabelMap::MultiLabelMap(int height, int width, int num_classes)
    : height_(height), width_(width), num_classes_(num_classes) {
  check_dims(height, width);
  if (num_classes <= 0 || num_classes > kMaxClasses) {
    throw InvalidArgument("MultiLabelMap supports 1.." + std::to_string(kMaxClasses) +
                          " classes, got " + std::to_string(num_classes));
  }
  words_.assign(area(height, width), 0U);
}

MultiLabelMap::MultiLabelMap(int height, int width, int num_classes,
                             std::vector<std::uint32_t> words)
    : MultiLabelMap(height, width, num_classes) {
  if (words.size() != words_.size()) {
    throw InvalidArgument("bitfield payload has " + std::to_string(words.size()) +
                          " words, expected " + std::to_string(words_.size()));
  }
  const std::uint32_t allowed =
      num_classes == kMaxClasses ? ~0U : ((1U << static_cast<unsigned>(num_classes)) - 1U);
  for (std::uint32_t w : words) {
    if ((w & ~allowed) != 0U) throw InvalidArgument("bitfield sets a class beyond num_classes");
  }
  words_ = std::move(words);
}

void MultiLabelMap::set(int row, int col, int k, bool value) {
  if (k < 0 || k >= num_classes_) throw InvalidArgument("class index out of range");
  auto& w = words_[index(row, col)];
  const std::uint32_t bit = 1U << static_cast<unsigned>(k);
  w = value ? (w | bit) : (w & ~bit);
}

ProbMap::ProbMap(int height, int width, int num_classes, float fill)
    : height_(height), width_(width), num_classes_(num_classes) {
  check_dims(height, width);
  if (num_classes <= 0) throw InvalidArgument("ProbMap needs at least one class");
  if (!(fill >= 0.0F && fill <= 1.0F)) throw InvalidArgument("probability fill outside [0,1]");
  values_.assign(area(height, width) * static_cast<std::size_t>(num_classes), fill);
}

ProbMap::ProbMap(int height, int width, int num_classes, std::vector<float> values)
    : ProbMap(height, width, num_classes) {
  if (values.size() != values_.size()) {
    throw InvalidArgument("probability payload has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(values_.size()));
  }
  for (float v : values) {
    if (!(v >= 0.0F && v <= 1.0F)) throw InvalidArgument("probability outside [0,1]");
  }
  values_ = std::move(values);
}

void ProbMap::set(int k, int row, int col, float value) {
  if (!(value >= 0.0F && value <= 1.0F)) throw InvalidArgument("probability outside [0,1]");
  values_[index(k, row, col)] = value;
}

ProbPlane ProbMap::plane(int k) const {
  if (k < 0 || k >= num_classes_) throw InvalidArgument("class index out of range");
  const std::size_t n = area(height_, width_);
  return ProbPlane{height_, width_,
                   std::span<const float>(values_).subspan(static_cast<std::size_t>(k) * n, n)};
}

bool Mapping::targets_distinct() const {
  std::vector<PixelCoord> targets;
  targets.reserve(pairs.size());
  for (const auto& pair : pairs) targets.push_back(pair.target);
  std::sort(targets.begin(), targets.end());
  return std::adjacent_find(targets.begin(), targets.end()) == targets.end();
}

std::vector<PixelCoord> edge_pixels(const EdgeLabelMap& map) {
  std::vector<PixelCoord> out;
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (map.at(r, c)) out.push_back({r, c});
    }
  }
  return out;
}

EdgeLabelMap extract_class(const MultiLabelMap& labels, int k) {
  if (k < 0 || k >= labels.num_classes()) {
    throw InvalidArgument("class index " + std::to_string(k) + " out of range [0, " +
                          std::to_string(labels.num_classes()) + ")");
  }
  EdgeLabelMap out(labels.height(), labels.width(), k);
  for (int r = 0; r < labels.height(); ++r) {
    for (int c = 0; c < labels.width(); ++c) {
      if (labels.has(r, c, k)) out.set(r, c);
    }
  }
  return out;
}

void assign_class(MultiLabelMap& labels, const EdgeLabelMap& plane) {
  if (plane.height() != labels.height() || plane.width() != labels.width()) {
    throw InvalidArgument("class plane dimensions differ from label map");
  }
  const int k = plane.class_id();
  for (int r = 0; r < labels.height(); ++r) {
    for (int c = 0; c < labels.width(); ++c) labels.set(r, c, k, plane.at(r, c));
  }
}

MultiLabelMap combine_classes(const std::vector<EdgeLabelMap>& planes) {
  if (planes.empty()) throw InvalidArgument("no class planes to combine");
  MultiLabelMap out(planes.front().height(), planes.front().width(),
                    static_cast<int>(planes.size()));
  for (std::size_t k = 0; k < planes.size(); ++k) {
    if (planes[k].class_id() != static_cast<int>(k)) {
      throw InvalidArgument("class planes must be ordered by class id");
    }
    assign_class(out, planes[k]);
  }
  return out;
}

ProbMap clamp_probs(const ProbMap& probs, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw InvalidArgument("clamp epsilon must lie in (0, 0.5), got " + std::to_string(epsilon));
  }
  std::vector<float> values(probs.values().begin(), probs.values().end());
  const double lo = epsilon;
  const double hi = 1.0 - epsilon;
  for (float& v : values) v = static_cast<float>(std::clamp(static_cast<double>(v), lo, hi));
  return ProbMap(probs.height(), probs.width(), probs.num_classes(), std::move(values));
}

}  // namespace seal
