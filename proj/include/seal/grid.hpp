#pragma once

// Pixel-grid value types shared by alignment, training and benchmarking.
// Convention everywhere: row-major storage, top-left origin, (row, col).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace seal {

struct PixelCoord {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

inline double squared_distance(PixelCoord a, PixelCoord b) {
  const double dr = a.row - b.row;
  const double dc = a.col - b.col;
  return dr * dr + dc * dc;
}

// Binary edge annotation of one class.
class EdgeLabelMap {
 public:
  EdgeLabelMap() = default;
  EdgeLabelMap(int height, int width, int class_id = 0);

  int height() const { return height_; }
  int width() const { return width_; }
  int class_id() const { return class_id_; }

  bool in_bounds(PixelCoord p) const {
    return p.row >= 0 && p.col >= 0 && p.row < height_ && p.col < width_;
  }
  bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
  bool at(PixelCoord p) const { return at(p.row, p.col); }
  void set(int row, int col, bool value = true) { bits_[index(row, col)] = value ? 1 : 0; }
  void set(PixelCoord p, bool value = true) { set(p.row, p.col, value); }

  std::size_t count() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const EdgeLabelMap&, const EdgeLabelMap&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  int class_id_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Up to 32 classes per pixel, one bit each. Classes are not mutually exclusive.
class MultiLabelMap {
 public:
  static constexpr int kMaxClasses = 32;

  MultiLabelMap() = default;
  MultiLabelMap(int height, int width, int num_classes);
  MultiLabelMap(int height, int width, int num_classes, std::vector<std::uint32_t> words);

  int height() const { return height_; }
  int width() const { return width_; }
  int num_classes() const { return num_classes_; }

  std::uint32_t word(int row, int col) const { return words_[index(row, col)]; }
  void set_word(int row, int col, std::uint32_t value) { words_[index(row, col)] = value; }
  bool has(int row, int col, int k) const { return (word(row, col) >> k) & 1U; }
  void set(int row, int col, int k, bool value = true);

  std::span<const std::uint32_t> words() const { return words_; }

  friend bool operator==(const MultiLabelMap&, const MultiLabelMap&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  int num_classes_ = 0;
  std::vector<std::uint32_t> words_;
};

// Read-only view of one class plane of a ProbMap.
struct ProbPlane {
  int height = 0;
  int width = 0;
  std::span<const float> values;

  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
  double at(PixelCoord p) const { return at(p.row, p.col); }
};

// Per-class per-pixel edge probability, planar layout [class][row][col].
class ProbMap {
 public:
  ProbMap() = default;
  ProbMap(int height, int width, int num_classes, float fill = 0.0F);
  // Throws InvalidArgument when a value falls outside [0, 1] or the size is wrong.
  ProbMap(int height, int width, int num_classes, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  int num_classes() const { return num_classes_; }

  float at(int k, int row, int col) const { return values_[index(k, row, col)]; }
  void set(int k, int row, int col, float value);

  ProbPlane plane(int k) const;
  std::span<const float> values() const { return values_; }

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  std::size_t index(int k, int row, int col) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(height_) +
            static_cast<std::size_t>(row)) *
               static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  int num_classes_ = 0;
  std::vector<float> values_;
};

struct MappingPair {
  PixelCoord source;
  PixelCoord target;

  friend bool operator==(const MappingPair&, const MappingPair&) = default;
};

// One-to-one correspondence between annotated edge pixels (sources, row-major)
// and their aligned positions (targets).
struct Mapping {
  std::vector<MappingPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool targets_distinct() const;

  friend bool operator==(const Mapping&, const Mapping&) = default;
};

std::vector<PixelCoord> edge_pixels(const EdgeLabelMap& map);

EdgeLabelMap extract_class(const MultiLabelMap& labels, int k);

// Inverse of extract_class over all classes. Maps must share dimensions and
// carry class ids 0..n-1 in order.
MultiLabelMap combine_classes(const std::vector<EdgeLabelMap>& planes);

// Writes `plane` into class `plane.class_id()` of `labels`.
void assign_class(MultiLabelMap& labels, const EdgeLabelMap& plane);

ProbMap clamp_probs(const ProbMap& probs, double epsilon);

}  // namespace seal
