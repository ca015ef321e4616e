#pragma once

// Category-aware edge benchmark. Predictions are binarised at a grid of
// thresholds and matched one-to-one against ground truth within a distance
// tolerance; counts accumulate at dataset scale for MF (ODS) and AP.

#include <cstdint>
#include <vector>

#include "seal/grid.hpp"

namespace seal {

enum class BenchMode {
  kThin,  // thinned predictions vs single-pixel ground truth
  kRaw,   // raw predictions vs ground truth kept at training-label width
};

inline constexpr double kToleranceSbd = 0.02;
inline constexpr double kToleranceReannotated = 0.0075;
inline constexpr double kToleranceCityscapes = 0.0035;

// 0.01, 0.02, ..., 0.99
std::vector<double> default_thresholds(int count = 99);

struct BenchConfig {
  double tolerance_fraction = kToleranceSbd;  // of the image diagonal
  BenchMode mode = BenchMode::kThin;
  std::vector<double> thresholds = default_thresholds();
  int border_ignore = 5;
  int raw_gt_dilation = 1;

  void validate() const;
  double max_distance(int height, int width) const;
};

struct MatchCounts {
  std::int64_t matched_pred = 0;
  std::int64_t total_pred = 0;
  std::int64_t matched_gt = 0;
  std::int64_t total_gt = 0;

  MatchCounts& operator+=(const MatchCounts& other);
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

class BenchAccumulator {
 public:
  BenchAccumulator() = default;
  BenchAccumulator(int num_classes, std::vector<double> thresholds);

  int num_classes() const { return num_classes_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  int num_thresholds() const { return static_cast<int>(thresholds_.size()); }

  const MatchCounts& at(int k, int t) const { return counts_[index(k, t)]; }
  MatchCounts& at(int k, int t) { return counts_[index(k, t)]; }

  // Field-wise sum. Throws InvalidArgument on shape mismatch.
  BenchAccumulator& merge(const BenchAccumulator& other);

  friend bool operator==(const BenchAccumulator&, const BenchAccumulator&) = default;

 private:
  std::size_t index(int k, int t) const {
    return static_cast<std::size_t>(k) * thresholds_.size() + static_cast<std::size_t>(t);
  }

  int num_classes_ = 0;
  std::vector<double> thresholds_;
  std::vector<MatchCounts> counts_;
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool has_predictions = false;  // precision is 0 and undefined otherwise
};

struct PrCurve {
  std::vector<PrPoint> points;  // ordered by increasing threshold
};

// Zhang-Suen thinning. Deletions marked in a sub-iteration are applied one by
// one, each re-checked as a simple pixel, so small blobs cannot vanish.
// Idempotent.
EdgeLabelMap thin(const EdgeLabelMap& binary);

// Morphological dilation with a (2r+1)x(2r+1) square.
EdgeLabelMap dilate_gt(const EdgeLabelMap& gt, int radius);

EdgeLabelMap clear_border(const EdgeLabelMap& map, int border);

struct Correspondence {
  std::int64_t matched_pred = 0;
  std::int64_t matched_gt = 0;
  double total_distance = 0.0;
  std::vector<MappingPair> pairs;  // (pred pixel, gt pixel)
};

// Maximum-cardinality one-to-one matching of pred to gt pixels at Euclidean
// distance <= max_dist, with minimal total distance among maximum matchings.
Correspondence correspond(const EdgeLabelMap& pred, const EdgeLabelMap& gt, double max_dist);

BenchAccumulator pr_accumulate(BenchAccumulator acc, const ProbMap& prob, const MultiLabelMap& gt,
                               const BenchConfig& cfg);

PrCurve pr_curve(const BenchAccumulator& acc, int k);

struct MfResult {
  std::vector<double> per_class;        // NaN for classes without any ground truth
  std::vector<double> best_threshold;   // NaN likewise
  std::vector<bool> present;
  double mean = 0.0;                    // over present classes
};

double f_measure(double precision, double recall);

MfResult mf_ods(const BenchAccumulator& acc);

// Trapezoidal area under precision-recall. The precision of the lowest-recall
// point is held down to recall 0; nothing is extrapolated beyond the maximum
// recall. Throws InvalidArgument when recall increases with threshold.
double average_precision(const PrCurve& curve);

}  // namespace seal
