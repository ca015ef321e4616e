#include "seal/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "seal/assign.hpp"
#include "seal/errors.hpp"

namespace seal {

std::vector<double> default_thresholds(int count) {
  if (count < 1) throw InvalidArgument("need at least one threshold");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) out.push_back(static_cast<double>(i) / (count + 1));
  return out;
}

void BenchConfig::validate() const {
  if (!(tolerance_fraction > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (thresholds.empty()) throw InvalidArgument("no thresholds given");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
      throw InvalidArgument("thresholds must lie in (0, 1)");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw InvalidArgument("thresholds must be strictly increasing");
    }
  }
  if (border_ignore < 0) throw InvalidArgument("border ignore must be non-negative");
  if (raw_gt_dilation < 0) throw InvalidArgument("ground-truth dilation must be non-negative");
}

double BenchConfig::max_distance(int height, int width) const {
  return tolerance_fraction * std::hypot(static_cast<double>(height), static_cast<double>(width));
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& other) {
  matched_pred += other.matched_pred;
  total_pred += other.total_pred;
  matched_gt += other.matched_gt;
  total_gt += other.total_gt;
  return *this;
}

BenchAccumulator::BenchAccumulator(int num_classes, std::vector<double> thresholds)
    : num_classes_(num_classes), thresholds_(std::move(thresholds)) {
  if (num_classes <= 0) throw InvalidArgument("accumulator needs at least one class");
  counts_.assign(static_cast<std::size_t>(num_classes) * thresholds_.size(), MatchCounts{});
}

BenchAccumulator& BenchAccumulator::merge(const BenchAccumulator& other) {
  if (other.num_classes_ != num_classes_ || other.thresholds_ != thresholds_) {
    throw InvalidArgument("cannot merge accumulators of different shape");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

namespace {

// Neighbour ring P2..P9 in Zhang-Suen order: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<PixelCoord, 8> kRing{{
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};

std::array<int, 8> ring(const EdgeLabelMap& img, PixelCoord p) {
  std::array<int, 8> out{};
  for (std::size_t i = 0; i < kRing.size(); ++i) {
    const PixelCoord n{p.row + kRing[i].row, p.col + kRing[i].col};
    out[i] = (img.in_bounds(n) && img.at(n)) ? 1 : 0;
  }
  return out;
}

int neighbour_count(const std::array<int, 8>& x) {
  int b = 0;
  for (int v : x) b += v;
  return b;
}

// 8-connectivity number (Yokoi). 1 means deleting the pixel keeps topology.
int connectivity_number(const std::array<int, 8>& x) {
  // Yokoi's formula walks E, NE, N, NW, W, SW, S, SE; map from the ring order.
  const std::array<int, 8> order{2, 1, 0, 7, 6, 5, 4, 3};
  std::array<int, 9> c{};
  for (std::size_t i = 0; i < 8; ++i) c[i] = 1 - x[static_cast<std::size_t>(order[i])];
  c[8] = c[0];
  int n = 0;
  for (std::size_t k = 0; k < 8; k += 2) {
    const int next2 = k + 2 < 8 ? c[k + 2] : c[0];
    n += c[k] - c[k] * c[k + 1] * next2;
  }
  return n;
}

bool simple_point(const EdgeLabelMap& img, PixelCoord p) {
  const auto x = ring(img, p);
  return neighbour_count(x) >= 1 && connectivity_number(x) == 1;
}

bool zhang_suen_candidate(const std::array<int, 8>& x, int pass) {
  const int b = neighbour_count(x);
  if (b < 2 || b > 6) return false;
  int a = 0;
  for (std::size_t i = 0; i < 8; ++i) a += (x[i] == 0 && x[(i + 1) % 8] == 1) ? 1 : 0;
  if (a != 1) return false;
  const int n = x[0], e = x[2], s = x[4], w = x[6];
  if (pass == 0) return n * e * s == 0 && e * s * w == 0;
  return n * e * w == 0 && n * s * w == 0;
}

}  // namespace

EdgeLabelMap thin(const EdgeLabelMap& binary) {
  EdgeLabelMap img = binary;
  std::vector<PixelCoord> foreground = edge_pixels(img);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<PixelCoord> candidates;
      for (PixelCoord p : foreground) {
        if (img.at(p) && zhang_suen_candidate(ring(img, p), pass)) candidates.push_back(p);
      }
      // Candidates come from the pass snapshot as in the parallel scheme; the
      // simple-point check only stops a small blob from vanishing entirely.
      for (PixelCoord p : candidates) {
        if (simple_point(img, p)) {
          img.set(p, false);
          changed = true;
        }
      }
    }
    std::erase_if(foreground, [&](PixelCoord p) { return !img.at(p); });
  }
  return img;
}

EdgeLabelMap dilate_gt(const EdgeLabelMap& gt, int radius) {
  if (radius < 0) throw InvalidArgument("dilation radius must be non-negative");
  if (radius == 0) return gt;
  EdgeLabelMap out(gt.height(), gt.width(), gt.class_id());
  for (PixelCoord q : edge_pixels(gt)) {
    const int r0 = std::max(0, q.row - radius);
    const int r1 = std::min(gt.height() - 1, q.row + radius);
    const int c0 = std::max(0, q.col - radius);
    const int c1 = std::min(gt.width() - 1, q.col + radius);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) out.set(r, c);
    }
  }
  return out;
}

EdgeLabelMap clear_border(const EdgeLabelMap& map, int border) {
  if (border <= 0) return map;
  EdgeLabelMap out = map;
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (r < border || c < border || r >= map.height() - border || c >= map.width() - border) {
        out.set(r, c, false);
      }
    }
  }
  return out;
}

Correspondence correspond(const EdgeLabelMap& pred, const EdgeLabelMap& gt, double max_dist) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw InvalidArgument("prediction and ground truth differ in size");
  }
  Correspondence out;
  const std::vector<PixelCoord> preds = edge_pixels(pred);
  const std::vector<PixelCoord> gts = edge_pixels(gt);
  if (preds.empty() || gts.empty() || max_dist < 0.0) return out;

  std::vector<int> gt_index(static_cast<std::size_t>(gt.height()) * static_cast<std::size_t>(gt.width()), -1);
  for (std::size_t j = 0; j < gts.size(); ++j) {
    gt_index[static_cast<std::size_t>(gts[j].row) * static_cast<std::size_t>(gt.width()) +
             static_cast<std::size_t>(gts[j].col)] = static_cast<int>(j);
  }
  const int reach = static_cast<int>(std::floor(max_dist));
  const double limit = max_dist * max_dist;
  const int num_gt = static_cast<int>(gts.size());
  // An outlier arc costs more than any set of real matches, so the optimum
  // first maximises the number of real matches.
  const double outlier =
      max_dist * static_cast<double>(std::min(preds.size(), gts.size())) + 1.0;

  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const PixelCoord p = preds[i];
    for (int r = std::max(0, p.row - reach); r <= std::min(gt.height() - 1, p.row + reach); ++r) {
      for (int c = std::max(0, p.col - reach); c <= std::min(gt.width() - 1, p.col + reach); ++c) {
        const int j = gt_index[static_cast<std::size_t>(r) * static_cast<std::size_t>(gt.width()) +
                               static_cast<std::size_t>(c)];
        if (j < 0) continue;
        const double d2 = squared_distance(p, {r, c});
        if (d2 <= limit) arcs.push_back({static_cast<int>(i), j, std::sqrt(d2)});
      }
    }
    arcs.push_back({static_cast<int>(i), num_gt + static_cast<int>(i), outlier});
  }
  SolveOptions options;
  options.canonical_ties = false;
  options.scale = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(0.5 * kScaledCostBound / outlier), 1, kDefaultCostScale);
  const SparseCostGraph graph(static_cast<int>(preds.size()),
                              num_gt + static_cast<int>(preds.size()), std::move(arcs));
  const Matching matching = solve_assignment(graph, options);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int j = matching.assignment[i];
    if (j >= num_gt) continue;
    const PixelCoord g = gts[static_cast<std::size_t>(j)];
    out.pairs.push_back({preds[i], g});
    out.total_distance += std::sqrt(squared_distance(preds[i], g));
  }
  out.matched_pred = static_cast<std::int64_t>(out.pairs.size());
  out.matched_gt = out.matched_pred;
  return out;
}

namespace {

EdgeLabelMap binarize(const ProbPlane& plane, double threshold, int class_id) {
  EdgeLabelMap out(plane.height, plane.width, class_id);
  for (int r = 0; r < plane.height; ++r) {
    for (int c = 0; c < plane.width; ++c) {
      if (plane.at(r, c) >= threshold) out.set(r, c);
    }
  }
  return out;
}

}  // namespace

BenchAccumulator pr_accumulate(BenchAccumulator acc, const ProbMap& prob, const MultiLabelMap& gt,
                               const BenchConfig& cfg) {
  cfg.validate();
  if (prob.height() != gt.height() || prob.width() != gt.width() ||
      prob.num_classes() != gt.num_classes()) {
    throw InvalidArgument("prediction and ground truth differ in shape");
  }
  if (acc.num_classes() != gt.num_classes() || acc.thresholds() != cfg.thresholds) {
    throw InvalidArgument("accumulator shape does not match the benchmark configuration");
  }
  const double max_dist = cfg.max_distance(gt.height(), gt.width());
  for (int k = 0; k < gt.num_classes(); ++k) {
    const EdgeLabelMap gt_k = extract_class(gt, k);
    const EdgeLabelMap gt_eval = clear_border(
        cfg.mode == BenchMode::kThin ? thin(gt_k) : dilate_gt(gt_k, cfg.raw_gt_dilation),
        cfg.border_ignore);
    const auto total_gt = static_cast<std::int64_t>(gt_eval.count());
    const ProbPlane plane = prob.plane(k);

    EdgeLabelMap previous;
    MatchCounts previous_counts;
    for (int t = 0; t < acc.num_thresholds(); ++t) {
      const EdgeLabelMap raw = binarize(plane, cfg.thresholds[static_cast<std::size_t>(t)], k);
      MatchCounts counts;
      if (t > 0 && raw == previous) {
        counts = previous_counts;
      } else {
        const EdgeLabelMap pred =
            clear_border(cfg.mode == BenchMode::kThin ? thin(raw) : raw, cfg.border_ignore);
        const Correspondence c = correspond(pred, gt_eval, max_dist);
        counts = {c.matched_pred, static_cast<std::int64_t>(pred.count()), c.matched_gt, total_gt};
      }
      acc.at(k, t) += counts;
      previous = raw;
      previous_counts = counts;
    }
  }
  return acc;
}

PrCurve pr_curve(const BenchAccumulator& acc, int k) {
  if (k < 0 || k >= acc.num_classes()) throw InvalidArgument("class index out of range");
  PrCurve curve;
  for (int t = 0; t < acc.num_thresholds(); ++t) {
    const MatchCounts& c = acc.at(k, t);
    PrPoint point;
    point.threshold = acc.thresholds()[static_cast<std::size_t>(t)];
    point.has_predictions = c.total_pred > 0;
    point.precision = c.total_pred > 0 ? static_cast<double>(c.matched_pred) / c.total_pred : 0.0;
    point.recall = c.total_gt > 0 ? static_cast<double>(c.matched_gt) / c.total_gt : 0.0;
    curve.points.push_back(point);
  }
  return curve;
}

double f_measure(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

MfResult mf_ods(const BenchAccumulator& acc) {
  if (acc.num_classes() == 0 || acc.num_thresholds() == 0) {
    throw InvalidArgument("empty accumulator");
  }
  MfResult out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  int present = 0;
  for (int k = 0; k < acc.num_classes(); ++k) {
    bool has_gt = false;
    for (int t = 0; t < acc.num_thresholds(); ++t) has_gt = has_gt || acc.at(k, t).total_gt > 0;
    out.present.push_back(has_gt);
    if (!has_gt) {
      out.per_class.push_back(nan);
      out.best_threshold.push_back(nan);
      continue;
    }
    double best = -1.0;
    double best_t = nan;
    for (const PrPoint& p : pr_curve(acc, k).points) {
      const double f = f_measure(p.precision, p.recall);
      if (f > best) {
        best = f;
        best_t = p.threshold;
      }
    }
    out.per_class.push_back(best);
    out.best_threshold.push_back(best_t);
    sum += best;
    ++present;
  }
  out.mean = present > 0 ? sum / present : 0.0;
  return out;
}

double average_precision(const PrCurve& curve) {
  std::vector<PrPoint> points;
  for (const PrPoint& p : curve.points) {
    if (p.has_predictions) points.push_back(p);
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].threshold <= points[i - 1].threshold) {
      throw InvalidArgument("curve points must be ordered by increasing threshold");
    }
    if (points[i].recall > points[i - 1].recall) {
      throw InvalidArgument("recall increases with threshold at " +
                            std::to_string(points[i].threshold) +
                            "; average precision needs a Raw-mode curve");
    }
  }
  if (points.empty()) return 0.0;
  std::reverse(points.begin(), points.end());  // increasing recall
  double area = points.front().precision * points.front().recall;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += 0.5 * (points[i].precision + points[i - 1].precision) *
            (points[i].recall - points[i - 1].recall);
  }
  return area;
}

}  // namespace seal
