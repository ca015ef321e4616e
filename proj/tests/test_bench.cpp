#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "seal/bench.hpp"
#include "seal/errors.hpp"

using namespace seal;

namespace {

EdgeLabelMap horizontal_line(int h, int w, int row, int c0, int c1) {
  EdgeLabelMap m(h, w);
  for (int c = c0; c <= c1; ++c) m.set(row, c);
  return m;
}

MultiLabelMap as_multi(const EdgeLabelMap& m) { return combine_classes({m}); }

ProbMap as_prob(const EdgeLabelMap& m) {
  ProbMap p(m.height(), m.width(), 1);
  for (PixelCoord q : edge_pixels(m)) p.set(0, q.row, q.col, 1.0F);
  return p;
}

}  // namespace

TEST_CASE("thinning") {
  const EdgeLabelMap line = horizontal_line(7, 12, 3, 2, 9);
  CHECK(thin(line) == line);
  CHECK(thin(EdgeLabelMap(5, 5)).count() == 0);

  // 3-wide ribbon, rows 2-4, cols 2-11 of a 7x14 map. The reference
  // skeletonisation gives row 3, cols 3..10.
  EdgeLabelMap ribbon(7, 14);
  for (int r = 2; r <= 4; ++r) {
    for (int c = 2; c <= 11; ++c) ribbon.set(r, c);
  }
  const EdgeLabelMap t = thin(ribbon);
  const auto pixels = edge_pixels(t);
  REQUIRE_FALSE(pixels.empty());
  for (PixelCoord p : pixels) CHECK(p.row == 3);
  CHECK(std::abs(pixels.front().col - 3) <= 1);
  CHECK(std::abs(pixels.back().col - 10) <= 1);
  CHECK(static_cast<int>(pixels.size()) == pixels.back().col - pixels.front().col + 1);
}

TEST_CASE("thinning is idempotent and never adds pixels") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    EdgeLabelMap m(16, 16);
    for (int i = 0; i < 60; ++i) {
      const int r = static_cast<int>(rng() % 14);
      const int c = static_cast<int>(rng() % 14);
      m.set(r, c);
      m.set(r + 1, c);
      m.set(r, c + 1);
    }
    const EdgeLabelMap once = thin(m);
    CHECK(thin(once) == once);
    for (PixelCoord p : edge_pixels(once)) CHECK(m.at(p));
  }
}

TEST_CASE("dilation and border clearing") {
  EdgeLabelMap one(5, 5);
  one.set(0, 0);
  CHECK(dilate_gt(one, 0) == one);
  const EdgeLabelMap d = dilate_gt(one, 1);
  CHECK(d.count() == 4);
  one.set(2, 2);
  CHECK(dilate_gt(one, 1).count() == 4 + 9 - 1);

  EdgeLabelMap full(6, 6);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) full.set(r, c);
  }
  CHECK(clear_border(full, 2).count() == 4);
}

TEST_CASE("correspondence under translation") {
  const EdgeLabelMap gt = horizontal_line(12, 14, 2, 2, 11);
  const EdgeLabelMap moved = horizontal_line(12, 14, 5, 2, 11);
  const Correspondence same = correspond(gt, gt, 1.0);
  CHECK(same.matched_pred == 10);
  CHECK(same.matched_gt == 10);
  CHECK(correspond(moved, gt, 4.0).matched_pred == 10);
  CHECK(correspond(moved, gt, 4.0).total_distance == doctest::Approx(30.0));
  CHECK(correspond(moved, gt, 2.0).matched_pred == 0);
}

TEST_CASE("correspondence maximises cardinality before distance") {
  // pred a=(0,0), b=(0,2); gt x=(0,1), y=(0,3). Greedy a-x leaves b-y; a
  // distance-first matcher could pair b-x and strand a.
  EdgeLabelMap pred(1, 5), gt(1, 5);
  pred.set(0, 0);
  pred.set(0, 2);
  gt.set(0, 1);
  gt.set(0, 3);
  const Correspondence c = correspond(pred, gt, 1.0);
  CHECK(c.matched_pred == 2);
  CHECK(c.total_distance == doctest::Approx(2.0));
}

TEST_CASE("accumulator merging is field-wise") {
  BenchAccumulator a(2, {0.5}), b(2, {0.5});
  a.at(0, 0) = {1, 2, 3, 4};
  b.at(0, 0) = {10, 20, 30, 40};
  b.at(1, 0) = {1, 1, 1, 1};
  a.merge(b);
  CHECK(a.at(0, 0) == MatchCounts{11, 22, 33, 44});
  CHECK(a.at(1, 0) == MatchCounts{1, 1, 1, 1});
  CHECK_THROWS_AS(a.merge(BenchAccumulator(3, {0.5})), InvalidArgument);
}

TEST_CASE("dataset accumulation equals merged per-image accumulation") {
  std::mt19937 rng(4);
  BenchConfig cfg;
  cfg.thresholds = default_thresholds(9);
  cfg.border_ignore = 1;
  BenchAccumulator whole(1, cfg.thresholds), merged(1, cfg.thresholds);
  for (int i = 0; i < 5; ++i) {
    EdgeLabelMap gt(20, 20);
    for (int c = 2; c < 18; ++c) gt.set(5 + i, c);
    std::vector<float> v(400);
    for (float& x : v) x = static_cast<float>(rng() % 100) / 100.0F;
    const ProbMap prob(20, 20, 1, v);
    whole = pr_accumulate(std::move(whole), prob, as_multi(gt), cfg);
    merged.merge(pr_accumulate(BenchAccumulator(1, cfg.thresholds), prob, as_multi(gt), cfg));
  }
  CHECK(whole == merged);
}

TEST_CASE("ground truth scored as prediction is perfect") {
  const EdgeLabelMap gt = horizontal_line(40, 40, 20, 5, 34);
  for (BenchMode mode : {BenchMode::kThin, BenchMode::kRaw}) {
    BenchConfig cfg;
    cfg.mode = mode;
    cfg.thresholds = {0.5};
    const ProbMap pred = as_prob(mode == BenchMode::kRaw ? dilate_gt(gt, cfg.raw_gt_dilation) : gt);
    const BenchAccumulator acc = pr_accumulate(BenchAccumulator(1, {0.5}), pred, as_multi(gt), cfg);
    const PrCurve curve = pr_curve(acc, 0);
    CHECK(curve.points[0].precision == 1.0);
    CHECK(curve.points[0].recall == 1.0);
    CHECK(mf_ods(acc).mean == 1.0);
  }
}

TEST_CASE("empty predictions") {
  const EdgeLabelMap gt = horizontal_line(30, 30, 15, 5, 24);
  BenchConfig cfg;
  const BenchAccumulator acc =
      pr_accumulate(BenchAccumulator(1, cfg.thresholds), ProbMap(30, 30, 1), as_multi(gt), cfg);
  const PrCurve curve = pr_curve(acc, 0);
  for (const PrPoint& p : curve.points) {
    CHECK(p.recall == 0.0);
    CHECK_FALSE(p.has_predictions);
  }
  CHECK(acc.at(0, 0).total_pred == 0);
  CHECK(mf_ods(acc).mean == 0.0);
  CHECK(average_precision(curve) == 0.0);
}

TEST_CASE("MF from hand-counted counts") {
  BenchAccumulator acc(1, {0.5});
  acc.at(0, 0) = {1, 1, 1, 2};  // precision 1, recall 0.5
  CHECK(mf_ods(acc).per_class[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("classes without ground truth are excluded from the mean") {
  BenchAccumulator acc(2, {0.5});
  acc.at(0, 0) = {2, 2, 2, 2};
  acc.at(1, 0) = {0, 3, 0, 0};
  const MfResult mf = mf_ods(acc);
  CHECK(std::isnan(mf.per_class[1]));
  CHECK_FALSE(mf.present[1]);
  CHECK(mf.mean == 1.0);
}

TEST_CASE("average precision") {
  PrCurve flat;
  for (int i = 0; i < 5; ++i) {
    flat.points.push_back({0.1 * (i + 1), 1.0, 1.0 - 0.25 * i, true});
  }
  CHECK(average_precision(flat) == doctest::Approx(1.0));

  PrCurve two;
  two.points.push_back({0.3, 0.5, 1.0, true});
  two.points.push_back({0.6, 1.0, 0.5, true});
  CHECK(average_precision(two) == doctest::Approx(0.875));

  PrCurve rising;
  rising.points.push_back({0.3, 1.0, 0.2, true});
  rising.points.push_back({0.6, 1.0, 0.5, true});
  CHECK_THROWS_AS(average_precision(rising), InvalidArgument);
}

TEST_CASE("benchmark configuration") {
  BenchConfig cfg;
  CHECK(cfg.thresholds.size() == 99);
  CHECK(cfg.thresholds.front() == doctest::Approx(0.01));
  CHECK(cfg.max_distance(300, 400) == doctest::Approx(10.0));
  cfg.tolerance_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
