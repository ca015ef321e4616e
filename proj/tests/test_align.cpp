#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "seal/align.hpp"
#include "seal/errors.hpp"

using namespace seal;

namespace {

EdgeLabelMap line(int h, int w, std::initializer_list<PixelCoord> pixels) {
  EdgeLabelMap m(h, w);
  for (PixelCoord p : pixels) m.set(p);
  return m;
}

ProbMap uniform(int h, int w, float v) { return ProbMap(h, w, 1, v); }

}  // namespace

TEST_CASE("candidate windows clip at the border") {
  CHECK(candidate_window({0, 0}, 1, 3, 3) == std::vector<PixelCoord>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(candidate_window({1, 1}, 1, 3, 3).size() == 9);
  CHECK(candidate_window({10, 10}, 3, 30, 30).size() == 49);
}

TEST_CASE("isotropic unary cost") {
  CHECK(unary_cost_isotropic({0, 0}, {0, 0}, 0.5, 1.0) == doctest::Approx(0.0));
  CHECK(unary_cost_isotropic({1, 1}, {0, 0}, 0.5, 1.0) == doctest::Approx(1.0));
  CHECK(unary_cost_isotropic({2, 2}, {2, 2}, 0.9, 1.0) == doctest::Approx(-2.197224577336219).epsilon(1e-12));
  CHECK_THROWS_AS(unary_cost_isotropic({0, 0}, {0, 0}, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(unary_cost_isotropic({0, 0}, {0, 0}, 1.0, 1.0), std::domain_error);
}

TEST_CASE("tangent estimates on straight chains") {
  const EdgeLabelMap horizontal = line(5, 9, {{2, 1}, {2, 2}, {2, 3}, {2, 4}, {2, 5}, {2, 6}});
  CHECK(estimate_tangent(EdgeChain(horizontal), {2, 3}, 4).theta == doctest::Approx(0.0));

  const EdgeLabelMap vertical = line(9, 5, {{1, 2}, {2, 2}, {3, 2}, {4, 2}, {5, 2}, {6, 2}});
  CHECK(estimate_tangent(EdgeChain(vertical), {3, 2}, 4).theta == doctest::Approx(std::numbers::pi / 2));

  const EdgeLabelMap diagonal = line(8, 8, {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}});
  CHECK(estimate_tangent(EdgeChain(diagonal), {3, 3}, 4).theta == doctest::Approx(std::numbers::pi / 4));

  const EdgeLabelMap anti = line(8, 8, {{1, 6}, {2, 5}, {3, 4}, {4, 3}, {5, 2}});
  CHECK(estimate_tangent(EdgeChain(anti), {3, 4}, 4).theta == doctest::Approx(3 * std::numbers::pi / 4));

  const EdgeLabelMap lone = line(3, 3, {{1, 1}});
  CHECK(estimate_tangent(EdgeChain(lone), {1, 1}, 4).isotropic_fallback);
}

TEST_CASE("precision matrix") {
  const PrecisionMatrix s0 = precision_matrix(0.0, 1.0, 4.0);
  CHECK(s0.a11 == doctest::Approx(0.5));
  CHECK(s0.a22 == doctest::Approx(0.03125));
  CHECK(s0.a12 == doctest::Approx(0.0));

  const PrecisionMatrix s90 = precision_matrix(std::numbers::pi / 2, 1.0, 4.0);
  CHECK(s90.a11 == doctest::Approx(0.03125));
  CHECK(s90.a22 == doctest::Approx(0.5));
  CHECK(std::fabs(s90.a12) < 1e-15);

  for (double theta : {0.1, 0.7, 1.3, 2.9}) {
    const PrecisionMatrix iso = precision_matrix(theta, 2.5, 2.5);
    CHECK(iso.a11 == doctest::Approx(1.0 / 12.5));
    CHECK(iso.a22 == doctest::Approx(1.0 / 12.5));
    CHECK(std::fabs(iso.a12) < 1e-15);
  }
}

TEST_CASE("biased unary cost") {
  const PrecisionMatrix s = precision_matrix(0.0, 1.0, 4.0);
  CHECK(unary_cost_biased({3, 3}, {3, 3}, 0.5, s) == doctest::Approx(0.0));
  // One pixel along +x (a column step).
  CHECK(unary_cost_biased({3, 4}, {3, 3}, 0.5, s) == doctest::Approx(0.5));
  // One pixel across the edge is cheap.
  CHECK(unary_cost_biased({4, 3}, {3, 3}, 0.5, s) == doctest::Approx(0.03125));

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coord(-6, 6);
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const PixelCoord p{coord(rng), coord(rng)};
    const double pr = prob(rng);
    const PrecisionMatrix iso = precision_matrix(prob(rng) * 3.0, 1.7, 1.7);
    CHECK(unary_cost_biased(p, {0, 0}, pr, iso) ==
          doctest::Approx(unary_cost_isotropic(p, {0, 0}, pr, 1.7)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(unary_cost_biased({0, 0}, {0, 0}, 0.5, PrecisionMatrix{1.0, 2.0, 1.0}), InvalidArgument);
}

TEST_CASE("geodesic neighbourhoods follow the chain") {
  CHECK(geodesic_neighborhood(EdgeChain(line(3, 3, {{1, 1}})), {1, 1}, 3).empty());

  const EdgeLabelMap five = line(3, 7, {{1, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}});
  const auto n1 = geodesic_neighborhood(EdgeChain(five), {1, 3}, 1);
  CHECK(n1.size() == 2);
  CHECK(std::find(n1.begin(), n1.end(), PixelCoord{1, 2}) != n1.end());
  CHECK(std::find(n1.begin(), n1.end(), PixelCoord{1, 4}) != n1.end());

  EdgeLabelMap nine(3, 11);
  for (int c = 1; c <= 9; ++c) nine.set(1, c);
  CHECK(geodesic_neighborhood(EdgeChain(nine), {1, 5}, 3).size() == 6);
}

TEST_CASE("chains cover every pixel once and close loops") {
  EdgeLabelMap ring(7, 7);
  for (int i = 1; i <= 5; ++i) {
    ring.set(1, i);
    ring.set(5, i);
    ring.set(i, 1);
    ring.set(i, 5);
  }
  const EdgeChain chain(ring);
  std::size_t total = 0;
  for (const auto& c : chain.chains()) total += c.pixels.size();
  CHECK(total == ring.count());
  REQUIRE(chain.chains().size() == 1);
  CHECK(chain.chains()[0].closed);
  // Wrapping: every pixel on a closed loop has two neighbours at distance 1.
  for (PixelCoord q : edge_pixels(ring)) CHECK(chain.within_steps(q, 1).size() == 2);
}

TEST_CASE("pairwise cost") {
  const EdgeLabelMap y = line(3, 4, {{1, 1}, {1, 2}});
  const EdgeChain chain(y);
  const Mapping id = identity_mapping(y);
  CHECK(pairwise_cost(id, id, chain, 0.02, 1) == doctest::Approx(0.0));

  Mapping shifted;
  shifted.pairs = {{{1, 1}, {2, 2}}, {{1, 2}, {2, 3}}};
  CHECK(pairwise_cost(shifted, shifted, chain, 0.02, 1) == doctest::Approx(0.0));

  // q1 moves by (1, 0) in (dx, dy); q2 stays.
  Mapping m;
  m.pairs = {{{1, 1}, {1, 2}}, {{1, 2}, {1, 2}}};
  CHECK(pairwise_cost(m, m, chain, 0.02, 1) == doctest::Approx(0.04));
}

TEST_CASE("uniform probabilities leave labels in place") {
  EdgeLabelMap y(8, 8);
  for (PixelCoord p : std::vector<PixelCoord>{{1, 1}, {2, 2}, {3, 3}, {3, 4}, {6, 2}}) y.set(p);
  const ProbMap prob = uniform(8, 8, 0.5F);
  for (AlignMode mode : {AlignMode::kIsotropic, AlignMode::kBiasedMrf}) {
    const Mapping m = align(y, prob.plane(0), AlignConfig{}, mode);
    CHECK(m == identity_mapping(y));
  }
}

TEST_CASE("a single pixel moves to a strong neighbour") {
  const EdgeLabelMap y = line(5, 5, {{2, 2}});
  ProbMap prob = uniform(5, 5, 0.01F);
  prob.set(0, 2, 3, 0.99F);
  AlignConfig cfg;
  cfg.sigma = 1.0;
  cfg.window_radius = 3;
  const AlignResult r = align_detailed(y, clamp_probs(prob, cfg.epsilon).plane(0), cfg, AlignMode::kIsotropic);
  REQUIRE(r.mapping.size() == 1);
  CHECK(r.mapping.pairs[0].target == PixelCoord{2, 3});
  CHECK(r.unary_cost == doctest::Approx(-4.095119850134590).epsilon(1e-6));
  // Staying would have cost +4.595.
  CHECK(unary_cost_isotropic({2, 2}, {2, 2}, prob.at(0, 2, 2), 1.0) ==
        doctest::Approx(4.595119850134590).epsilon(1e-6));
}

TEST_CASE("alignment preserves count and injectivity") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<float> unit(0.0F, 1.0F);
  for (int trial = 0; trial < 30; ++trial) {
    EdgeLabelMap y(12, 12);
    for (int i = 0; i < 15; ++i) y.set(static_cast<int>(rng() % 12), static_cast<int>(rng() % 12));
    std::vector<float> values(144);
    for (float& v : values) v = unit(rng);
    const ProbMap prob = clamp_probs(ProbMap(12, 12, 1, values), 1e-6);
    AlignConfig cfg;
    cfg.window_radius = 3;
    for (AlignMode mode : {AlignMode::kIsotropic, AlignMode::kBiasedMrf}) {
      const Mapping m = align(y, prob.plane(0), cfg, mode);
      CHECK(m.size() == y.count());
      CHECK(m.targets_distinct());
      CHECK(realize_labels(y, m).count() == y.count());
    }
  }
}

TEST_CASE("identity is always feasible, so crowded labels still align") {
  EdgeLabelMap y(2, 2);
  y.set(0, 0);
  y.set(0, 1);
  y.set(1, 0);
  y.set(1, 1);
  AlignConfig cfg;
  cfg.window_radius = 1;
  const AlignResult r = align_detailed(y, uniform(2, 2, 0.5F).plane(0), cfg, AlignMode::kIsotropic);
  CHECK(r.mapping == identity_mapping(y));
  CHECK(r.window_radius == 1);
}

TEST_CASE("realize_labels") {
  const EdgeLabelMap y = line(3, 3, {{1, 1}});
  CHECK(realize_labels(y, identity_mapping(y)) == y);
  Mapping m;
  m.pairs = {{{1, 1}, {1, 2}}};
  const EdgeLabelMap out = realize_labels(y, m);
  CHECK(out.count() == 1);
  CHECK(out.at(1, 2));
  Mapping wrong;
  wrong.pairs = {{{0, 0}, {1, 2}}};
  CHECK_THROWS_AS(realize_labels(y, wrong), InvalidArgument);
}

TEST_CASE("biased mode with equal sigmas and no smoothness matches isotropic") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<float> unit(0.0F, 1.0F);
  for (int trial = 0; trial < 20; ++trial) {
    EdgeLabelMap y(10, 10);
    for (int i = 0; i < 8; ++i) y.set(static_cast<int>(rng() % 10), static_cast<int>(rng() % 10));
    std::vector<float> values(100);
    for (float& v : values) v = unit(rng);
    const ProbMap prob = clamp_probs(ProbMap(10, 10, 1, values), 1e-6);
    AlignConfig cfg;
    cfg.sigma = cfg.sigma_x = cfg.sigma_y = 2.0;
    cfg.lambda = 0.0;
    cfg.window_radius = 3;
    const AlignResult iso = align_detailed(y, prob.plane(0), cfg, AlignMode::kIsotropic);
    const AlignResult biased = align_detailed(y, prob.plane(0), cfg, AlignMode::kBiasedMrf);
    CHECK(std::fabs(iso.unary_cost - biased.unary_cost) < 1e-9);
    CHECK(iso.mapping == biased.mapping);
  }
}

TEST_CASE("align_all_classes handles each class independently") {
  MultiLabelMap noisy(6, 6, 2);
  noisy.set(2, 2, 0);
  noisy.set(2, 2, 1);
  ProbMap prob(6, 6, 2, 0.01F);
  prob.set(0, 2, 3, 0.99F);
  prob.set(1, 3, 2, 0.99F);
  AlignConfig cfg;
  cfg.sigma = 1.0;
  cfg.window_radius = 2;
  std::vector<Mapping> maps;
  const MultiLabelMap out = align_all_classes(noisy, prob, cfg, AlignMode::kIsotropic, &maps, 2);
  CHECK(out.has(2, 3, 0));
  CHECK(out.has(3, 2, 1));
  CHECK(maps.size() == 2);
}

TEST_CASE("config validation") {
  AlignConfig cfg;
  cfg.sigma_y = 0.5;
  CHECK_THROWS_AS(cfg.validate(AlignMode::kBiasedMrf), InvalidArgument);
  CHECK_NOTHROW(cfg.validate(AlignMode::kIsotropic));
  AlignConfig neg;
  neg.lambda = -1.0;
  CHECK_THROWS_AS(neg.validate(AlignMode::kBiasedMrf), InvalidArgument);
  CHECK(default_window_radius(4.0) == 12);
  CHECK(high_quality_config().sigma_y == 3.0);
}
