#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "seal/align.hpp"
#include "seal/oracle.hpp"

using namespace seal;

namespace {

oracle::SmallInstance make_instance(int h, int w, std::vector<PixelCoord> edges, float fill) {
  oracle::SmallInstance inst;
  inst.y = EdgeLabelMap(h, w);
  for (PixelCoord p : edges) inst.y.set(p);
  inst.prob = clamp_probs(ProbMap(h, w, 1, fill), inst.cfg.epsilon);
  inst.cfg.window_radius = 2;
  return inst;
}

}  // namespace

TEST_CASE("empty and single-pixel label sets") {
  oracle::SmallInstance empty = make_instance(3, 3, {}, 0.5F);
  const auto none = oracle::brute_force_align(empty);
  CHECK(none.labels.count() == 0);
  CHECK(none.mapping.pairs.empty());
  CHECK(none.scaled_cost == 0);
  CHECK(oracle::check_label_equivalence(empty));

  oracle::SmallInstance one = make_instance(4, 4, {{1, 1}}, 0.1F);
  one.prob = clamp_probs(ProbMap(4, 4, 1, 0.1F), 1e-6);
  ProbMap p = one.prob;
  p.set(0, 2, 3, 0.9F);
  one.prob = p;
  const auto best = oracle::brute_force_align(one);
  CHECK(best.labels.at(2, 3));
  CHECK(best.labels.count() == 1);
  CHECK(oracle::check_label_equivalence(one));
}

TEST_CASE("both enumerations reach the same optimum") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 150; ++i) {
    oracle::InstanceOptions opts;
    opts.biased = i % 2 == 1;
    const oracle::SmallInstance inst = oracle::random_instance(rng, opts);
    const auto a = oracle::brute_force_align(inst);
    const auto b = oracle::brute_force_align_by_mappings(inst);
    CHECK(a.scaled_cost == b.scaled_cost);
    CHECK(oracle::mapping_cost(inst, a.mapping) == a.scaled_cost);
    CHECK(realize_labels(inst.y, a.mapping) == a.labels);
  }
}

TEST_CASE("alignment reaches the exhaustive optimum on random small instances") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    oracle::InstanceOptions opts;
    opts.biased = i % 2 == 0;
    const oracle::SmallInstance inst = oracle::random_instance(rng, opts);
    CHECK_MESSAGE(oracle::check_label_equivalence(inst), "instance " << i);
  }
}

TEST_CASE("uniform probabilities make the identity optimal") {
  oracle::SmallInstance inst = make_instance(5, 5, {{1, 1}, {1, 2}, {2, 3}}, 0.5F);
  CHECK(oracle::check_label_equivalence(inst));
  const auto best = oracle::brute_force_align(inst);
  CHECK(best.labels == inst.y);
  CHECK(best.scaled_cost == oracle::mapping_cost(inst, identity_mapping(inst.y)));
}

TEST_CASE("smoothness rounds agree with exhaustive search given the previous mapping") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    oracle::InstanceOptions opts;
    opts.biased = true;
    opts.lambda = 0.05 + 0.2 * (i % 4);
    oracle::SmallInstance inst = oracle::random_instance(rng, opts);
    const EdgeChain chain(inst.y);
    const UnaryModel model = build_unary_model(inst.y, chain, inst.cfg, inst.mode);
    const Mapping first =
        assign_step(inst.y, inst.plane(), model, chain, inst.cfg, inst.cfg.window_radius, nullptr);
    const Mapping second =
        assign_step(inst.y, inst.plane(), model, chain, inst.cfg, inst.cfg.window_radius, &first);
    const auto best = oracle::brute_force_align_by_mappings(inst, &first);
    CHECK(oracle::mapping_cost(inst, second, &first) == best.scaled_cost);
  }
}

TEST_CASE("every label set of the right size is reachable") {
  EdgeLabelMap y(3, 3);
  y.set(0, 0);
  y.set(1, 2);
  CHECK(oracle::check_surjectivity(y) == 36);
  EdgeLabelMap z(2, 3);
  CHECK(oracle::check_surjectivity(z) == 1);
  z.set(1, 1);
  z.set(0, 1);
  z.set(0, 2);
  CHECK(oracle::check_surjectivity(z) == 20);
}

TEST_CASE("label cost decomposes into per-pixel flips") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> unit(0.001F, 0.999F);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> v(30);
    for (float& x : v) x = unit(rng);
    const ProbMap prob(5, 6, 1, v);
    EdgeLabelMap labels(5, 6);
    for (int i = 0; i < 8; ++i) labels.set(static_cast<int>(rng() % 5), static_cast<int>(rng() % 6));
    CHECK(oracle::flip_cost_identity_error(prob.plane(0), labels) < 1e-9);
  }
}
