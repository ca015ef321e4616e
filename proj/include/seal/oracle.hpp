#pragma once

// Exhaustive reference implementations for small instances. They share only
// the per-pair cost formulas with the production path; the optimisation is
// done by plain enumeration.

#include <cstdint>
#include <optional>
#include <random>

#include "seal/align.hpp"
#include "seal/assign.hpp"
#include "seal/grid.hpp"

namespace seal::oracle {

inline constexpr double kEnumerationLimit = 1e7;

struct SmallInstance {
  EdgeLabelMap y;
  ProbMap prob;  // one plane, already clamped
  AlignConfig cfg;
  AlignMode mode = AlignMode::kIsotropic;

  ProbPlane plane() const { return prob.plane(0); }
};

struct BruteForceResult {
  EdgeLabelMap labels;
  Mapping mapping;
  std::int64_t scaled_cost = 0;
  double cost = 0.0;
};

// Enumerates every label set of size |y| inside the union of candidate
// windows (lexicographic pixel subsets) and, for each, every mapping onto it
// (permutations). Minimises the unary objective, plus the frozen pairwise
// term when `previous` is given.
BruteForceResult brute_force_align(const SmallInstance& inst, const Mapping* previous = nullptr);

// Same optimum reached by depth-first enumeration of injective mappings.
BruteForceResult brute_force_align_by_mappings(const SmallInstance& inst,
                                               const Mapping* previous = nullptr);

// Integer-scaled cost of one mapping under the oracle's cost definition.
std::int64_t mapping_cost(const SmallInstance& inst, const Mapping& m,
                          const Mapping* previous = nullptr);

// min over mappings from y onto `labels` (within windows) of the scaled cost,
// or nullopt when no such mapping exists.
std::optional<std::int64_t> labels_objective(const SmallInstance& inst, const EdgeLabelMap& labels);

// Exhaustive assignment with the solver's tie rule (first optimum in
// lexicographic order). num_left <= 6.
Matching brute_force_matching(const SparseCostGraph& graph,
                              std::int64_t scale = kDefaultCostScale);

// realize_labels(y, align(...)) reaches the brute-force optimum of the label
// objective.
bool check_label_equivalence(const SmallInstance& inst);

// Every label set with |y| pixels is realised by some mapping from y.
// Returns the number of label sets checked, or -1 on a counterexample.
std::int64_t check_surjectivity(const EdgeLabelMap& y);

// |C_N(labels) - (C_N(0) + sum over set pixels of log((1 - s) / s))|
double flip_cost_identity_error(const ProbPlane& prob, const EdgeLabelMap& labels);

struct InstanceOptions {
  int min_side = 3;
  int max_side = 6;
  int max_edges = 4;
  int max_window = 3;
  bool biased = false;
  double lambda = 0.0;
};

SmallInstance random_instance(std::mt19937_64& rng, const InstanceOptions& options);

}  // namespace seal::oracle
