#pragma once

// Exact min-cost sparse bipartite assignment: every left node is matched to a
// distinct right node; right nodes may stay unmatched.

#include <cstdint>
#include <span>
#include <vector>

namespace seal {

inline constexpr std::int64_t kDefaultCostScale = 1'000'000;
// Largest |cost * scale| accepted by scale_costs. Leaves headroom for sums of
// up to ~10^6 arcs in int64.
inline constexpr double kScaledCostBound = 1e12;

struct Arc {
  int left = 0;
  int right = 0;
  double cost = 0.0;
};

class SparseCostGraph {
 public:
  SparseCostGraph(int num_left, int num_right, std::vector<Arc> arcs);

  int num_left() const { return num_left_; }
  int num_right() const { return num_right_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  // Arcs grouped by left node, each group sorted by right index.
  std::span<const Arc> arcs_of(int left) const;
  // Cost of arc (left, right) or nullptr when absent.
  const Arc* find_arc(int left, int right) const;

 private:
  int num_left_;
  int num_right_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> offsets_;
};

struct Matching {
  // assignment[left] = right
  std::vector<int> assignment;
  // Sum of the chosen arcs' real costs.
  double total_cost = 0.0;
  // Sum of the chosen arcs' integer-scaled costs; the quantity that is minimised.
  std::int64_t scaled_cost = 0;

  friend bool operator==(const Matching&, const Matching&) = default;
};

struct SolveOptions {
  std::int64_t scale = kDefaultCostScale;
  // Pick the lexicographically smallest optimal assignment. Callers that only
  // need the optimal value (or cardinality) may switch this off.
  bool canonical_ties = true;
};

// round(cost * scale), halves away from zero. Throws InvalidArgument when
// scale <= 0 or a scaled value exceeds kScaledCostBound.
std::vector<std::int64_t> scale_costs(std::span<const double> costs, std::int64_t scale);
std::int64_t scale_cost(double cost, std::int64_t scale);

// Minimum-cost assignment covering every left node. Throws InfeasibleError
// naming a deficient left set when no such assignment exists.
Matching solve_assignment(const SparseCostGraph& graph, const SolveOptions& options = {});

bool verify_matching(const SparseCostGraph& graph, const Matching& matching,
                     std::int64_t scale = kDefaultCostScale);

}  // namespace seal
