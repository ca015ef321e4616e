#include "seal/assign.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "seal/errors.hpp"

namespace seal {

SparseCostGraph::SparseCostGraph(int num_left, int num_right, std::vector<Arc> arcs)
    : num_left_(num_left), num_right_(num_right), arcs_(std::move(arcs)) {
  if (num_left < 0 || num_right < 0) throw InvalidArgument("node counts must be non-negative");
  for (const Arc& a : arcs_) {
    if (a.left < 0 || a.left >= num_left || a.right < 0 || a.right >= num_right) {
      throw InvalidArgument("arc (" + std::to_string(a.left) + ", " + std::to_string(a.right) +
                            ") out of range");
    }
    if (!std::isfinite(a.cost)) throw InvalidArgument("arc cost is not finite");
  }
  std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) {
    return a.left != b.left ? a.left < b.left : a.right < b.right;
  });
  for (std::size_t i = 1; i < arcs_.size(); ++i) {
    if (arcs_[i].left == arcs_[i - 1].left && arcs_[i].right == arcs_[i - 1].right) {
      throw InvalidArgument("duplicate arc (" + std::to_string(arcs_[i].left) + ", " +
                            std::to_string(arcs_[i].right) + ")");
    }
  }
  offsets_.assign(static_cast<std::size_t>(num_left) + 1, 0);
  for (const Arc& a : arcs_) ++offsets_[static_cast<std::size_t>(a.left) + 1];
  for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
}

std::span<const Arc> SparseCostGraph::arcs_of(int left) const {
  const auto l = static_cast<std::size_t>(left);
  return std::span<const Arc>(arcs_).subspan(offsets_[l], offsets_[l + 1] - offsets_[l]);
}

const Arc* SparseCostGraph::find_arc(int left, int right) const {
  if (left < 0 || left >= num_left_) return nullptr;
  const auto arcs = arcs_of(left);
  const auto it = std::lower_bound(arcs.begin(), arcs.end(), right,
                                   [](const Arc& a, int r) { return a.right < r; });
  return (it != arcs.end() && it->right == right) ? &*it : nullptr;
}

std::int64_t scale_cost(double cost, std::int64_t scale) {
  if (scale <= 0) throw InvalidArgument("cost scale must be positive");
  const double scaled = cost * static_cast<double>(scale);
  if (!(std::fabs(scaled) <= kScaledCostBound)) {
    throw InvalidArgument("scaled cost " + std::to_string(scaled) + " exceeds saturation bound");
  }
  return std::llround(scaled);
}

std::vector<std::int64_t> scale_costs(std::span<const double> costs, std::int64_t scale) {
  std::vector<std::int64_t> out;
  out.reserve(costs.size());
  for (double c : costs) out.push_back(scale_cost(c, scale));
  return out;
}

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Successive shortest augmenting paths with Johnson potentials. Duals satisfy
// u[left] + v[right] <= cost on every arc, equality on matched arcs, v <= 0,
// and v == 0 on every unmatched right; the canonicalisation pass relies on it.
class Solver {
 public:
  Solver(const SparseCostGraph& graph, std::int64_t scale)
      : g_(graph),
        n_(graph.num_left()),
        m_(graph.num_right()),
        u_(static_cast<std::size_t>(n_), 0),
        v_(static_cast<std::size_t>(m_), 0),
        match_(static_cast<std::size_t>(n_), -1),
        owner_(static_cast<std::size_t>(m_), -1),
        dist_(static_cast<std::size_t>(m_), kInf),
        pred_(static_cast<std::size_t>(m_), -1),
        settled_(static_cast<std::size_t>(m_), 0) {
    cost_.reserve(graph.arcs().size());
    for (const Arc& a : graph.arcs()) cost_.push_back(scale_cost(a.cost, scale));
    offsets_.reserve(static_cast<std::size_t>(n_) + 1);
    std::size_t offset = 0;
    for (int i = 0; i < n_; ++i) {
      offsets_.push_back(offset);
      offset += graph.arcs_of(i).size();
    }
    offsets_.push_back(offset);
  }

  void solve() {
    for (int i = 0; i < n_; ++i) {
      const auto arcs = g_.arcs_of(i);
      if (arcs.empty()) {
        throw InfeasibleError("left node " + std::to_string(i) + " has no arcs", {i});
      }
      std::int64_t best = kInf;
      for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) best = std::min(best, cost_[e]);
      u_[static_cast<std::size_t>(i)] = best;
    }
    for (int s = 0; s < n_; ++s) augment(s);
  }

  void canonicalize();

  Matching result() const {
    Matching out;
    out.assignment = match_;
    for (int i = 0; i < n_; ++i) {
      const Arc* arc = g_.find_arc(i, match_[static_cast<std::size_t>(i)]);
      out.total_cost += arc->cost;
      out.scaled_cost += cost_[static_cast<std::size_t>(arc - g_.arcs().data())];
    }
    return out;
  }

 private:
  std::int64_t reduced(int left, std::size_t arc_index) const {
    const int right = g_.arcs()[arc_index].right;
    return cost_[arc_index] - u_[static_cast<std::size_t>(left)] -
           v_[static_cast<std::size_t>(right)];
  }

  void augment(int s);
  bool try_reroute(int i, int r);
  void apply_moves(const std::vector<std::pair<int, int>>& moves);

  const SparseCostGraph& g_;
  int n_;
  int m_;
  std::vector<std::int64_t> cost_;
  std::vector<std::size_t> offsets_;
  std::vector<std::int64_t> u_;
  std::vector<std::int64_t> v_;
  std::vector<int> match_;
  std::vector<int> owner_;

  std::vector<std::int64_t> dist_;
  std::vector<int> pred_;
  std::vector<char> settled_;

  // Tight-arc adjacency used by canonicalize().
  std::vector<std::vector<int>> tight_out_;
  std::vector<std::vector<int>> tight_in_;
  std::vector<int> stamp_a_;
  std::vector<int> stamp_b_;
  std::vector<int> parent_a_;
  std::vector<int> parent_b_;
  int stamp_ = 0;
};

void Solver::augment(int s) {
  using Entry = std::pair<std::int64_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::vector<int> touched;
  std::vector<int> settled_list;

  for (std::size_t e = offsets_[s]; e < offsets_[s + 1]; ++e) {
    const int r = g_.arcs()[e].right;
    const std::int64_t d = reduced(s, e);
    if (d < dist_[static_cast<std::size_t>(r)]) {
      if (dist_[static_cast<std::size_t>(r)] == kInf) touched.push_back(r);
      dist_[static_cast<std::size_t>(r)] = d;
      pred_[static_cast<std::size_t>(r)] = s;
      heap.emplace(d, r);
    }
  }

  int target = -1;
  std::int64_t target_dist = 0;
  while (!heap.empty()) {
    const auto [d, r] = heap.top();
    heap.pop();
    const auto ru = static_cast<std::size_t>(r);
    if (settled_[ru] || d != dist_[ru]) continue;
    settled_[ru] = 1;
    settled_list.push_back(r);
    const int j = owner_[ru];
    if (j < 0) {
      target = r;
      target_dist = d;
      break;
    }
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e) {
      const int b = g_.arcs()[e].right;
      const auto bu = static_cast<std::size_t>(b);
      if (settled_[bu]) continue;
      const std::int64_t nd = d + reduced(j, e);
      if (nd < dist_[bu]) {
        if (dist_[bu] == kInf) touched.push_back(b);
        dist_[bu] = nd;
        pred_[bu] = j;
        heap.emplace(nd, b);
      }
    }
  }

  if (target < 0) {
    std::vector<int> deficient{s};
    for (int r : settled_list) deficient.push_back(owner_[static_cast<std::size_t>(r)]);
    std::sort(deficient.begin(), deficient.end());
    for (int r : touched) {
      dist_[static_cast<std::size_t>(r)] = kInf;
      settled_[static_cast<std::size_t>(r)] = 0;
    }
    throw InfeasibleError("no assignment covers left set of size " +
                              std::to_string(deficient.size()) + " (contains left " +
                              std::to_string(s) + ")",
                          std::move(deficient));
  }

  u_[static_cast<std::size_t>(s)] += target_dist;
  for (int r : settled_list) {
    const auto ru = static_cast<std::size_t>(r);
    v_[ru] += dist_[ru] - target_dist;
    if (r != target) u_[static_cast<std::size_t>(owner_[ru])] += target_dist - dist_[ru];
  }

  for (int r = target;;) {
    const int j = pred_[static_cast<std::size_t>(r)];
    const int previous = match_[static_cast<std::size_t>(j)];
    match_[static_cast<std::size_t>(j)] = r;
    owner_[static_cast<std::size_t>(r)] = j;
    if (j == s) break;
    r = previous;
  }

  for (int r : touched) {
    dist_[static_cast<std::size_t>(r)] = kInf;
    settled_[static_cast<std::size_t>(r)] = 0;
  }
}

// Optimal assignments are exactly the left-covering matchings inside the
// tight-arc subgraph that also cover every right with v < 0. Lefts are fixed
// in index order to the smallest right that keeps such a matching available.
void Solver::canonicalize() {
  tight_out_.assign(static_cast<std::size_t>(n_), {});
  tight_in_.assign(static_cast<std::size_t>(m_), {});
  for (int j = 0; j < n_; ++j) {
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e) {
      if (reduced(j, e) == 0) {
        const int b = g_.arcs()[e].right;
        tight_out_[static_cast<std::size_t>(j)].push_back(b);
        tight_in_[static_cast<std::size_t>(b)].push_back(j);
      }
    }
  }
  stamp_a_.assign(static_cast<std::size_t>(m_), 0);
  stamp_b_.assign(static_cast<std::size_t>(m_), 0);
  parent_a_.assign(static_cast<std::size_t>(m_), -1);
  parent_b_.assign(static_cast<std::size_t>(m_), -1);

  for (int i = 0; i < n_; ++i) {
    const int current = match_[static_cast<std::size_t>(i)];
    for (int r : tight_out_[static_cast<std::size_t>(i)]) {
      if (r >= current) break;
      if (try_reroute(i, r)) break;
    }
  }
}

// Moves are (left, new right). Lefts > i may move; i moves from its current
// right r0 to r. Succeeds on an alternating cycle through r0, or an alternating
// path from r to a free right combined with a path re-covering r0 that starts
// at a right whose potential is zero.
bool Solver::try_reroute(int i, int r) {
  const int r0 = match_[static_cast<std::size_t>(i)];
  ++stamp_;
  std::vector<int> queue{r};
  stamp_a_[static_cast<std::size_t>(r)] = stamp_;
  parent_a_[static_cast<std::size_t>(r)] = -1;
  int free_end = -1;
  bool cycle = false;
  for (std::size_t head = 0; head < queue.size() && !cycle; ++head) {
    const int a = queue[head];
    const int j = owner_[static_cast<std::size_t>(a)];
    if (j < 0) {
      if (free_end < 0) free_end = a;
      continue;
    }
    if (j == i) {
      cycle = true;
      break;
    }
    if (j < i) continue;
    for (int b : tight_out_[static_cast<std::size_t>(j)]) {
      const auto bu = static_cast<std::size_t>(b);
      if (b == a || stamp_a_[bu] == stamp_) continue;
      stamp_a_[bu] = stamp_;
      parent_a_[bu] = a;
      queue.push_back(b);
    }
  }

  auto forward_path = [&](int end) {
    std::vector<int> path;
    for (int x = end; x >= 0; x = parent_a_[static_cast<std::size_t>(x)]) path.push_back(x);
    std::reverse(path.begin(), path.end());
    return path;  // r ... end
  };

  std::vector<std::pair<int, int>> moves;
  auto push_chain = [&](const std::vector<int>& rights) {
    for (std::size_t t = 0; t + 1 < rights.size(); ++t) {
      moves.emplace_back(owner_[static_cast<std::size_t>(rights[t])], rights[t + 1]);
    }
  };

  if (cycle) {
    push_chain(forward_path(r0));
    moves.emplace_back(i, r);
    apply_moves(moves);
    return true;
  }
  if (free_end < 0) return false;

  const std::vector<int> p1 = forward_path(free_end);
  if (v_[static_cast<std::size_t>(r0)] == 0) {
    push_chain(p1);
    moves.emplace_back(i, r);
    apply_moves(moves);
    return true;
  }

  // Backward search for a right g with v == 0 whose owner can start a chain of
  // moves ending in someone taking r0.
  std::vector<int> back{r0};
  stamp_b_[static_cast<std::size_t>(r0)] = stamp_;
  parent_b_[static_cast<std::size_t>(r0)] = -1;
  int start = -1;
  for (std::size_t head = 0; head < back.size() && start < 0; ++head) {
    const int b = back[head];
    for (int j : tight_in_[static_cast<std::size_t>(b)]) {
      if (j <= i) continue;
      const int a = match_[static_cast<std::size_t>(j)];
      const auto au = static_cast<std::size_t>(a);
      if (a == b || stamp_b_[au] == stamp_) continue;
      stamp_b_[au] = stamp_;
      parent_b_[au] = b;
      if (v_[au] == 0) {
        start = a;
        break;
      }
      back.push_back(a);
    }
  }
  if (start < 0) return false;

  std::vector<int> p2;  // start ... r0
  for (int x = start; x >= 0; x = parent_b_[static_cast<std::size_t>(x)]) p2.push_back(x);

  // If the two chains meet at w, splice them into a cycle r -> ... -> w -> ... -> r0.
  for (std::size_t t = 0; t < p1.size(); ++t) {
    const auto it = std::find(p2.begin(), p2.end(), p1[t]);
    if (it == p2.end()) continue;
    std::vector<int> spliced(p1.begin(), p1.begin() + static_cast<std::ptrdiff_t>(t));
    spliced.insert(spliced.end(), it, p2.end());
    push_chain(spliced);
    moves.emplace_back(i, r);
    apply_moves(moves);
    return true;
  }
  push_chain(p2);
  moves.emplace_back(i, r);
  push_chain(p1);
  apply_moves(moves);
  return true;
}

void Solver::apply_moves(const std::vector<std::pair<int, int>>& moves) {
  for (const auto& [left, right] : moves) {
    const int old = match_[static_cast<std::size_t>(left)];
    if (owner_[static_cast<std::size_t>(old)] == left) owner_[static_cast<std::size_t>(old)] = -1;
  }
  for (const auto& [left, right] : moves) {
    match_[static_cast<std::size_t>(left)] = right;
    owner_[static_cast<std::size_t>(right)] = left;
  }
}

}  // namespace

Matching solve_assignment(const SparseCostGraph& graph, const SolveOptions& options) {
  if (graph.num_left() > graph.num_right()) {
    std::vector<int> all(static_cast<std::size_t>(graph.num_left()));
    for (int i = 0; i < graph.num_left(); ++i) all[static_cast<std::size_t>(i)] = i;
    throw InfeasibleError("more left nodes than right nodes", std::move(all));
  }
  Solver solver(graph, options.scale);
  solver.solve();
  if (!options.canonical_ties) return solver.result();
  const std::int64_t optimum = solver.result().scaled_cost;
  solver.canonicalize();
  Matching out = solver.result();
  if (out.scaled_cost != optimum) {
    throw InvariantViolation("tie canonicalisation changed the assignment cost");
  }
  return out;
}

bool verify_matching(const SparseCostGraph& graph, const Matching& matching, std::int64_t scale) {
  if (matching.assignment.size() != static_cast<std::size_t>(graph.num_left())) return false;
  std::vector<char> used(static_cast<std::size_t>(graph.num_right()), 0);
  double total = 0.0;
  std::int64_t scaled = 0;
  for (int i = 0; i < graph.num_left(); ++i) {
    const int r = matching.assignment[static_cast<std::size_t>(i)];
    const Arc* arc = graph.find_arc(i, r);
    if (arc == nullptr) return false;
    if (used[static_cast<std::size_t>(r)]) return false;
    used[static_cast<std::size_t>(r)] = 1;
    total += arc->cost;
    scaled += scale_cost(arc->cost, scale);
  }
  const double tolerance = 1e-9 * std::max(1.0, std::fabs(total));
  return std::fabs(total - matching.total_cost) <= tolerance && scaled == matching.scaled_cost;
}

}  // namespace seal
