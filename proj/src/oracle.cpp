#include "seal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seal/errors.hpp"

namespace seal::oracle {

namespace {

constexpr std::int64_t kNoArc = std::numeric_limits<std::int64_t>::max();

bool in_window(PixelCoord q, PixelCoord p, int radius) {
  return std::abs(p.row - q.row) <= radius && std::abs(p.col - q.col) <= radius;
}

// Per-source kernels, computed from the definitions rather than UnaryModel.
struct CostTable {
  std::vector<PixelCoord> sources;
  std::vector<PixelCoord> candidates;  // union of windows, row-major
  std::vector<std::vector<std::int64_t>> scaled;  // [source][candidate]
  std::vector<std::vector<double>> real;
};

double frozen_pairwise(const SmallInstance& inst, const EdgeChain& chain, PixelCoord q,
                       PixelCoord p, const Mapping& previous) {
  double pair = 0.0;
  const double dx = p.col - q.col;
  const double dy = p.row - q.row;
  for (PixelCoord v : geodesic_neighborhood(chain, q, inst.cfg.geodesic_radius)) {
    const auto it = std::find_if(previous.pairs.begin(), previous.pairs.end(),
                                 [&](const MappingPair& mp) { return mp.source == v; });
    if (it == previous.pairs.end()) throw InvalidArgument("previous mapping misses a neighbour");
    const double ex = dx - (it->target.col - it->source.col);
    const double ey = dy - (it->target.row - it->source.row);
    pair += ex * ex + ey * ey;
  }
  return pair;
}

CostTable build_table(const SmallInstance& inst, const Mapping* previous) {
  CostTable table;
  table.sources = edge_pixels(inst.y);
  const int radius = inst.cfg.window_radius;
  for (int r = 0; r < inst.y.height(); ++r) {
    for (int c = 0; c < inst.y.width(); ++c) {
      const PixelCoord p{r, c};
      for (PixelCoord q : table.sources) {
        if (in_window(q, p, radius)) {
          table.candidates.push_back(p);
          break;
        }
      }
    }
  }
  const EdgeChain chain(inst.y);
  const ProbPlane plane = inst.plane();
  const bool use_pairwise = previous != nullptr && inst.cfg.lambda > 0.0;
  for (PixelCoord q : table.sources) {
    bool isotropic = inst.mode == AlignMode::kIsotropic;
    PrecisionMatrix s;
    if (!isotropic) {
      const TangentEstimate t = estimate_tangent(chain, q, inst.cfg.fit_radius);
      isotropic = t.isotropic_fallback;
      s = precision_matrix(t.theta, inst.cfg.sigma_x, inst.cfg.sigma_y);
    }
    std::vector<std::int64_t> scaled_row;
    std::vector<double> real_row;
    for (PixelCoord p : table.candidates) {
      if (!in_window(q, p, radius)) {
        scaled_row.push_back(kNoArc);
        real_row.push_back(0.0);
        continue;
      }
      double cost = isotropic ? unary_cost_isotropic(p, q, plane.at(p), inst.cfg.sigma)
                              : unary_cost_biased(p, q, plane.at(p), s);
      if (use_pairwise) cost += inst.cfg.lambda * frozen_pairwise(inst, chain, q, p, *previous);
      scaled_row.push_back(scale_cost(cost, kDefaultCostScale));
      real_row.push_back(cost);
    }
    table.scaled.push_back(std::move(scaled_row));
    table.real.push_back(std::move(real_row));
  }
  return table;
}

double enumeration_size(std::size_t pool, std::size_t n) {
  double size = 1.0;
  for (std::size_t i = 0; i < n; ++i) size *= static_cast<double>(pool - i);  // C(pool,n)*n!
  return size;
}

BruteForceResult make_result(const SmallInstance& inst, const CostTable& table,
                             const std::vector<std::size_t>& targets, std::int64_t scaled) {
  BruteForceResult out;
  out.labels = EdgeLabelMap(inst.y.height(), inst.y.width(), inst.y.class_id());
  out.scaled_cost = scaled;
  for (std::size_t i = 0; i < table.sources.size(); ++i) {
    const PixelCoord p = table.candidates[targets[i]];
    out.mapping.pairs.push_back({table.sources[i], p});
    out.labels.set(p);
    out.cost += table.real[i][targets[i]];
  }
  return out;
}

}  // namespace

BruteForceResult brute_force_align(const SmallInstance& inst, const Mapping* previous) {
  const CostTable table = build_table(inst, previous);
  const std::size_t n = table.sources.size();
  const std::size_t pool = table.candidates.size();
  if (n == 0) return {EdgeLabelMap(inst.y.height(), inst.y.width(), inst.y.class_id()), {}, 0, 0.0};
  if (enumeration_size(pool, n) > kEnumerationLimit) {
    throw InvalidArgument("instance too large for exhaustive enumeration");
  }

  std::int64_t best = kNoArc;
  std::vector<std::size_t> best_targets;
  // Subsets in lexicographic order of candidate indices.
  std::vector<std::size_t> subset(n);
  for (std::size_t i = 0; i < n; ++i) subset[i] = i;
  for (;;) {
    std::vector<std::size_t> perm = subset;  // sorted: first permutation
    do {
      std::int64_t total = 0;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        const std::int64_t c = table.scaled[i][perm[i]];
        if (c == kNoArc) ok = false;
        total += ok ? c : 0;
      }
      if (ok && total < best) {
        best = total;
        best_targets = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::size_t i = n;
    while (i > 0 && subset[i - 1] == pool - n + (i - 1)) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < n; ++j) subset[j] = subset[j - 1] + 1;
  }
  if (best == kNoArc) throw InfeasibleError("no mapping within the candidate windows", {});
  return make_result(inst, table, best_targets, best);
}

BruteForceResult brute_force_align_by_mappings(const SmallInstance& inst,
                                               const Mapping* previous) {
  const CostTable table = build_table(inst, previous);
  const std::size_t n = table.sources.size();
  const std::size_t pool = table.candidates.size();
  if (n == 0) return {EdgeLabelMap(inst.y.height(), inst.y.width(), inst.y.class_id()), {}, 0, 0.0};
  if (enumeration_size(pool, n) > kEnumerationLimit) {
    throw InvalidArgument("instance too large for exhaustive enumeration");
  }
  std::int64_t best = kNoArc;
  std::vector<std::size_t> best_targets;
  std::vector<std::size_t> current(n);
  std::vector<char> used(pool, 0);
  auto dfs = [&](auto&& self, std::size_t depth, std::int64_t partial) -> void {
    if (depth == n) {
      if (partial < best) {
        best = partial;
        best_targets = current;
      }
      return;
    }
    for (std::size_t j = 0; j < pool; ++j) {
      const std::int64_t c = table.scaled[depth][j];
      if (used[j] || c == kNoArc) continue;
      used[j] = 1;
      current[depth] = j;
      self(self, depth + 1, partial + c);
      used[j] = 0;
    }
  };
  dfs(dfs, 0, 0);
  if (best == kNoArc) throw InfeasibleError("no mapping within the candidate windows", {});
  return make_result(inst, table, best_targets, best);
}

std::int64_t mapping_cost(const SmallInstance& inst, const Mapping& m, const Mapping* previous) {
  const CostTable table = build_table(inst, previous);
  if (m.size() != table.sources.size()) throw InvalidArgument("mapping size differs from |y|");
  std::int64_t total = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.pairs[i].source != table.sources[i]) throw InvalidArgument("mapping source mismatch");
    const auto it = std::find(table.candidates.begin(), table.candidates.end(), m.pairs[i].target);
    if (it == table.candidates.end()) throw InvalidArgument("mapping target outside the windows");
    const std::int64_t c =
        table.scaled[i][static_cast<std::size_t>(it - table.candidates.begin())];
    if (c == kNoArc) throw InvalidArgument("mapping target outside the source window");
    total += c;
  }
  return total;
}

std::optional<std::int64_t> labels_objective(const SmallInstance& inst,
                                             const EdgeLabelMap& labels) {
  const CostTable table = build_table(inst, nullptr);
  const std::vector<PixelCoord> targets = edge_pixels(labels);
  if (targets.size() != table.sources.size()) return std::nullopt;
  std::vector<std::size_t> perm;
  for (PixelCoord p : targets) {
    const auto it = std::find(table.candidates.begin(), table.candidates.end(), p);
    if (it == table.candidates.end()) return std::nullopt;
    perm.push_back(static_cast<std::size_t>(it - table.candidates.begin()));
  }
  std::optional<std::int64_t> best;
  do {
    std::int64_t total = 0;
    bool ok = true;
    for (std::size_t i = 0; i < perm.size() && ok; ++i) {
      const std::int64_t c = table.scaled[i][perm[i]];
      if (c == kNoArc) ok = false;
      total += ok ? c : 0;
    }
    if (ok && (!best || total < *best)) best = total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Matching brute_force_matching(const SparseCostGraph& graph, std::int64_t scale) {
  const int n = graph.num_left();
  if (n > 6) throw InvalidArgument("brute-force matching supports at most 6 left nodes");
  std::vector<std::vector<std::int64_t>> scaled(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (const Arc& a : graph.arcs_of(i)) scaled[static_cast<std::size_t>(i)].push_back(scale_cost(a.cost, scale));
  }
  std::int64_t best = kNoArc;
  std::vector<int> best_assignment;
  std::vector<int> current(static_cast<std::size_t>(n), -1);
  std::vector<char> used(static_cast<std::size_t>(graph.num_right()), 0);
  auto dfs = [&](auto&& self, int depth, std::int64_t partial) -> void {
    if (depth == n) {
      if (partial < best) {
        best = partial;
        best_assignment = current;
      }
      return;
    }
    const auto arcs = graph.arcs_of(depth);
    for (std::size_t e = 0; e < arcs.size(); ++e) {
      const int r = arcs[e].right;
      if (used[static_cast<std::size_t>(r)]) continue;
      used[static_cast<std::size_t>(r)] = 1;
      current[static_cast<std::size_t>(depth)] = r;
      self(self, depth + 1, partial + scaled[static_cast<std::size_t>(depth)][e]);
      used[static_cast<std::size_t>(r)] = 0;
    }
  };
  dfs(dfs, 0, 0);
  if (best == kNoArc) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    throw InfeasibleError("no assignment covers every left node", std::move(all));
  }
  Matching out;
  out.assignment = best_assignment;
  out.scaled_cost = best;
  for (int i = 0; i < n; ++i) {
    out.total_cost += graph.find_arc(i, best_assignment[static_cast<std::size_t>(i)])->cost;
  }
  return out;
}

bool check_label_equivalence(const SmallInstance& inst) {
  const AlignResult aligned = align_detailed(inst.y, inst.plane(), inst.cfg, inst.mode);
  const EdgeLabelMap realized = realize_labels(inst.y, aligned.mapping);
  const std::optional<std::int64_t> achieved = labels_objective(inst, realized);
  const BruteForceResult best = brute_force_align(inst);
  return achieved && *achieved == best.scaled_cost && aligned.scaled_objective == best.scaled_cost;
}

std::int64_t check_surjectivity(const EdgeLabelMap& y) {
  const std::vector<PixelCoord> sources = edge_pixels(y);
  const std::size_t n = sources.size();
  const int cells = y.height() * y.width();
  std::int64_t checked = 0;
  std::vector<int> subset(n);
  for (std::size_t i = 0; i < n; ++i) subset[i] = static_cast<int>(i);
  for (;;) {
    EdgeLabelMap target(y.height(), y.width(), y.class_id());
    Mapping m;
    for (std::size_t i = 0; i < n; ++i) {
      const PixelCoord p{subset[i] / y.width(), subset[i] % y.width()};
      target.set(p);
      m.pairs.push_back({sources[i], p});
    }
    if (realize_labels(y, m) != target) return -1;
    ++checked;
    if (n == 0) break;
    std::size_t i = n;
    while (i > 0 && subset[i - 1] == cells - static_cast<int>(n) + static_cast<int>(i - 1)) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < n; ++j) subset[j] = subset[j - 1] + 1;
  }
  return checked;
}

double flip_cost_identity_error(const ProbPlane& prob, const EdgeLabelMap& labels) {
  double direct = 0.0;
  double empty = 0.0;
  double flips = 0.0;
  for (int r = 0; r < prob.height; ++r) {
    for (int c = 0; c < prob.width; ++c) {
      const double s = prob.at(r, c);
      direct -= labels.at(r, c) ? std::log(s) : std::log(1.0 - s);
      empty -= std::log(1.0 - s);
      if (labels.at(r, c)) flips += std::log(1.0 - s) - std::log(s);
    }
  }
  return std::fabs(direct - (empty + flips));
}

SmallInstance random_instance(std::mt19937_64& rng, const InstanceOptions& options) {
  std::uniform_int_distribution<int> side(options.min_side, options.max_side);
  const int height = side(rng);
  const int width = side(rng);
  const int max_edges = std::min(options.max_edges, height * width);
  const int count = std::uniform_int_distribution<int>(1, max_edges)(rng);

  EdgeLabelMap y(height, width, 0);
  std::uniform_int_distribution<int> row(0, height - 1);
  std::uniform_int_distribution<int> col(0, width - 1);
  if (std::bernoulli_distribution(0.5)(rng)) {
    // Random 8-connected walk so that tangents and neighbourhoods matter.
    PixelCoord p{row(rng), col(rng)};
    y.set(p);
    std::uniform_int_distribution<int> step(-1, 1);
    for (int guard = 0; static_cast<int>(y.count()) < count && guard < 200; ++guard) {
      const PixelCoord next{std::clamp(p.row + step(rng), 0, height - 1),
                            std::clamp(p.col + step(rng), 0, width - 1)};
      p = next;
      y.set(p);
    }
  }
  while (static_cast<int>(y.count()) < count) y.set(row(rng), col(rng));

  static constexpr float kLevels[] = {0.01F, 0.1F, 0.3F, 0.5F, 0.7F, 0.9F, 0.99F};
  std::vector<float> values(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  const bool discrete = std::bernoulli_distribution(0.5)(rng);
  std::uniform_int_distribution<std::size_t> level(0, std::size(kLevels) - 1);
  std::uniform_real_distribution<float> uniform(0.0F, 1.0F);
  for (float& v : values) v = discrete ? kLevels[level(rng)] : uniform(rng);

  SmallInstance inst;
  inst.y = y;
  inst.mode = options.biased ? AlignMode::kBiasedMrf : AlignMode::kIsotropic;
  static constexpr double kSigmas[] = {0.7, 1.0, 1.5, 2.0};
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kSigmas) - 1);
  inst.cfg.sigma = kSigmas[pick(rng)];
  const double a = kSigmas[pick(rng)];
  const double b = kSigmas[pick(rng)];
  inst.cfg.sigma_x = std::min(a, b);
  inst.cfg.sigma_y = std::max(a, b);
  inst.cfg.lambda = options.lambda;
  inst.cfg.window_radius = std::uniform_int_distribution<int>(1, options.max_window)(rng);
  inst.cfg.geodesic_radius = std::uniform_int_distribution<int>(1, 2)(rng);
  inst.prob = clamp_probs(ProbMap(height, width, 1, std::move(values)), inst.cfg.epsilon);
  return inst;
}

}  // namespace seal::oracle
