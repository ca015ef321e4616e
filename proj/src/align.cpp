#include "seal/align.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "seal/assign.hpp"
#include "seal/errors.hpp"
#include "seal/parallel.hpp"

namespace seal {

namespace {

// 4-neighbours first so that tracing follows staircase corners instead of
// cutting them diagonally.
constexpr std::array<PixelCoord, 8> kNeighbourOffsets{{
    {0, 1}, {1, 0}, {0, -1}, {-1, 0}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

bool eight_adjacent(PixelCoord a, PixelCoord b) {
  return a != b && std::abs(a.row - b.row) <= 1 && std::abs(a.col - b.col) <= 1;
}

void check_prob(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::domain_error("edge probability " + std::to_string(prob) +
                            " must be clamped into (0, 1)");
  }
}

double log_odds_cost(double prob) { return std::log1p(-prob) - std::log(prob); }

}  // namespace

void AlignConfig::validate(AlignMode mode) const {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) throw InvalidArgument("sigma_x, sigma_y must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  if (window_radius < 1) throw InvalidArgument("window radius must be at least 1");
  if (assign_steps < 1) throw InvalidArgument("assign steps must be at least 1");
  if (geodesic_radius < 1) throw InvalidArgument("geodesic radius must be at least 1");
  if (fit_radius < 1) throw InvalidArgument("fit radius must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("epsilon must lie in (0, 0.5)");
  if (window_expansions < 0) throw InvalidArgument("window expansions must be non-negative");
  if (mode == AlignMode::kBiasedMrf && sigma_y < sigma_x) {
    throw InvalidArgument("biased kernel needs sigma_y >= sigma_x");
  }
}

int default_window_radius(double sigma) {
  return std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
}

AlignConfig high_quality_config() {
  AlignConfig cfg;
  cfg.sigma_y = 3.0;
  cfg.window_radius = default_window_radius(cfg.sigma_y);
  return cfg;
}

EdgeChain::EdgeChain(const EdgeLabelMap& labels)
    : height_(labels.height()),
      width_(labels.width()),
      lookup_(static_cast<std::size_t>(labels.height()) * static_cast<std::size_t>(labels.width())) {
  auto slot = [&](PixelCoord p) -> Position& {
    return lookup_[static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(p.col)];
  };
  auto is_edge = [&](PixelCoord p) { return labels.in_bounds(p) && labels.at(p); };
  auto degree = [&](PixelCoord p) {
    int d = 0;
    for (const auto& o : kNeighbourOffsets) d += is_edge({p.row + o.row, p.col + o.col}) ? 1 : 0;
    return d;
  };

  const std::vector<PixelCoord> pixels = edge_pixels(labels);
  auto trace = [&](PixelCoord start, bool may_close) {
    Chain chain;
    const int id = static_cast<int>(chains_.size());
    PixelCoord current = start;
    for (;;) {
      slot(current) = {id, static_cast<int>(chain.pixels.size())};
      chain.pixels.push_back(current);
      bool advanced = false;
      for (const auto& o : kNeighbourOffsets) {
        const PixelCoord next{current.row + o.row, current.col + o.col};
        if (is_edge(next) && slot(next).chain < 0) {
          current = next;
          advanced = true;
          break;
        }
      }
      if (!advanced) break;
    }
    chain.closed = may_close && chain.pixels.size() >= 4 &&
                   eight_adjacent(chain.pixels.front(), chain.pixels.back());
    chains_.push_back(std::move(chain));
  };

  for (PixelCoord p : pixels) {
    if (slot(p).chain < 0 && degree(p) <= 1) trace(p, false);
  }
  for (PixelCoord p : pixels) {
    if (slot(p).chain < 0) trace(p, true);
  }
}

EdgeChain::Position EdgeChain::locate(PixelCoord q) const {
  if (q.row < 0 || q.col < 0 || q.row >= height_ || q.col >= width_) {
    throw InvalidArgument("pixel outside the label grid");
  }
  const Position pos = lookup_[static_cast<std::size_t>(q.row) * static_cast<std::size_t>(width_) +
                               static_cast<std::size_t>(q.col)];
  if (pos.chain < 0) {
    throw InvalidArgument("pixel (" + std::to_string(q.row) + ", " + std::to_string(q.col) +
                          ") is not an edge pixel");
  }
  return pos;
}

bool EdgeChain::contains(PixelCoord q) const {
  if (q.row < 0 || q.col < 0 || q.row >= height_ || q.col >= width_) return false;
  return lookup_[static_cast<std::size_t>(q.row) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(q.col)]
             .chain >= 0;
}

std::vector<PixelCoord> EdgeChain::within_steps(PixelCoord q, int steps) const {
  const Position pos = locate(q);
  const Chain& chain = chains_[static_cast<std::size_t>(pos.chain)];
  const int n = static_cast<int>(chain.pixels.size());
  std::vector<int> indices;
  for (int d = 1; d <= steps; ++d) {
    for (int idx : {pos.index - d, pos.index + d}) {
      if (chain.closed) {
        idx = ((idx % n) + n) % n;
      } else if (idx < 0 || idx >= n) {
        continue;
      }
      if (idx == pos.index) continue;
      if (std::find(indices.begin(), indices.end(), idx) == indices.end()) indices.push_back(idx);
    }
  }
  std::vector<PixelCoord> out;
  out.reserve(indices.size());
  for (int idx : indices) out.push_back(chain.pixels[static_cast<std::size_t>(idx)]);
  return out;
}

std::vector<PixelCoord> candidate_window(PixelCoord q, int radius, int height, int width) {
  std::vector<PixelCoord> out;
  const int r0 = std::max(0, q.row - radius);
  const int r1 = std::min(height - 1, q.row + radius);
  const int c0 = std::max(0, q.col - radius);
  const int c1 = std::min(width - 1, q.col + radius);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) out.push_back({r, c});
  }
  return out;
}

double unary_cost_isotropic(PixelCoord p, PixelCoord q, double prob, double sigma) {
  check_prob(prob);
  return squared_distance(p, q) / (2.0 * sigma * sigma) + log_odds_cost(prob);
}

TangentEstimate estimate_tangent(const EdgeChain& chain, PixelCoord q, int fit_radius) {
  std::vector<PixelCoord> points = chain.within_steps(q, fit_radius);
  if (points.empty()) return {0.0, true};
  points.push_back(q);
  double mx = 0.0;
  double my = 0.0;
  for (PixelCoord p : points) {
    mx += p.col;
    my += p.row;
  }
  const double n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double cxx = 0.0;
  double cyy = 0.0;
  double cxy = 0.0;
  for (PixelCoord p : points) {
    const double dx = p.col - mx;
    const double dy = p.row - my;
    cxx += dx * dx;
    cyy += dy * dy;
    cxy += dx * dy;
  }
  double theta = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  if (theta < 0.0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  return {theta, false};
}

PrecisionMatrix precision_matrix(double theta, double sigma_x, double sigma_y) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double s2 = std::sin(2.0 * theta);
  const double vx = sigma_x * sigma_x;
  const double vy = sigma_y * sigma_y;
  return {c * c / (2.0 * vx) + s * s / (2.0 * vy), s2 / (4.0 * vy) - s2 / (4.0 * vx),
          s * s / (2.0 * vx) + c * c / (2.0 * vy)};
}

double unary_cost_biased(PixelCoord p, PixelCoord q, double prob, const PrecisionMatrix& s) {
  if (!s.positive_definite()) throw InvalidArgument("precision matrix is not positive definite");
  check_prob(prob);
  const double dx = p.col - q.col;
  const double dy = p.row - q.row;
  return s.a11 * dx * dx + 2.0 * s.a12 * dx * dy + s.a22 * dy * dy + log_odds_cost(prob);
}

std::vector<PixelCoord> geodesic_neighborhood(const EdgeChain& chain, PixelCoord q, int g) {
  if (g < 1) throw InvalidArgument("geodesic radius must be at least 1");
  return chain.within_steps(q, g);
}

namespace {

struct Displacement {
  double dx = 0.0;
  double dy = 0.0;
};

Displacement displacement(const MappingPair& pair) {
  return {static_cast<double>(pair.target.col - pair.source.col),
          static_cast<double>(pair.target.row - pair.source.row)};
}

}  // namespace

double pairwise_cost(const Mapping& m, const Mapping& m_prev, const EdgeChain& chain,
                     double lambda, int g) {
  if (m.size() != m_prev.size()) throw InvalidArgument("mappings cover different source sets");
  std::vector<PixelCoord> sources;
  sources.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.pairs[i].source != m_prev.pairs[i].source) {
      throw InvalidArgument("mappings cover different source sets");
    }
    sources.push_back(m.pairs[i].source);
  }
  auto find_prev = [&](PixelCoord v) -> const MappingPair& {
    const auto it = std::lower_bound(sources.begin(), sources.end(), v);
    if (it == sources.end() || *it != v) throw InvalidArgument("neighbour has no previous mapping");
    return m_prev.pairs[static_cast<std::size_t>(it - sources.begin())];
  };
  if (!std::is_sorted(sources.begin(), sources.end())) {
    throw InvalidArgument("mapping sources must be in row-major order");
  }
  double total = 0.0;
  for (const MappingPair& pair : m.pairs) {
    const Displacement mq = displacement(pair);
    for (PixelCoord v : geodesic_neighborhood(chain, pair.source, g)) {
      const Displacement mv = displacement(find_prev(v));
      const double ex = mq.dx - mv.dx;
      const double ey = mq.dy - mv.dy;
      total += ex * ex + ey * ey;
    }
  }
  return lambda * total;
}

double UnaryModel::cost(std::size_t source_index, PixelCoord target, double prob) const {
  const PixelCoord q = sources[source_index];
  if (mode == AlignMode::kIsotropic || fallback[source_index]) {
    return unary_cost_isotropic(target, q, prob, sigma);
  }
  return unary_cost_biased(target, q, prob, precisions[source_index]);
}

UnaryModel build_unary_model(const EdgeLabelMap& y, const EdgeChain& chain,
                             const AlignConfig& cfg, AlignMode mode) {
  UnaryModel model;
  model.mode = mode;
  model.sigma = cfg.sigma;
  model.sources = edge_pixels(y);
  if (mode == AlignMode::kBiasedMrf) {
    model.precisions.reserve(model.sources.size());
    model.fallback.reserve(model.sources.size());
    for (PixelCoord q : model.sources) {
      const TangentEstimate t = estimate_tangent(chain, q, cfg.fit_radius);
      model.precisions.push_back(precision_matrix(t.theta, cfg.sigma_x, cfg.sigma_y));
      model.fallback.push_back(t.isotropic_fallback);
    }
  }
  return model;
}

namespace {

Mapping assign_step_impl(const EdgeLabelMap& y, const ProbPlane& prob, const UnaryModel& model,
                         const EdgeChain& chain, const AlignConfig& cfg, int window_radius,
                         const Mapping* previous, std::int64_t* scaled_objective) {
  const int height = y.height();
  const int width = y.width();
  const auto& sources = model.sources;
  const std::size_t n = sources.size();

  std::vector<Displacement> prev_disp;
  std::vector<int> source_slot;
  if (previous != nullptr) {
    if (previous->size() != n) throw InvalidArgument("previous mapping covers a different source set");
    source_slot.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), -1);
    prev_disp.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (previous->pairs[i].source != sources[i]) {
        throw InvalidArgument("previous mapping covers a different source set");
      }
      prev_disp.push_back(displacement(previous->pairs[i]));
      source_slot[static_cast<std::size_t>(sources[i].row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(sources[i].col)] = static_cast<int>(i);
    }
  }

  // Candidate pixels get compact right indices in row-major order.
  std::vector<int> right_of(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), -1);
  for (PixelCoord q : sources) {
    for (PixelCoord p : candidate_window(q, window_radius, height, width)) {
      right_of[static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(p.col)] = 0;
    }
  }
  std::vector<PixelCoord> rights;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      auto& slot = right_of[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                            static_cast<std::size_t>(c)];
      if (slot == 0) {
        slot = static_cast<int>(rights.size());
        rights.push_back({r, c});
      }
    }
  }

  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < n; ++i) {
    const PixelCoord q = sources[i];
    std::vector<Displacement> neighbours;
    if (previous != nullptr && cfg.lambda > 0.0) {
      for (PixelCoord v : chain.within_steps(q, cfg.geodesic_radius)) {
        const int slot = source_slot[static_cast<std::size_t>(v.row) * static_cast<std::size_t>(width) +
                                     static_cast<std::size_t>(v.col)];
        neighbours.push_back(prev_disp[static_cast<std::size_t>(slot)]);
      }
    }
    for (PixelCoord p : candidate_window(q, window_radius, height, width)) {
      double cost = model.cost(i, p, prob.at(p));
      if (!neighbours.empty()) {
        const double dx = p.col - q.col;
        const double dy = p.row - q.row;
        double pair = 0.0;
        for (const Displacement& mv : neighbours) {
          pair += (dx - mv.dx) * (dx - mv.dx) + (dy - mv.dy) * (dy - mv.dy);
        }
        cost += cfg.lambda * pair;
      }
      const int right = right_of[static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width) +
                                 static_cast<std::size_t>(p.col)];
      arcs.push_back({static_cast<int>(i), right, cost});
    }
  }

  const SparseCostGraph graph(static_cast<int>(n), static_cast<int>(rights.size()), std::move(arcs));
  const Matching matching = solve_assignment(graph);
  if (scaled_objective != nullptr) *scaled_objective = matching.scaled_cost;

  Mapping out;
  out.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.pairs.push_back({sources[i], rights[static_cast<std::size_t>(matching.assignment[i])]});
  }
  return out;
}

}  // namespace

Mapping assign_step(const EdgeLabelMap& y, const ProbPlane& prob, const UnaryModel& model,
                    const EdgeChain& chain, const AlignConfig& cfg, int window_radius,
                    const Mapping* previous) {
  return assign_step_impl(y, prob, model, chain, cfg, window_radius, previous, nullptr);
}

AlignResult align_detailed(const EdgeLabelMap& y, const ProbPlane& prob, const AlignConfig& cfg,
                           AlignMode mode) {
  cfg.validate(mode);
  if (prob.height != y.height() || prob.width != y.width()) {
    throw InvalidArgument("probability plane and label map differ in size");
  }
  AlignResult result;
  result.window_radius = cfg.window_radius;
  if (y.count() == 0) return result;

  const EdgeChain chain(y);
  const UnaryModel model = build_unary_model(y, chain, cfg, mode);

  int radius = cfg.window_radius;
  for (int attempt = 0;; ++attempt) {
    try {
      result.rounds.clear();
      std::int64_t objective = 0;
      result.rounds.push_back(
          assign_step_impl(y, prob, model, chain, cfg, radius, nullptr, &objective));
      if (mode == AlignMode::kBiasedMrf) {
        for (int t = 1; t < cfg.assign_steps; ++t) {
          const Mapping prev = result.rounds.back();
          result.rounds.push_back(
              assign_step_impl(y, prob, model, chain, cfg, radius, &prev, &objective));
        }
      }
      result.scaled_objective = objective;
      break;
    } catch (const InfeasibleError& e) {
      if (attempt >= cfg.window_expansions) {
        throw InfeasibleError("alignment infeasible at window radius " + std::to_string(radius) +
                                  ": " + e.what(),
                              e.deficient_lefts());
      }
      radius *= 2;
    }
  }
  result.window_radius = radius;
  result.mapping = result.rounds.back();
  for (std::size_t i = 0; i < result.mapping.size(); ++i) {
    const PixelCoord p = result.mapping.pairs[i].target;
    result.unary_cost += model.cost(i, p, prob.at(p));
  }
  return result;
}

Mapping align(const EdgeLabelMap& y, const ProbPlane& prob, const AlignConfig& cfg,
              AlignMode mode) {
  return align_detailed(y, prob, cfg, mode).mapping;
}

EdgeLabelMap realize_labels(const EdgeLabelMap& y, const Mapping& m) {
  const std::vector<PixelCoord> sources = edge_pixels(y);
  if (sources.size() != m.size()) {
    throw InvalidArgument("mapping has " + std::to_string(m.size()) + " pairs but labels have " +
                          std::to_string(sources.size()) + " edge pixels");
  }
  EdgeLabelMap out(y.height(), y.width(), y.class_id());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const MappingPair& pair = m.pairs[i];
    if (pair.source != sources[i]) throw InvalidArgument("mapping sources differ from label pixels");
    if (!out.in_bounds(pair.target)) throw InvalidArgument("mapping target outside the grid");
    if (out.at(pair.target)) throw InvalidArgument("mapping is not injective");
    out.set(pair.target);
  }
  return out;
}

Mapping identity_mapping(const EdgeLabelMap& y) {
  Mapping m;
  for (PixelCoord q : edge_pixels(y)) m.pairs.push_back({q, q});
  return m;
}

MultiLabelMap align_all_classes(const MultiLabelMap& noisy, const ProbMap& prob,
                                const AlignConfig& cfg, AlignMode mode,
                                std::vector<Mapping>* mappings, int threads) {
  if (noisy.height() != prob.height() || noisy.width() != prob.width() ||
      noisy.num_classes() != prob.num_classes()) {
    throw InvalidArgument("labels and probabilities differ in shape");
  }
  const ProbMap clamped = clamp_probs(prob, cfg.epsilon);
  const auto classes = static_cast<std::size_t>(noisy.num_classes());
  std::vector<EdgeLabelMap> planes(classes);
  std::vector<Mapping> found(classes);
  parallel_for(classes, threads, [&](std::size_t k) {
    const EdgeLabelMap y = extract_class(noisy, static_cast<int>(k));
    found[k] = align(y, clamped.plane(static_cast<int>(k)), cfg, mode);
    planes[k] = realize_labels(y, found[k]);
  });
  if (mappings != nullptr) *mappings = std::move(found);
  return combine_classes(planes);
}

}  // namespace seal
