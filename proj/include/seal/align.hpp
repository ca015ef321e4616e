#pragma once

// Per-class latent edge alignment. Each annotated edge pixel q is assigned a
// distinct target p inside a square window around it, minimising a spatial
// prior plus the predictor's log-odds at p. Two priors are supported: an
// isotropic Gaussian, and an edge-oriented (biased) Gaussian combined with a
// Markov smoothness term handled by alternating Assign/Update rounds.

#include <cstdint>
#include <optional>
#include <vector>

#include "seal/grid.hpp"

namespace seal {

enum class AlignMode { kIsotropic, kBiasedMrf };

struct AlignConfig {
  double sigma = 4.0;     // isotropic bandwidth, pixels
  double sigma_x = 1.0;   // along the edge tangent
  double sigma_y = 4.0;   // across the edge
  double lambda = 0.02;   // smoothness strength
  int window_radius = 12;  // Chebyshev search radius; default_window_radius(sigma_y)
  int assign_steps = 2;
  int geodesic_radius = 2;  // chain steps
  int fit_radius = 4;       // chain steps used for the tangent fit
  double epsilon = 1e-6;    // probability clamp
  int window_expansions = 2;  // radius doublings tried on infeasibility

  void validate(AlignMode mode) const;
};

// ceil(3 * sigma): Gaussian mass beyond this is negligible.
int default_window_radius(double sigma);

// Preset used for high-quality annotations (sigma_y = 3).
AlignConfig high_quality_config();

struct PrecisionMatrix {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  bool positive_definite() const { return a11 > 0.0 && a11 * a22 - a12 * a12 > 0.0; }
};

// Ordered 8-connected pixel chains covering every set pixel of a label map
// exactly once. Closed contours are flagged so geodesic distance wraps.
class EdgeChain {
 public:
  struct Chain {
    std::vector<PixelCoord> pixels;
    bool closed = false;
  };
  struct Position {
    int chain = -1;
    int index = -1;
  };

  explicit EdgeChain(const EdgeLabelMap& labels);

  const std::vector<Chain>& chains() const { return chains_; }
  // Throws InvalidArgument when q is not an edge pixel.
  Position locate(PixelCoord q) const;
  bool contains(PixelCoord q) const;

  // Pixels of q's chain within `steps` chain steps (q excluded), nearest first.
  std::vector<PixelCoord> within_steps(PixelCoord q, int steps) const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Chain> chains_;
  std::vector<Position> lookup_;
};

struct TangentEstimate {
  double theta = 0.0;  // [0, pi), angle to the +x (column) axis
  bool isotropic_fallback = false;
};

std::vector<PixelCoord> candidate_window(PixelCoord q, int radius, int height, int width);

// |p - q|^2 / (2 sigma^2) + log(1 - prob) - log(prob). Throws std::domain_error
// unless 0 < prob < 1.
double unary_cost_isotropic(PixelCoord p, PixelCoord q, double prob, double sigma);

TangentEstimate estimate_tangent(const EdgeChain& chain, PixelCoord q, int fit_radius);

PrecisionMatrix precision_matrix(double theta, double sigma_x, double sigma_y);

// m^T S m + log((1 - prob) / prob) with m = p - q expressed as (dx, dy) =
// (dcol, drow). Throws InvalidArgument for a non-positive-definite S and
// std::domain_error for an unclamped prob.
double unary_cost_biased(PixelCoord p, PixelCoord q, double prob, const PrecisionMatrix& s);

std::vector<PixelCoord> geodesic_neighborhood(const EdgeChain& chain, PixelCoord q, int g);

// lambda * sum over q, v in N(q) of |m_q - m_prev_v|^2 (ordered pairs).
double pairwise_cost(const Mapping& m, const Mapping& m_prev, const EdgeChain& chain,
                     double lambda, int g);

// Per-source kernel used for the unary term of one class.
struct UnaryModel {
  AlignMode mode = AlignMode::kIsotropic;
  double sigma = 4.0;
  std::vector<PixelCoord> sources;
  std::vector<PrecisionMatrix> precisions;  // biased mode only, one per source
  std::vector<bool> fallback;               // biased mode only

  double cost(std::size_t source_index, PixelCoord target, double prob) const;
};

UnaryModel build_unary_model(const EdgeLabelMap& y, const EdgeChain& chain,
                             const AlignConfig& cfg, AlignMode mode);

// Exact argmin of sum_q [unary(q, p) + lambda * sum_{v in N(q)} |m_q - prev_v|^2]
// over injective mappings with targets in the window of each source. With no
// previous mapping this is the unary-only (Initialize) problem.
Mapping assign_step(const EdgeLabelMap& y, const ProbPlane& prob, const UnaryModel& model,
                    const EdgeChain& chain, const AlignConfig& cfg, int window_radius,
                    const Mapping* previous);

struct AlignResult {
  Mapping mapping;
  std::vector<Mapping> rounds;  // m(0), m(1), ... (isotropic: just m(0))
  int window_radius = 0;        // radius that produced a feasible problem
  double unary_cost = 0.0;      // real-valued unary objective of `mapping`
  std::int64_t scaled_objective = 0;  // integer objective minimised by the last solve
};

AlignResult align_detailed(const EdgeLabelMap& y, const ProbPlane& prob, const AlignConfig& cfg,
                           AlignMode mode);

Mapping align(const EdgeLabelMap& y, const ProbPlane& prob, const AlignConfig& cfg,
              AlignMode mode);

// Labels with exactly the targets of m set. Throws InvalidArgument when the
// mapping sources differ from the set pixels of y.
EdgeLabelMap realize_labels(const EdgeLabelMap& y, const Mapping& m);

Mapping identity_mapping(const EdgeLabelMap& y);

// Aligns every class plane of `noisy` against the matching ProbMap plane.
MultiLabelMap align_all_classes(const MultiLabelMap& noisy, const ProbMap& prob,
                                const AlignConfig& cfg, AlignMode mode,
                                std::vector<Mapping>* mappings = nullptr, int threads = 1);

}  // namespace seal
