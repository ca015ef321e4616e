#include "seal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "seal/container.hpp"
#include "seal/errors.hpp"

namespace seal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Star-shaped region described by its radius as a function of angle.
struct Shape {
  double cy = 0.0;
  double cx = 0.0;
  bool ellipse = true;
  double a = 0.0, b = 0.0, rotation = 0.0;  // ellipse
  std::vector<double> angles, radii;        // polygon vertices, increasing angle
  int class_id = 0;

  double radius(double phi) const {
    if (ellipse) {
      const double t = phi - rotation;
      const double cb = b * std::cos(t);
      const double sa = a * std::sin(t);
      return a * b / std::sqrt(cb * cb + sa * sa);
    }
    // Ray from the centre against the polygon edge spanning phi.
    const std::size_t n = angles.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double a0 = angles[i];
      double a1 = angles[(i + 1) % n];
      double p = phi;
      if (a1 <= a0) a1 += kTwoPi;
      if (p < a0) p += kTwoPi;
      if (p >= a0 && p <= a1) {
        const double x0 = radii[i] * std::cos(a0), y0 = radii[i] * std::sin(a0);
        const double x1 = radii[(i + 1) % n] * std::cos(a1), y1 = radii[(i + 1) % n] * std::sin(a1);
        const double ux = std::cos(p), uy = std::sin(p);
        // Solve t*u = v0 + s*(v1 - v0).
        const double ex = x1 - x0, ey = y1 - y0;
        const double det = ux * (-ey) - uy * (-ex);
        return (x0 * (-ey) - y0 * (-ex)) / det;
      }
    }
    return radii.front();
  }
};

// Smooth displacement along the contour, bounded by the jitter amplitude.
struct Jitter {
  double amplitude = 0.0;
  std::vector<double> coef, phase;  // coef[0] is the constant term

  double at(double phi) const {
    if (amplitude == 0.0) return 0.0;
    double sum = coef[0];
    double norm = std::fabs(coef[0]);
    for (std::size_t h = 1; h < coef.size(); ++h) {
      sum += coef[h] * std::cos(static_cast<double>(h) * phi + phase[h]);
      norm += std::fabs(coef[h]);
    }
    return amplitude * sum / norm;
  }
};

std::vector<std::uint8_t> rasterize(const Shape& s, const Jitter& j, int height, int width) {
  std::vector<std::uint8_t> region(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double dy = r - s.cy;
      const double dx = c - s.cx;
      const double rho = std::hypot(dx, dy);
      double phi = std::atan2(dy, dx);
      if (phi < 0.0) phi += kTwoPi;
      if (rho <= s.radius(phi) + j.at(phi)) {
        region[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)] = 1;
      }
    }
  }
  return region;
}

double max_radius(const SynthSpec& spec) {
  const double cell = static_cast<double>(std::min(spec.height, spec.width)) / spec.cells;
  return cell / 2.0 - spec.jitter - 2.0;
}

}  // namespace

void SynthSpec::validate() const {
  if (num_images <= 0) throw InvalidArgument("synth: num_images must be positive");
  if (num_classes < 1 || num_classes > MultiLabelMap::kMaxClasses) {
    throw InvalidArgument("synth: num_classes must be in 1..32");
  }
  if (cells < 1) throw InvalidArgument("synth: cells must be positive");
  if (!(jitter >= 0.0) || jitter_harmonics < 1) throw InvalidArgument("synth: bad jitter parameters");
  if (!(prob_low >= 0.0 && prob_low < prob_high && prob_high <= 1.0)) {
    throw InvalidArgument("synth: need 0 <= prob_low < prob_high <= 1");
  }
  if (!(sharpness > 0.0)) throw InvalidArgument("synth: sharpness must be positive");
  if (height <= 0 || width <= 0 || max_radius(*this) < 4.0) {
    throw InvalidArgument("synth: shapes do not fit; enlarge the image or reduce cells/jitter");
  }
}

EdgeLabelMap inner_boundary(const std::vector<std::uint8_t>& region, int height, int width,
                            int class_id) {
  EdgeLabelMap out(height, width, class_id);
  auto inside = [&](int r, int c) {
    return r >= 0 && c >= 0 && r < height && c < width &&
           region[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)] != 0;
  };
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (inside(r, c) && (!inside(r - 1, c) || !inside(r + 1, c) || !inside(r, c - 1) || !inside(r, c + 1))) {
        out.set(r, c);
      }
    }
  }
  return out;
}

std::vector<SynthSample> synth_samples(const SynthSpec& spec) {
  spec.validate();
  const double rmax = max_radius(spec);
  const double rmin = std::max(3.0, 0.55 * rmax);
  const double cell_h = static_cast<double>(spec.height) / spec.cells;
  const double cell_w = static_cast<double>(spec.width) / spec.cells;
  const std::size_t plane = static_cast<std::size_t>(spec.height) * static_cast<std::size_t>(spec.width);

  std::vector<SynthSample> out;
  for (int i = 0; i < spec.num_images; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    SynthSample s;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04d", i);
    s.id = id;
    s.image = Image{3, spec.height, spec.width, std::vector<float>(3 * plane, 0.0F)};
    std::vector<EdgeLabelMap> truth, noisy;
    for (int k = 0; k < spec.num_classes; ++k) {
      truth.emplace_back(spec.height, spec.width, k);
      noisy.emplace_back(spec.height, spec.width, k);
    }

    for (int cell = 0; cell < spec.cells * spec.cells; ++cell) {
      Shape shape;
      shape.class_id = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.num_classes));
      const double slack = std::max(0.0, std::min(cell_h, cell_w) / 2.0 - rmax - spec.jitter - 1.5);
      shape.cy = (cell / spec.cells + 0.5) * cell_h - 0.5 + uniform(-slack, slack);
      shape.cx = (cell % spec.cells + 0.5) * cell_w - 0.5 + uniform(-slack, slack);
      shape.ellipse = unit(rng) < 0.5;
      if (shape.ellipse) {
        shape.a = uniform(rmin, rmax);
        shape.b = uniform(rmin, rmax);
        shape.rotation = uniform(0.0, std::numbers::pi);
      } else {
        const int n = 3 + static_cast<int>(rng() % 4);
        const double offset = uniform(0.0, kTwoPi / n);
        for (int v = 0; v < n; ++v) {
          shape.angles.push_back(offset + (v + uniform(-0.2, 0.2)) * kTwoPi / n);
          shape.radii.push_back(uniform(rmin, rmax));
        }
        // Vertices sorted by angle in [0, 2pi) so every ray meets exactly one edge.
        std::vector<std::pair<double, double>> vertices;
        for (int v = 0; v < n; ++v) {
          vertices.emplace_back(std::fmod(shape.angles[static_cast<std::size_t>(v)] + kTwoPi, kTwoPi),
                                shape.radii[static_cast<std::size_t>(v)]);
        }
        std::sort(vertices.begin(), vertices.end());
        for (int v = 0; v < n; ++v) {
          shape.angles[static_cast<std::size_t>(v)] = vertices[static_cast<std::size_t>(v)].first;
          shape.radii[static_cast<std::size_t>(v)] = vertices[static_cast<std::size_t>(v)].second;
        }
      }
      Jitter jitter;
      jitter.amplitude = spec.jitter;
      for (int h = 0; h <= spec.jitter_harmonics; ++h) {
        jitter.coef.push_back(uniform(-1.0, 1.0));
        jitter.phase.push_back(uniform(0.0, kTwoPi));
      }

      const std::vector<std::uint8_t> region = rasterize(shape, Jitter{}, spec.height, spec.width);
      const std::vector<std::uint8_t> moved = rasterize(shape, jitter, spec.height, spec.width);
      const EdgeLabelMap t = inner_boundary(region, spec.height, spec.width, shape.class_id);
      const EdgeLabelMap n = inner_boundary(moved, spec.height, spec.width, shape.class_id);
      for (PixelCoord p : edge_pixels(t)) truth[static_cast<std::size_t>(shape.class_id)].set(p);
      for (PixelCoord p : edge_pixels(n)) noisy[static_cast<std::size_t>(shape.class_id)].set(p);

      // One-hot-ish colour per class; classes beyond 3 reuse channels at lower intensity.
      const int channel = shape.class_id % 3;
      const float value = 1.0F - 0.2F * static_cast<float>((shape.class_id / 3) % 4);
      for (std::size_t px = 0; px < plane; ++px) {
        if (region[px]) s.image.data[static_cast<std::size_t>(channel) * plane + px] = value;
      }
    }
    s.true_labels = combine_classes(truth);
    s.noisy_labels = combine_classes(noisy);

    // Ideal predictor: Gaussian fall-off with distance to the nearest true edge.
    const int reach = static_cast<int>(std::ceil(4.0 * spec.sharpness)) + 1;
    std::vector<float> probs(plane * static_cast<std::size_t>(spec.num_classes));
    for (int k = 0; k < spec.num_classes; ++k) {
      std::vector<double> best(plane, std::numeric_limits<double>::infinity());
      for (PixelCoord q : edge_pixels(truth[static_cast<std::size_t>(k)])) {
        for (int r = std::max(0, q.row - reach); r <= std::min(spec.height - 1, q.row + reach); ++r) {
          for (int c = std::max(0, q.col - reach); c <= std::min(spec.width - 1, q.col + reach); ++c) {
            double& b = best[static_cast<std::size_t>(r) * static_cast<std::size_t>(spec.width) +
                             static_cast<std::size_t>(c)];
            b = std::min(b, squared_distance(q, {r, c}));
          }
        }
      }
      for (std::size_t px = 0; px < plane; ++px) {
        const double g = std::isinf(best[px]) ? 0.0 : std::exp(-best[px] / (2.0 * spec.sharpness * spec.sharpness));
        probs[static_cast<std::size_t>(k) * plane + px] =
            static_cast<float>(spec.prob_low + (spec.prob_high - spec.prob_low) * g);
      }
    }
    s.ideal_prob = ProbMap(spec.height, spec.width, spec.num_classes, std::move(probs));
    out.push_back(std::move(s));
  }
  return out;
}

DatasetManifest write_synth_dataset(const SynthSpec& spec, const std::filesystem::path& dir) {
  const std::vector<SynthSample> samples = synth_samples(spec);
  std::filesystem::create_directories(dir);
  DatasetManifest m;
  m.base_dir = dir;
  const std::vector<ClassInfo> palette = preset_palette("sbd20");
  for (int k = 0; k < spec.num_classes; ++k) {
    m.classes.push_back({"shape" + std::to_string(k), palette[static_cast<std::size_t>(k) % palette.size()].color});
  }
  for (const SynthSample& s : samples) {
    ManifestEntry e;
    e.id = s.id;
    e.height = spec.height;
    e.width = spec.width;
    e.prob = s.id + "_prob.sebg";
    e.label = s.id + "_label.sebg";
    e.image = s.id + "_image.sebg";
    e.true_label = s.id + "_true.sebg";
    write_prob_map(s.ideal_prob, dir / e.prob);
    write_labels(s.noisy_labels, dir / e.label);
    write_labels(s.true_labels, dir / e.true_label);
    GridContainer img;
    img.dtype = GridDtype::kFloat32;
    img.height = static_cast<std::uint32_t>(s.image.height);
    img.width = static_cast<std::uint32_t>(s.image.width);
    img.num_planes = static_cast<std::uint32_t>(s.image.channels);
    img.floats = s.image.data;
    write_container(img, dir / e.image);
    m.images.push_back(std::move(e));
  }
  save_manifest(m, dir / "manifest.json");
  return m;
}

}  // namespace seal
