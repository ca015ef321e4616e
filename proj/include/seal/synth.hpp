#pragma once

// Synthetic edge datasets: filled ellipses and star-shaped polygons, one per
// grid cell, with exact one-pixel edges, jittered "annotator" edges and an
// ideal predictor output concentrated on the true edges.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seal/grid.hpp"
#include "seal/manifest.hpp"
#include "seal/train.hpp"

namespace seal {

struct SynthSpec {
  int num_images = 50;
  int height = 64;
  int width = 64;
  int num_classes = 2;
  int cells = 2;            // shapes are laid out on a cells x cells grid
  double jitter = 3.0;      // max boundary displacement of the noisy labels, pixels
  int jitter_harmonics = 3; // smoothness of the displacement along the contour
  double prob_high = 0.95;  // ideal predictor on a true edge
  double prob_low = 0.02;   // ... far from any edge
  double sharpness = 0.5;   // Gaussian fall-off of the ideal predictor, pixels
  std::uint64_t seed = 1;

  // Throws InvalidArgument for a degenerate spec (shapes would not fit, etc.).
  void validate() const;
};

struct SynthSample {
  std::string id;
  Image image;  // 3 channels
  MultiLabelMap true_labels;
  MultiLabelMap noisy_labels;
  ProbMap ideal_prob;
};

std::vector<SynthSample> synth_samples(const SynthSpec& spec);

// Inside pixels with a 4-neighbour outside the region (or off the grid).
EdgeLabelMap inner_boundary(const std::vector<std::uint8_t>& region, int height, int width,
                            int class_id);

// Writes containers plus manifest.json into `dir` and returns the manifest.
DatasetManifest write_synth_dataset(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace seal
