#pragma once

// Alternating training: align noisy labels against the current predictor
// output, then take a gradient step on cross-entropy against the aligned labels.

#include <string>
#include <vector>

#include "seal/align.hpp"
#include "seal/grid.hpp"
#include "seal/loss.hpp"

namespace seal {

// Planar float image [channel][row][col].
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  float at(int ch, int row, int col) const {
    return data[(static_cast<std::size_t>(ch) * static_cast<std::size_t>(height) +
                 static_cast<std::size_t>(row)) *
                    static_cast<std::size_t>(width) +
                static_cast<std::size_t>(col)];
  }
};

// Anything that maps an image to per-class edge probabilities and can take a
// gradient step. backward() applies to the input of the most recent forward().
class PredictorAdapter {
 public:
  virtual ~PredictorAdapter() = default;
  virtual int num_classes() const = 0;
  virtual ProbMap forward(const Image& image) = 0;
  virtual void backward(const LogitGradient& grad, double step_size) = 0;
};

// Small built-in predictor: fixed per-channel features (intensity and Sobel
// magnitude) followed by one learned 3x3 convolution per class and a sigmoid.
// Parameter gradients are averaged over pixels.
class ConvLogisticPredictor final : public PredictorAdapter {
 public:
  static constexpr int kTaps = 9;

  ConvLogisticPredictor(int num_classes, int image_channels);

  int num_classes() const override { return num_classes_; }
  ProbMap forward(const Image& image) override;
  void backward(const LogitGradient& grad, double step_size) override;

  int num_features() const { return 2 * image_channels_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& biases() const { return biases_; }
  void set_parameters(std::vector<double> weights, std::vector<double> biases);

  std::string to_json() const;

 private:
  double& weight(int k, int f, int tap) {
    return weights_[(static_cast<std::size_t>(k) * static_cast<std::size_t>(num_features()) +
                     static_cast<std::size_t>(f)) *
                        kTaps +
                    static_cast<std::size_t>(tap)];
  }

  int num_classes_;
  int image_channels_;
  std::vector<double> weights_;
  std::vector<double> biases_;

  // Cached features of the last forward pass, [feature][row][col].
  int height_ = 0;
  int width_ = 0;
  std::vector<double> features_;
};

struct SealStepOptions {
  AlignMode mode = AlignMode::kBiasedMrf;
  // false forces the identity mapping: plain training on the noisy labels.
  bool align_labels = true;
  int threads = 1;
};

struct SealStepResult {
  MultiLabelMap latent;
  LossReport loss;
};

SealStepResult seal_step(const Image& image, const MultiLabelMap& noisy_labels,
                         const MultiLabelMap& latent_labels, PredictorAdapter& predictor,
                         const AlignConfig& cfg, double step_size,
                         const SealStepOptions& options = {});

struct TrainSample {
  Image image;
  MultiLabelMap noisy;
  MultiLabelMap latent;  // starts equal to noisy
};

struct TrainLogEntry {
  int step = 0;
  int sample = 0;
  double loss_per_pixel = 0.0;
};

// Cycles through the samples in order for `steps` alternating steps, updating
// each sample's latent labels in place.
std::vector<TrainLogEntry> train_alternating(std::vector<TrainSample>& samples,
                                             PredictorAdapter& predictor, const AlignConfig& cfg,
                                             int steps, double step_size,
                                             const SealStepOptions& options = {});

}  // namespace seal
