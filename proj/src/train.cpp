#include "seal/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "seal/errors.hpp"

namespace seal {

ConvLogisticPredictor::ConvLogisticPredictor(int num_classes, int image_channels)
    : num_classes_(num_classes), image_channels_(image_channels) {
  if (num_classes <= 0 || image_channels <= 0) {
    throw InvalidArgument("predictor needs positive class and channel counts");
  }
  weights_.assign(static_cast<std::size_t>(num_classes) *
                      static_cast<std::size_t>(num_features()) * kTaps,
                  0.0);
  biases_.assign(static_cast<std::size_t>(num_classes), 0.0);
}

void ConvLogisticPredictor::set_parameters(std::vector<double> weights,
                                           std::vector<double> biases) {
  if (weights.size() != weights_.size() || biases.size() != biases_.size()) {
    throw InvalidArgument("predictor parameter sizes do not match");
  }
  weights_ = std::move(weights);
  biases_ = std::move(biases);
}

ProbMap ConvLogisticPredictor::forward(const Image& image) {
  if (image.channels != image_channels_) {
    throw InvalidArgument("image has " + std::to_string(image.channels) + " channels, predictor expects " +
                          std::to_string(image_channels_));
  }
  height_ = image.height;
  width_ = image.width;
  const auto plane = static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  features_.assign(plane * static_cast<std::size_t>(num_features()), 0.0);

  auto pixel = [&](int ch, int r, int c) -> double {
    r = std::clamp(r, 0, height_ - 1);
    c = std::clamp(c, 0, width_ - 1);
    return image.at(ch, r, c);
  };
  for (int ch = 0; ch < image_channels_; ++ch) {
    double* intensity = features_.data() + static_cast<std::size_t>(2 * ch) * plane;
    double* gradient = features_.data() + static_cast<std::size_t>(2 * ch + 1) * plane;
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        const double gx = (pixel(ch, r - 1, c + 1) + 2.0 * pixel(ch, r, c + 1) + pixel(ch, r + 1, c + 1)) -
                          (pixel(ch, r - 1, c - 1) + 2.0 * pixel(ch, r, c - 1) + pixel(ch, r + 1, c - 1));
        const double gy = (pixel(ch, r + 1, c - 1) + 2.0 * pixel(ch, r + 1, c) + pixel(ch, r + 1, c + 1)) -
                          (pixel(ch, r - 1, c - 1) + 2.0 * pixel(ch, r - 1, c) + pixel(ch, r - 1, c + 1));
        const auto idx = static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) +
                         static_cast<std::size_t>(c);
        intensity[idx] = pixel(ch, r, c);
        gradient[idx] = std::sqrt(gx * gx + gy * gy) / 4.0;
      }
    }
  }

  std::vector<float> probs(plane * static_cast<std::size_t>(num_classes_));
  for (int k = 0; k < num_classes_; ++k) {
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        double z = biases_[static_cast<std::size_t>(k)];
        for (int f = 0; f < num_features(); ++f) {
          const double* feat = features_.data() + static_cast<std::size_t>(f) * plane;
          for (int tap = 0; tap < kTaps; ++tap) {
            const int rr = r + tap / 3 - 1;
            const int cc = c + tap % 3 - 1;
            if (rr < 0 || cc < 0 || rr >= height_ || cc >= width_) continue;
            z += weight(k, f, tap) *
                 feat[static_cast<std::size_t>(rr) * static_cast<std::size_t>(width_) +
                      static_cast<std::size_t>(cc)];
          }
        }
        probs[static_cast<std::size_t>(k) * plane +
              static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) +
              static_cast<std::size_t>(c)] = static_cast<float>(1.0 / (1.0 + std::exp(-z)));
      }
    }
  }
  return ProbMap(height_, width_, num_classes_, std::move(probs));
}

void ConvLogisticPredictor::backward(const LogitGradient& grad, double step_size) {
  if (features_.empty()) throw InvalidArgument("backward called before forward");
  if (grad.height != height_ || grad.width != width_ || grad.num_classes != num_classes_) {
    throw InvalidArgument("gradient shape does not match the last forward pass");
  }
  const auto plane = static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  const double norm = 1.0 / static_cast<double>(plane);
  for (int k = 0; k < num_classes_; ++k) {
    double db = 0.0;
    std::vector<double> dw(static_cast<std::size_t>(num_features()) * kTaps, 0.0);
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        const double g = grad.at(k, r, c);
        if (g == 0.0) continue;
        db += g;
        for (int f = 0; f < num_features(); ++f) {
          const double* feat = features_.data() + static_cast<std::size_t>(f) * plane;
          for (int tap = 0; tap < kTaps; ++tap) {
            const int rr = r + tap / 3 - 1;
            const int cc = c + tap % 3 - 1;
            if (rr < 0 || cc < 0 || rr >= height_ || cc >= width_) continue;
            dw[static_cast<std::size_t>(f) * kTaps + static_cast<std::size_t>(tap)] +=
                g * feat[static_cast<std::size_t>(rr) * static_cast<std::size_t>(width_) +
                         static_cast<std::size_t>(cc)];
          }
        }
      }
    }
    biases_[static_cast<std::size_t>(k)] -= step_size * db * norm;
    for (int f = 0; f < num_features(); ++f) {
      for (int tap = 0; tap < kTaps; ++tap) {
        weight(k, f, tap) -= step_size * norm * dw[static_cast<std::size_t>(f) * kTaps +
                                                   static_cast<std::size_t>(tap)];
      }
    }
  }
}

std::string ConvLogisticPredictor::to_json() const {
  nlohmann::json j;
  j["num_classes"] = num_classes_;
  j["image_channels"] = image_channels_;
  j["weights"] = weights_;
  j["biases"] = biases_;
  return j.dump(2);
}

SealStepResult seal_step(const Image& image, const MultiLabelMap& noisy_labels,
                         const MultiLabelMap& latent_labels, PredictorAdapter& predictor,
                         const AlignConfig& cfg, double step_size,
                         const SealStepOptions& options) {
  if (latent_labels.height() != noisy_labels.height() ||
      latent_labels.width() != noisy_labels.width() ||
      latent_labels.num_classes() != noisy_labels.num_classes()) {
    throw InvalidArgument("latent and noisy labels differ in shape");
  }
  const ProbMap prob = predictor.forward(image);
  const ProbMap clamped = clamp_probs(prob, cfg.epsilon);

  SealStepResult result;
  result.latent = options.align_labels
                      ? align_all_classes(noisy_labels, clamped, cfg, options.mode, nullptr,
                                          options.threads)
                      : noisy_labels;
  result.loss = sigmoid_ce_loss(clamped, result.latent);
  predictor.backward(loss_gradient(clamped, result.latent), step_size);
  return result;
}

std::vector<TrainLogEntry> train_alternating(std::vector<TrainSample>& samples,
                                             PredictorAdapter& predictor, const AlignConfig& cfg,
                                             int steps, double step_size,
                                             const SealStepOptions& options) {
  if (samples.empty()) throw InvalidArgument("no training samples");
  std::vector<TrainLogEntry> log;
  log.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int step = 0; step < steps; ++step) {
    const auto index = static_cast<std::size_t>(step) % samples.size();
    TrainSample& sample = samples[index];
    SealStepResult r =
        seal_step(sample.image, sample.noisy, sample.latent, predictor, cfg, step_size, options);
    sample.latent = std::move(r.latent);
    const double pixels =
        static_cast<double>(r.loss.pixel_count) * static_cast<double>(r.loss.per_class.size());
    log.push_back({step, static_cast<int>(index), r.loss.total / pixels});
  }
  return log;
}

}  // namespace seal
