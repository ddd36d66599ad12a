#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sortnet {

enum class ModelArch { linear, mlp };

// Scalar scoring model over d-dimensional features: either linear (w.x + b)
// or a small fully connected net with rectifier activations and a single
// linear output. Parameters live in one flat vector.
struct ScoringModel {
  ModelArch arch = ModelArch::linear;
  std::size_t d = 0;
  std::vector<std::size_t> hidden;  // empty for linear
  std::vector<double> params;

  static std::size_t param_count(ModelArch arch, std::size_t d,
                                 std::span<const std::size_t> hidden);
};

// Seeded initialization: weights ~ N(0, 1/sqrt(fan_in)), biases zero.
ScoringModel model_init(ModelArch arch, std::size_t d, std::vector<std::size_t> hidden,
                        unsigned long long seed);

double model_forward(const ScoringModel& model, std::span<const double> features);

// Gradient of the score with respect to the parameters, scaled by the
// upstream dL/dscore. Recomputes the forward activations internally.
std::vector<double> model_backward(const ScoringModel& model, std::span<const double> features,
                                   double grad_score);

}  // namespace sortnet
