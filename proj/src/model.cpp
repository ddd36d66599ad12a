#include "sortnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sortnet {

namespace {

// Layer sizes including input and the scalar output.
std::vector<std::size_t> layer_sizes(std::size_t d, std::span<const std::size_t> hidden) {
  std::vector<std::size_t> sizes{d};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

}  // namespace

std::size_t ScoringModel::param_count(ModelArch arch, std::size_t d,
                                      std::span<const std::size_t> hidden) {
  if (arch == ModelArch::linear) return d + 1;
  const auto sizes = layer_sizes(d, hidden);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    total += sizes[l] * sizes[l + 1] + sizes[l + 1];
  }
  return total;
}

ScoringModel model_init(ModelArch arch, std::size_t d, std::vector<std::size_t> hidden,
                        unsigned long long seed) {
  if (d < 1) throw std::invalid_argument("model_init: d must be >= 1");
  if (arch == ModelArch::linear && !hidden.empty()) {
    throw std::invalid_argument("model_init: linear model takes no hidden widths");
  }
  if (arch == ModelArch::mlp) {
    for (std::size_t h : hidden) {
      if (h < 1) throw std::invalid_argument("model_init: hidden width must be >= 1");
    }
  }
  ScoringModel m;
  m.arch = arch;
  m.d = d;
  m.hidden = std::move(hidden);
  m.params.assign(ScoringModel::param_count(arch, d, m.hidden), 0.0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto sizes = layer_sizes(d, m.hidden);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    for (std::size_t i = 0; i < sizes[l] * sizes[l + 1]; ++i) {
      m.params[off++] = scale * normal(rng);
    }
    off += sizes[l + 1];  // biases stay zero
  }
  return m;
}

double model_forward(const ScoringModel& model, std::span<const double> features) {
  if (features.size() != model.d) throw std::invalid_argument("model_forward: dimension mismatch");
  const auto sizes = layer_sizes(model.d, model.hidden);
  std::vector<double> act(features.begin(), features.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    std::vector<double> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += model.params[off + o * in + i] * act[i];
      next[o] = acc + model.params[off + in * out + o];
    }
    off += in * out + out;
    const bool last = l + 2 == sizes.size();
    if (!last) {
      for (double& v : next) v = std::max(v, 0.0);
    }
    act = std::move(next);
  }
  return act[0];
}

std::vector<double> model_backward(const ScoringModel& model, std::span<const double> features,
                                   double grad_score) {
  if (features.size() != model.d) throw std::invalid_argument("model_backward: dimension mismatch");
  const auto sizes = layer_sizes(model.d, model.hidden);
  const std::size_t num_layers = sizes.size() - 1;

  // forward pass keeping pre-activation outputs of every layer
  std::vector<std::vector<double>> inputs(num_layers);   // activations entering layer l
  std::vector<std::vector<double>> preact(num_layers);   // linear outputs of layer l
  std::vector<double> act(features.begin(), features.end());
  std::size_t off = 0;
  std::vector<std::size_t> offsets(num_layers);
  for (std::size_t l = 0; l < num_layers; ++l) {
    offsets[l] = off;
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    inputs[l] = act;
    std::vector<double> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += model.params[off + o * in + i] * act[i];
      next[o] = acc + model.params[off + in * out + o];
    }
    preact[l] = next;
    off += in * out + out;
    if (l + 1 != num_layers) {
      for (double& v : next) v = std::max(v, 0.0);
    }
    act = std::move(next);
  }

  std::vector<double> grad(model.params.size(), 0.0);
  std::vector<double> delta{grad_score};  // d loss / d (layer output)
  for (std::size_t l = num_layers; l-- > 0;) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const std::size_t base = offsets[l];
    if (l + 1 != num_layers) {
      for (std::size_t o = 0; o < out; ++o) {
        if (preact[l][o] <= 0.0) delta[o] = 0.0;
      }
    }
    std::vector<double> delta_in(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double g = delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        grad[base + o * in + i] = g * inputs[l][i];
        delta_in[i] += g * model.params[base + o * in + i];
      }
      grad[base + in * out + o] = g;
    }
    delta = std::move(delta_in);
  }
  return grad;
}

}  // namespace sortnet
