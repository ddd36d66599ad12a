#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sortnet {

// First-order moment estimates and step counter of the Adam update.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;

  explicit AdamState(std::size_t param_count, double lr = 1e-3)
      : m(param_count, 0.0), v(param_count, 0.0), learning_rate(lr) {}
};

// One update: decayed moment accumulation, bias correction, then
// params -= lr * m_hat / (sqrt(v_hat) + epsilon).
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

}  // namespace sortnet
