#include "sortnet/relax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sortnet {

void RelaxConfig::validate() const {
  if (!(steepness > 0.0)) throw std::invalid_argument("RelaxConfig: steepness must be > 0");
  if (!(art_lambda >= 0.0 && art_lambda <= 1.0)) {
    throw std::invalid_argument("RelaxConfig: art_lambda must be in [0, 1]");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("RelaxConfig: epsilon must be > 0");
}

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double art(double x, double lambda, double epsilon) {
  return x / (std::pow(std::abs(x), lambda) + epsilon);
}

double art_derivative(double x, double lambda, double epsilon) {
  const double p = std::pow(std::abs(x), lambda);
  const double denom = p + epsilon;
  return (epsilon + (1.0 - lambda) * p) / (denom * denom);
}

double mix_coefficient(double a_i, double a_j, const RelaxConfig& cfg) {
  if (cfg.mode == SwapMode::hard) {
    if (a_j > a_i) return 1.0;
    if (a_j < a_i) return 0.0;
    return 0.5;
  }
  return logistic(art(a_j - a_i, cfg.art_lambda, cfg.epsilon) * cfg.steepness);
}

double mix_slope(double x, const RelaxConfig& cfg) {
  if (cfg.mode == SwapMode::hard) return 0.0;
  const double y = art(x, cfg.art_lambda, cfg.epsilon) * cfg.steepness;
  return logistic(y) * logistic(-y) * art_derivative(x, cfg.art_lambda, cfg.epsilon) *
         cfg.steepness;
}

SwapDetail soft_swap_detail(double a_i, double a_j, const RelaxConfig& cfg) {
  const bool first_is_smaller = a_i <= a_j;
  const double lo = first_is_smaller ? a_i : a_j;
  const double hi = first_is_smaller ? a_j : a_i;

  // Weight of the smaller value in min_out, always >= 0.5 so that the
  // complement 1 - alpha is exact (Sterbenz).
  double alpha;
  if (lo == hi) {
    alpha = 0.5;
  } else if (cfg.mode == SwapMode::hard) {
    alpha = 1.0;
  } else {
    const double y = art(hi - lo, cfg.art_lambda, cfg.epsilon) * cfg.steepness;
    alpha = 1.0 / (1.0 + std::exp(-y));
  }
  const double beta = 1.0 - alpha;

  // The outputs are arranged so that min_out + max_out reproduces lo + hi
  // bit-exactly for same-sign pairs: max_out = sum - m rounds once, and
  // subtracting it back from the sum is exact by Sterbenz since max_out lies
  // in [sum/2, sum]. Comparators whose convex combination collapses onto lo
  // or the midpoint within rounding are snapped to those exact outputs.
  double min_out, max_out;
  if (lo == hi || alpha == 1.0) {
    min_out = lo;
    max_out = hi;
  } else {
    const double sum = lo + hi;
    const double half = 0.5 * sum;
    const double m = std::clamp(alpha * lo + beta * hi, lo, half);
    if (m == lo) {
      min_out = lo;
      max_out = hi;
    } else if (m == half) {
      min_out = half;
      max_out = half;
    } else {
      max_out = sum - m;      // >= half by monotone rounding
      min_out = sum - max_out;
      if (min_out < lo || max_out > hi) {
        // sub-ulp corner next to saturation
        min_out = lo;
        max_out = hi;
      }
    }
  }

  SwapDetail d;
  d.min_out = min_out;
  d.max_out = max_out;
  d.weight_first = first_is_smaller ? alpha : beta;
  d.weight_second = first_is_smaller ? beta : alpha;
  return d;
}

SwapOutputs soft_swap(double a_i, double a_j, const RelaxConfig& cfg) {
  const SwapDetail d = soft_swap_detail(a_i, a_j, cfg);
  return {d.min_out, d.max_out};
}

double default_steepness(const ComparatorSchedule& schedule) {
  return 2.0 * static_cast<double>(schedule.layer_count());
}

}  // namespace sortnet
