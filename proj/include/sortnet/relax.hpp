#pragma once

#include <utility>

#include "sortnet/schedule.hpp"

namespace sortnet {

enum class SwapMode { soft, hard };

// Parameters of the relaxed conditional swap: steepness s of the sigmoid,
// strength lambda of the pre-sigmoid push map, its stabilizer epsilon, and
// whether swaps are soft (differentiable) or hard (discrete min/max).
struct RelaxConfig {
  double steepness = 1.0;
  double art_lambda = 0.0;
  double epsilon = 1e-10;
  SwapMode mode = SwapMode::soft;

  void validate() const;
};

// Numerically stable logistic sigmoid 1/(1+exp(-x)); never exponentiates a
// large positive argument.
double logistic(double x);

// Activation replacement map x -> x / (|x|^lambda + epsilon). Odd in x;
// pushes small magnitudes toward +-1 and shrinks large ones.
double art(double x, double lambda, double epsilon);

// Exact derivative of art for x != 0, extended to x = 0 by the same formula
// (value 1/epsilon when lambda > 0).
double art_derivative(double x, double lambda, double epsilon);

// Mixing weight alpha of the soft swap. Soft mode:
// logistic(art(a_j - a_i) * s); hard mode: 0/1 step with ties at 0.5.
double mix_coefficient(double a_i, double a_j, const RelaxConfig& cfg);

// Derivative of the mixing weight with respect to the lane difference
// x = a_j - a_i, computed without cancellation so it stays nonzero deep in
// the saturated tails. Zero in hard mode.
double mix_slope(double x, const RelaxConfig& cfg);

struct SwapOutputs {
  double min_out;
  double max_out;
};

// Relaxed conditional swap. min_out is the convex combination leaning toward
// the smaller input, max_out the one leaning toward the larger. max_out is
// computed as (a_i + a_j) - min_out so the pair sum is conserved, and the
// combination is evaluated on the value-ordered pair so the result is
// invariant under argument exchange.
SwapOutputs soft_swap(double a_i, double a_j, const RelaxConfig& cfg);

// Swap plus the convex weights it used, for callers that must reuse the exact
// same coefficients (layer matrices, reverse pass). weight_first is the
// weight of a_i in min_out; weight_first + weight_second == 1 exactly.
struct SwapDetail {
  double min_out;
  double max_out;
  double weight_first;
  double weight_second;
};

SwapDetail soft_swap_detail(double a_i, double a_j, const RelaxConfig& cfg);

// Training default for the steepness: twice the layer count of the schedule.
double default_steepness(const ComparatorSchedule& schedule);

}  // namespace sortnet
