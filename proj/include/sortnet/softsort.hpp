#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sortnet/matrix.hpp"
#include "sortnet/relax.hpp"
#include "sortnet/schedule.hpp"

namespace sortnet {

// Relaxed permutation matrix, indexed P(rank, element): column c is a
// distribution over ranks for input element c, rank 0 = smallest. Doubly
// stochastic by construction.
using SoftPermutation = Mat;

// Sparse representation of one layer's permutation matrix: identity plus a
// 2x2 block per comparator with `diag` on the (i,i)/(j,j) entries and `off`
// on (i,j)/(j,i). diag + off == 1 exactly.
struct LayerMatrix {
  struct Block {
    std::size_t i;  // min lane
    std::size_t j;  // max lane
    double diag;
    double off;
  };
  std::size_t n = 0;
  std::vector<Block> blocks;

  Mat to_dense() const;
  // out-of-place apply to a vector: result = M * v
  std::vector<double> apply(std::span<const double> v) const;
  // in-place left-multiplication of a dense matrix: m = M * m (symmetric M)
  void left_apply(Mat& m) const;
};

// Per-layer cache for the reverse pass: the lane values entering each layer
// plus the layer's swap matrix (which carries the comparator wiring). The
// backward pass needs nothing else from the schedule. Replaying the swaps on
// the stored inputs reproduces the forward outputs bit-exactly. Single-owner
// object; not meant to be shared across threads.
struct ForwardTrace {
  std::size_t lanes = 0;
  RelaxConfig cfg;
  std::vector<std::vector<double>> layer_inputs;
  std::vector<LayerMatrix> layer_matrices;

  std::size_t n() const { return lanes; }
  std::size_t layer_count() const { return layer_matrices.size(); }
};

struct ForwardResult {
  std::vector<double> sorted;
  SoftPermutation permutation;
  ForwardTrace trace;
};

// Applies one layer of comparators: returns the new lane values and the
// layer's swap matrix.
std::pair<std::vector<double>, LayerMatrix> apply_layer(std::span<const double> values,
                                                        const Layer& layer,
                                                        const RelaxConfig& cfg);

// Full relaxed execution: applies the schedule's layers in order, accumulating
// the composed permutation matrix by sparse left-multiplication. The sorted
// values are carried layer by layer; sorted == P * input only up to rounding.
ForwardResult forward(std::span<const double> values, const ComparatorSchedule& schedule,
                      const RelaxConfig& cfg);

// Reverse pass: gradient of the objective with respect to the input values,
// given upstream gradients on the sorted outputs and/or on the permutation
// matrix. At least one of the two must be present. Accounts for the value
// path and for the dependence of every mixing weight on the inputs. The
// permutation-path adjoints need the per-layer prefix products, which are
// recomputed from sqrt-spaced checkpoints rather than stored for every layer.
std::vector<double> backward(const ForwardTrace& trace,
                             const std::vector<double>* grad_sorted,
                             const Mat* grad_permutation);

// Batch convenience wrappers sharing one schedule. Instances are independent;
// outputs are in input order.
std::vector<ForwardResult> forward_batch(const std::vector<std::vector<double>>& batch,
                                         const ComparatorSchedule& schedule,
                                         const RelaxConfig& cfg);

std::vector<std::vector<double>> backward_batch(const std::vector<ForwardResult>& batch,
                                                const std::vector<Mat>& grad_permutations);

// Stable competition ranks: rank[c] = number of elements strictly smaller
// than values[c], ties broken by original index. Rank 0 = smallest.
std::vector<std::size_t> hard_ranks(std::span<const double> values);

// Compares backward against central finite differences of the ranking
// cross-entropy loss taken against a fixed seeded permutation. Returns the
// max relative error over input coordinates. Requires pairwise gaps of at
// least 10*h between values to stay away from the push map's kink.
// Coordinates whose difference stencil crosses a probability-clamp boundary
// are excluded: the objective is not differentiable there and a central
// difference would measure the kink, not the gradient.
double gradient_check(const ComparatorSchedule& schedule, const RelaxConfig& cfg,
                      std::span<const double> values, double h);

}  // namespace sortnet
