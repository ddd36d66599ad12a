#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sortnet/matrix.hpp"

namespace sortnet {

// Hard permutation matrix Q(rank, element), stored as the rank of each
// element. Q(rank_of[c], c) = 1.
struct GroundTruthPermutation {
  std::vector<std::size_t> rank_of;

  explicit GroundTruthPermutation(std::vector<std::size_t> ranks);
  static GroundTruthPermutation from_matrix(const Mat& q);

  std::size_t n() const { return rank_of.size(); }
  Mat to_matrix() const;

  bool operator==(const GroundTruthPermutation&) const = default;
};

enum class CeKind { binary, categorical };

struct LossResult {
  double loss = 0.0;
  Mat grad;  // d loss / d P, same shape as P
};

// Column-averaged cross entropy between a relaxed permutation matrix and a
// hard ground-truth permutation. The binary (element-wise) form treats every
// entry as an independent Bernoulli, which makes the column-wise and row-wise
// groupings identical; the categorical form keeps only the target-row terms.
// Entries are clamped to [delta, 1-delta] with delta = 1e-12, and the
// gradient is zero wherever the clamp is active.
LossResult ranking_ce_loss(const Mat& p, const GroundTruthPermutation& q,
                           CeKind kind = CeKind::binary);

// Probability that each element lands among the k largest: column sums of P
// over the top k rank rows.
std::vector<double> top_k_probs(const Mat& p, std::size_t k);

// Negative log probability that `true_element` is ranked among the k largest.
LossResult top_k_loss(const Mat& p, std::size_t true_element, std::size_t k);

// 1 iff the two rank vectors are identical.
double exact_match(std::span<const std::size_t> pred_ranks,
                   std::span<const std::size_t> true_ranks);

// Fraction of positions whose ranks agree.
double elementwise_fraction(std::span<const std::size_t> pred_ranks,
                            std::span<const std::size_t> true_ranks);

// Exact-match fraction over a seeded disjoint partition of the index set into
// groups of k (leftovers dropped), comparing the within-group rankings of the
// predicted scores against those of the true keys.
double em_k_eval(std::span<const double> scores, std::span<const double> true_keys,
                 std::size_t k, unsigned long long seed);

struct MetricReport {
  double em = 0.0;
  double ew = 0.0;
  double em_k = 0.0;
  std::size_t k = 0;
  std::size_t count = 0;
  bool has_em_k = false;  // false when no latent keys were available
};

}  // namespace sortnet
