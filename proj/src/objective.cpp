#include "sortnet/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "sortnet/softsort.hpp"

namespace sortnet {

namespace {
constexpr double kProbClamp = 1e-12;
}

GroundTruthPermutation::GroundTruthPermutation(std::vector<std::size_t> ranks)
    : rank_of(std::move(ranks)) {
  std::vector<char> seen(rank_of.size(), 0);
  for (std::size_t r : rank_of) {
    if (r >= rank_of.size() || seen[r]) {
      throw std::invalid_argument("GroundTruthPermutation: ranks are not a permutation");
    }
    seen[r] = 1;
  }
}

GroundTruthPermutation GroundTruthPermutation::from_matrix(const Mat& q) {
  if (q.rows() != q.cols()) {
    throw std::invalid_argument("GroundTruthPermutation: matrix must be square");
  }
  std::vector<std::size_t> ranks(q.cols(), q.rows());
  for (std::size_t r = 0; r < q.rows(); ++r) {
    for (std::size_t c = 0; c < q.cols(); ++c) {
      const double v = q(r, c);
      if (v == 1.0) {
        if (ranks[c] != q.rows()) {
          throw std::invalid_argument("GroundTruthPermutation: column with two ones");
        }
        ranks[c] = r;
      } else if (v != 0.0) {
        throw std::invalid_argument("GroundTruthPermutation: entries must be 0 or 1");
      }
    }
  }
  return GroundTruthPermutation(std::vector<std::size_t>(ranks.begin(), ranks.end()));
}

Mat GroundTruthPermutation::to_matrix() const {
  Mat m(n(), n());
  for (std::size_t c = 0; c < n(); ++c) m(rank_of[c], c) = 1.0;
  return m;
}

LossResult ranking_ce_loss(const Mat& p, const GroundTruthPermutation& q, CeKind kind) {
  const std::size_t n = q.n();
  if (p.rows() != n || p.cols() != n) {
    throw std::invalid_argument("ranking_ce_loss: size mismatch");
  }
  LossResult res;
  res.grad = Mat(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const bool target = q.rank_of[c] == r;
      const double v = p(r, c);
      const bool clamped = v < kProbClamp || v > 1.0 - kProbClamp;
      const double vt = std::clamp(v, kProbClamp, 1.0 - kProbClamp);
      if (target) {
        res.loss += -inv_n * std::log(vt);
        res.grad(r, c) = clamped ? 0.0 : -inv_n / vt;
      } else if (kind == CeKind::binary) {
        res.loss += -inv_n * std::log1p(-vt);
        res.grad(r, c) = clamped ? 0.0 : inv_n / (1.0 - vt);
      }
    }
  }
  return res;
}

std::vector<double> top_k_probs(const Mat& p, std::size_t k) {
  const std::size_t n = p.rows();
  if (p.cols() != n) throw std::invalid_argument("top_k_probs: matrix must be square");
  if (k < 1 || k > n) throw std::invalid_argument("top_k_probs: k out of range");
  std::vector<double> v(n, 0.0);
  for (std::size_t r = n - k; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) v[c] += p(r, c);
  }
  return v;
}

LossResult top_k_loss(const Mat& p, std::size_t true_element, std::size_t k) {
  const std::size_t n = p.rows();
  if (true_element >= n) throw std::invalid_argument("top_k_loss: element index out of range");
  const std::vector<double> probs = top_k_probs(p, k);
  const double v = probs[true_element];
  const bool clamped = v < kProbClamp || v > 1.0;
  const double vt = std::clamp(v, kProbClamp, 1.0);
  LossResult res;
  res.loss = -std::log(vt);
  res.grad = Mat(n, n);
  if (!clamped) {
    for (std::size_t r = n - k; r < n; ++r) res.grad(r, true_element) = -1.0 / vt;
  }
  return res;
}

double exact_match(std::span<const std::size_t> pred_ranks,
                   std::span<const std::size_t> true_ranks) {
  if (pred_ranks.size() != true_ranks.size()) {
    throw std::invalid_argument("exact_match: length mismatch");
  }
  return std::equal(pred_ranks.begin(), pred_ranks.end(), true_ranks.begin()) ? 1.0 : 0.0;
}

double elementwise_fraction(std::span<const std::size_t> pred_ranks,
                            std::span<const std::size_t> true_ranks) {
  if (pred_ranks.size() != true_ranks.size()) {
    throw std::invalid_argument("elementwise_fraction: length mismatch");
  }
  if (pred_ranks.empty()) throw std::invalid_argument("elementwise_fraction: empty input");
  std::size_t same = 0;
  for (std::size_t i = 0; i < pred_ranks.size(); ++i) {
    if (pred_ranks[i] == true_ranks[i]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(pred_ranks.size());
}

double em_k_eval(std::span<const double> scores, std::span<const double> true_keys,
                 std::size_t k, unsigned long long seed) {
  if (scores.size() != true_keys.size()) throw std::invalid_argument("em_k_eval: length mismatch");
  if (k < 1 || scores.size() < k) throw std::invalid_argument("em_k_eval: fewer than k items");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t groups = scores.size() / k;
  std::size_t matches = 0;
  std::vector<double> s(k), t(k);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t idx = order[g * k + i];
      s[i] = scores[idx];
      t[i] = true_keys[idx];
    }
    if (hard_ranks(s) == hard_ranks(t)) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(groups);
}

}  // namespace sortnet
