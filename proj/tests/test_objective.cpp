#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numeric>
#include <random>

#include "sortnet/objective.hpp"

using namespace sortnet;

namespace {

// Doubly-stochastic matrix from a convex mix of random permutation matrices.
Mat random_doubly_stochastic(std::size_t n, std::mt19937_64& rng) {
  Mat m(n, n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  double total = 0.0;
  std::vector<std::pair<std::vector<std::size_t>, double>> parts;
  for (int i = 0; i < 4; ++i) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const double w = unit(rng);
    parts.emplace_back(perm, w);
    total += w;
  }
  for (const auto& [p, w] : parts) {
    for (std::size_t c = 0; c < n; ++c) m(p[c], c) += w / total;
  }
  return m;
}

GroundTruthPermutation random_target(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> ranks(n);
  std::iota(ranks.begin(), ranks.end(), std::size_t{0});
  std::shuffle(ranks.begin(), ranks.end(), rng);
  return GroundTruthPermutation(ranks);
}

}  // namespace

TEST_SUITE_BEGIN("objective");

TEST_CASE("ground-truth permutation validation") {
  CHECK_NOTHROW(GroundTruthPermutation({2, 0, 1}));
  CHECK_THROWS_AS(GroundTruthPermutation({0, 0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(GroundTruthPermutation({0, 3, 1}), std::invalid_argument);

  const GroundTruthPermutation q({1, 0, 2});
  const Mat m = q.to_matrix();
  CHECK(GroundTruthPermutation::from_matrix(m) == q);
  Mat bad = m;
  bad(0, 0) = 0.5;
  CHECK_THROWS(GroundTruthPermutation::from_matrix(bad));
}

TEST_CASE("perfect prediction has near-zero loss") {
  std::mt19937_64 rng(41);
  const auto q = random_target(6, rng);
  const auto res = ranking_ce_loss(q.to_matrix(), q);
  CHECK(res.loss >= 0.0);
  CHECK(res.loss < 1e-10);
}

TEST_CASE("uniform prediction for n=2 costs 2 ln 2") {
  Mat p(2, 2, 0.5);
  const auto res = ranking_ce_loss(p, GroundTruthPermutation({0, 1}));
  CHECK(res.loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss is nonnegative on random inputs") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rep % 5;
    const auto p = random_doubly_stochastic(n, rng);
    const auto q = random_target(n, rng);
    CHECK(ranking_ce_loss(p, q).loss >= 0.0);
  }
}

TEST_CASE("loss is minimized at the target") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + rep % 4;
    const auto q = random_target(n, rng);
    const auto p = random_doubly_stochastic(n, rng);
    if (p == q.to_matrix()) continue;
    CHECK(ranking_ce_loss(p, q).loss > ranking_ce_loss(q.to_matrix(), q).loss);
  }
}

TEST_CASE("loss gradient matches finite differences") {
  std::mt19937_64 rng(44);
  const std::size_t n = 5;
  auto p = random_doubly_stochastic(n, rng);
  const auto q = random_target(n, rng);
  for (const CeKind kind : {CeKind::binary, CeKind::categorical}) {
    const auto res = ranking_ce_loss(p, q, kind);
    const double h = 1e-6;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const double orig = p(r, c);
        if (orig < 1e-6 || orig > 1.0 - 1e-6) continue;  // stay away from the clamp
        p(r, c) = orig + h;
        const double up = ranking_ce_loss(p, q, kind).loss;
        p(r, c) = orig - h;
        const double down = ranking_ce_loss(p, q, kind).loss;
        p(r, c) = orig;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(numeric), std::abs(res.grad(r, c)), 1e-8});
        CHECK(std::abs(res.grad(r, c) - numeric) / denom < 1e-5);
      }
    }
  }
}

TEST_CASE("gradient is zero where the clamp is active") {
  const GroundTruthPermutation q({0, 1});
  Mat p(2, 2);
  p(0, 0) = 1.0;
  p(1, 1) = 1.0;
  const auto res = ranking_ce_loss(p, q);
  for (double g : res.grad.data()) CHECK(g == 0.0);
}

TEST_CASE("size mismatch is rejected") {
  CHECK_THROWS_AS(ranking_ce_loss(Mat(3, 3), GroundTruthPermutation({0, 1})),
                  std::invalid_argument);
}

TEST_CASE("top_k_probs basics") {
  std::mt19937_64 rng(45);
  // hard matrix with a unique maximum element
  const GroundTruthPermutation q({3, 0, 2, 1});
  const auto v1 = top_k_probs(q.to_matrix(), 1);
  CHECK(v1 == std::vector<double>{1.0, 0.0, 0.0, 0.0});

  Mat uniform(4, 4, 0.25);
  const auto vu = top_k_probs(uniform, 1);
  for (double x : vu) CHECK(x == doctest::Approx(0.25));

  for (int rep = 0; rep < 10; ++rep) {
    const auto p = random_doubly_stochastic(4, rng);
    const auto all = top_k_probs(p, 4);
    for (double x : all) CHECK(x == doctest::Approx(1.0).epsilon(1e-6));
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto v = top_k_probs(p, k);
      CHECK(std::accumulate(v.begin(), v.end(), 0.0) ==
            doctest::Approx(static_cast<double>(k)).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(top_k_probs(uniform, 0), std::invalid_argument);
  CHECK_THROWS_AS(top_k_probs(uniform, 5), std::invalid_argument);
}

TEST_CASE("top_k_loss values") {
  const GroundTruthPermutation q({3, 0, 2, 1});
  CHECK(top_k_loss(q.to_matrix(), 0, 1).loss == doctest::Approx(0.0).epsilon(1e-10));

  Mat uniform(10, 10, 0.1);
  CHECK(top_k_loss(uniform, 7, 1).loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  // wrong hard prediction hits the clamp floor
  CHECK(top_k_loss(q.to_matrix(), 1, 1).loss == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(top_k_loss(uniform, 10, 1), std::invalid_argument);
}

TEST_CASE("top_k_loss gradient matches finite differences") {
  std::mt19937_64 rng(46);
  auto p = random_doubly_stochastic(6, rng);
  const auto res = top_k_loss(p, 2, 3);
  const double h = 1e-7;
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      const double orig = p(r, c);
      p(r, c) = orig + h;
      const double up = top_k_loss(p, 2, 3).loss;
      p(r, c) = orig - h;
      const double down = top_k_loss(p, 2, 3).loss;
      p(r, c) = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(numeric), std::abs(res.grad(r, c)), 1e-8});
      CHECK(std::abs(res.grad(r, c) - numeric) / denom < 1e-4);
    }
  }
}

TEST_CASE("exact match and element-wise fraction") {
  const std::vector<std::size_t> a{0, 1, 2};
  CHECK(exact_match(a, a) == 1.0);
  CHECK(elementwise_fraction(a, a) == 1.0);

  const std::vector<std::size_t> b{1, 0, 2};
  CHECK(exact_match(b, a) == 0.0);
  CHECK(elementwise_fraction(b, a) == doctest::Approx(1.0 / 3.0));

  const std::vector<std::size_t> c{0, 1}, d{1, 0};
  CHECK(exact_match(c, d) == 0.0);
  CHECK(elementwise_fraction(c, d) == 0.0);

  CHECK_THROWS_AS(exact_match(a, c), std::invalid_argument);
}

TEST_CASE("element-wise one iff exact match for distinct ranks") {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = random_target(5, rng).rank_of;
    const auto q = random_target(5, rng).rank_of;
    const bool em = exact_match(p, q) == 1.0;
    const bool ew_full = elementwise_fraction(p, q) == 1.0;
    CHECK(em == ew_full);
  }
}

TEST_CASE("em_k_eval endpoints and chance level") {
  std::mt19937_64 rng(48);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> keys(200);
  for (double& x : keys) x = normal(rng);

  CHECK(em_k_eval(keys, keys, 4, 7) == 1.0);

  std::vector<double> negated(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) negated[i] = -keys[i];
  CHECK(em_k_eval(negated, keys, 2, 7) == 0.0);

  // independent scores land at chance level 1/5!
  std::vector<double> scores(50000), big_keys(50000);
  for (double& x : scores) x = normal(rng);
  for (double& x : big_keys) x = normal(rng);
  const double em = em_k_eval(scores, big_keys, 5, 7);
  CHECK(em == doctest::Approx(1.0 / 120.0).epsilon(0.6));

  CHECK_THROWS_AS(em_k_eval(std::vector<double>{1.0}, std::vector<double>{1.0}, 2, 7),
                  std::invalid_argument);
}

TEST_SUITE_END();
