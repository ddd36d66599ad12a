// Acceptance suite: every release criterion in one binary, one verdict line
// each. Run it from ctest (it is registered as `acceptance`) or directly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sortnet/bench.hpp"
#include "sortnet/data.hpp"
#include "sortnet/model.hpp"
#include "sortnet/objective.hpp"
#include "sortnet/relax.hpp"
#include "sortnet/schedule.hpp"
#include "sortnet/softsort.hpp"
#include "sortnet/train.hpp"

using namespace sortnet;

namespace {

int failures = 0;

void verdict(int criterion, bool ok, const std::string& label, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion, label.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

std::vector<double> gapped_values(std::size_t n, double min_gap, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.0, min_gap);
  std::vector<double> v(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += min_gap + jitter(rng);
    v[i] = acc;
  }
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

RelaxConfig soft_cfg(double s, double lambda) {
  RelaxConfig c;
  c.steepness = s;
  c.art_lambda = lambda;
  return c;
}

// ---------------------------------------------------------------------------

void criterion_1_layer_counts() {
  const std::vector<std::size_t> sizes{4, 16, 32, 128, 1024};
  const std::vector<std::size_t> expected_bitonic{3, 10, 15, 28, 55};
  bool ok = true;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    ok = ok && odd_even_schedule(sizes[i]).layer_count() == sizes[i];
    ok = ok && bitonic_schedule(sizes[i]).layer_count() == expected_bitonic[i];
  }
  verdict(1, ok, "layer counts for both kinds", "n in {4,16,32,128,1024}");
}

void criterion_2_discrete_correctness() {
  bool ok = true;
  std::string failed;
  for (std::size_t n = 1; n <= 12 && ok; ++n) {
    if (!validate_discrete(odd_even_schedule(n))) {
      ok = false;
      failed = "odd-even 0-1 n=" + std::to_string(n);
    }
  }
  for (std::size_t n : {1, 2, 4, 8}) {
    if (ok && !validate_discrete(bitonic_schedule(n))) {
      ok = false;
      failed = "bitonic 0-1 n=" + std::to_string(n);
    }
  }

  const auto sorts_all_permutations = [](const ComparatorSchedule& s) {
    std::vector<double> base(s.n);
    std::iota(base.begin(), base.end(), 0.0);
    do {
      std::vector<double> values = base;
      hard_execute(s, values);
      if (!std::is_sorted(values.begin(), values.end())) return false;
    } while (std::next_permutation(base.begin(), base.end()));
    return true;
  };
  for (std::size_t n = 1; n <= 8 && ok; ++n) {
    if (!sorts_all_permutations(odd_even_schedule(n))) {
      ok = false;
      failed = "odd-even permutations n=" + std::to_string(n);
    }
  }
  for (std::size_t n : {2, 4, 8}) {
    if (ok && !sorts_all_permutations(bitonic_schedule(n))) {
      ok = false;
      failed = "bitonic permutations n=" + std::to_string(n);
    }
  }
  verdict(2, ok, "0-1 principle (n<=12) and all permutations (n<=8)",
          ok ? "exhaustive" : failed);
}

void criterion_3_merge_property() {
  std::mt19937_64 rng(303);
  std::size_t violations = 0;
  for (std::size_t n : {8, 16, 32}) {
    for (int rep = 0; rep < 1000; ++rep) {
      std::vector<double> values = random_values(n, rng);
      // walk the layers in generation order: block = 2,4,..,n; stride halving
      for (std::size_t block = 2; block <= n; block *= 2) {
        for (std::size_t stride = block / 2; stride >= 1; stride /= 2) {
          for (std::size_t base = 0; base < n; base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
              double& a = values[i];
              double& b = values[i + stride];
              const bool ascending = (i & block) == 0;
              if (ascending ? a > b : a < b) std::swap(a, b);
            }
          }
          // each aligned 2*stride chunk must now be value-separated
          for (std::size_t base = 0; base < n; base += 2 * stride) {
            const bool ascending = (base & block) == 0;
            double lower_max = values[base];
            double upper_min = values[base + stride];
            double lower_min = values[base];
            double upper_max = values[base + stride];
            for (std::size_t i = base; i < base + stride; ++i) {
              lower_max = std::max(lower_max, values[i]);
              lower_min = std::min(lower_min, values[i]);
              upper_min = std::min(upper_min, values[i + stride]);
              upper_max = std::max(upper_max, values[i + stride]);
            }
            if (ascending ? lower_max > upper_min : lower_min < upper_max) ++violations;
          }
        }
      }
      if (!std::is_sorted(values.begin(), values.end())) ++violations;
    }
  }
  verdict(3, violations == 0, "bitonic merge separation in hard execution",
          "violations=" + std::to_string(violations));
}

void criterion_4_relaxation_invariants() {
  std::mt19937_64 rng(404);
  std::size_t checked = 0;
  std::size_t bad = 0;
  for (std::size_t n : {2, 4, 8, 16, 32, 64}) {
    std::vector<ComparatorSchedule> schedules;
    schedules.push_back(odd_even_schedule(n));
    schedules.push_back(bitonic_schedule(n));
    for (const auto& schedule : schedules) {
      for (double lambda : {0.0, 0.25, 0.4}) {
        const auto cfg = soft_cfg(default_steepness(schedule), lambda);
        const int reps = 1000;
        for (int rep = 0; rep < reps; ++rep) {
          const auto values = random_values(n, rng);
          const auto r = forward(values, schedule, cfg);
          ++checked;

          bool instance_ok = true;
          for (std::size_t row = 0; row < n && instance_ok; ++row) {
            double row_sum = 0.0, col_sum = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
              const double v = r.permutation(row, c);
              if (v < -1e-6 || v > 1.0 + 1e-6) instance_ok = false;
              row_sum += v;
              col_sum += r.permutation(c, row);
            }
            if (std::abs(row_sum - 1.0) > 1e-6 || std::abs(col_sum - 1.0) > 1e-6) {
              instance_ok = false;
            }
          }

          const auto pv = mat_vec(r.permutation, values);
          double max_in = 0.0;
          for (double v : values) max_in = std::max(max_in, std::abs(v));
          for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(pv[i] - r.sorted[i]) > 1e-6) instance_ok = false;
          }
          const double in_sum = std::accumulate(values.begin(), values.end(), 0.0);
          const double out_sum = std::accumulate(r.sorted.begin(), r.sorted.end(), 0.0);
          if (std::abs(in_sum - out_sum) > 1e-9 * static_cast<double>(n) * max_in) {
            instance_ok = false;
          }
          if (!instance_ok) ++bad;
        }
      }
    }
  }
  verdict(4, bad == 0, "doubly stochastic / consistency / conservation",
          std::to_string(checked) + " instances, " + std::to_string(bad) + " bad");
}

void criterion_5_gradient_fidelity() {
  const double h = 1e-4;
  double worst = 0.0;
  std::size_t cases = 0;
  bool ok = true;
  for (unsigned long long seed = 1; seed <= 50; ++seed) {
    const std::size_t n = std::vector<std::size_t>{4, 8, 16}[seed % 3];
    const double lambda = std::vector<double>{0.0, 0.25, 0.4}[(seed / 3) % 3];
    const bool odd = seed % 2 == 0;
    const auto schedule = odd ? odd_even_schedule(n) : bitonic_schedule(n);
    // moderate steepness keeps the finite-difference oracle itself accurate
    const auto cfg = soft_cfg(std::min(default_steepness(schedule), 10.0), lambda);
    std::mt19937_64 rng(seed);
    const auto values = gapped_values(n, 0.1, rng);
    const double err = gradient_check(schedule, cfg, values, h);
    worst = std::max(worst, err);
    ++cases;
    if (err >= 1e-3) ok = false;
  }
  std::ostringstream detail;
  detail << cases << " cases, worst rel err " << worst;
  verdict(5, ok, "reverse pass vs finite differences", detail.str());
}

void criterion_6_hard_limit() {
  std::mt19937_64 rng(606);
  const double gap = 0.1;
  std::size_t em_hits = 0;
  double worst_p = 0.0;
  const std::size_t cases = 100;
  for (std::size_t rep = 0; rep < cases; ++rep) {
    const std::size_t n = std::vector<std::size_t>{8, 16, 32}[rep % 3];
    const auto schedule = rep % 2 == 0 ? odd_even_schedule(n) : bitonic_schedule(n);
    const auto values = gapped_values(n, gap, rng);
    const auto r = forward(values, schedule, soft_cfg(1e5, 0.0));

    const auto ranks = hard_ranks(values);
    Mat hard(n, n);
    for (std::size_t c = 0; c < n; ++c) hard(ranks[c], c) = 1.0;
    for (std::size_t i = 0; i < n * n; ++i) {
      worst_p = std::max(worst_p, std::abs(r.permutation.data()[i] - hard.data()[i]));
    }

    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    if (hard_ranks(r.sorted) == identity) ++em_hits;
  }
  std::ostringstream detail;
  detail << "max |P - P_hard| = " << worst_p << ", EM " << em_hits << "/" << cases;
  verdict(6, worst_p < 1e-3 && em_hits == cases, "hard-limit convergence at s=1e5", detail.str());
}

void criterion_7_loss_sanity() {
  bool ok = true;
  Mat uniform2(2, 2, 0.5);
  const double loss2 = ranking_ce_loss(uniform2, GroundTruthPermutation({0, 1})).loss;
  ok = ok && std::abs(loss2 - 2.0 * std::log(2.0)) < 1e-9;

  Mat uniform10(10, 10, 0.1);
  const double loss_top = top_k_loss(uniform10, 3, 1).loss;
  ok = ok && std::abs(loss_top - std::log(10.0)) < 1e-9;

  std::mt19937_64 rng(707);
  std::vector<std::size_t> ranks(8);
  std::iota(ranks.begin(), ranks.end(), std::size_t{0});
  std::shuffle(ranks.begin(), ranks.end(), rng);
  const GroundTruthPermutation q(ranks);
  const double self_loss = ranking_ce_loss(q.to_matrix(), q).loss;
  ok = ok && self_loss < 1e-6;

  std::ostringstream detail;
  detail << "uniform2=" << loss2 << " top1=" << loss_top << " self=" << self_loss;
  verdict(7, ok, "closed-form loss values", detail.str());
}

struct TrainedMetrics {
  double em5 = 0.0;
  double ew = 0.0;
};

TrainedMetrics train_and_eval(std::size_t n, double lambda, std::size_t steps,
                              std::size_t batch, unsigned long long seed) {
  const std::size_t train_groups = 256;
  const std::size_t eval_groups = 1000 / n + 1;
  const auto synth = synth_generate(8, n, train_groups + eval_groups, 0.0, seed);

  Dataset train_set;
  train_set.d = 8;
  train_set.n = n;
  train_set.groups.assign(synth.dataset.groups.begin(),
                          synth.dataset.groups.begin() + train_groups);
  Dataset eval_set;
  eval_set.d = 8;
  eval_set.n = n;
  eval_set.groups.assign(synth.dataset.groups.begin() + train_groups,
                         synth.dataset.groups.end());
  const std::vector<double> eval_keys(synth.eval_keys.begin() + train_groups * n,
                                      synth.eval_keys.end());

  TrainConfig config;
  config.kind = NetworkKind::bitonic;
  config.n = n;
  config.relax.art_lambda = lambda;
  config.relax.steepness = default_steepness(bitonic_schedule(n));
  config.steps = steps;
  config.batch_size = batch;
  config.seed = seed;

  const TrainResult result = train_loop(train_set, config);
  const MetricReport report = evaluate(result.model, eval_set, 5, eval_keys);
  return {report.em_k, report.ew};
}

void criterion_8_training() {
  const auto t0 = std::chrono::steady_clock::now();
  double em5_sum = 0.0, ew_sum = 0.0;
  for (unsigned long long seed : {21, 22, 23}) {
    const auto m = train_and_eval(8, 0.25, 5000, 32, seed);
    em5_sum += m.em5;
    ew_sum += m.ew;
  }
  const double em5 = em5_sum / 3.0;
  const double ew = ew_sum / 3.0;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream detail;
  detail << "mean EM5 " << em5 << ", mean EW " << ew << ", " << secs << " s";
  verdict(8, em5 >= 0.9 && ew >= 0.95 && secs < 300.0,
          "ordering-supervised training on the synthetic task", detail.str());
}

void criterion_9_art_ablation() {
  double ew_with = 0.0, ew_without = 0.0;
  for (unsigned long long seed : {31, 32, 33}) {
    ew_with += train_and_eval(32, 0.25, 2000, 16, seed).ew;
    ew_without += train_and_eval(32, 0.0, 2000, 16, seed).ew;
  }
  ew_with /= 3.0;
  ew_without /= 3.0;
  std::ostringstream detail;
  detail << "mean EW lambda=0.25: " << ew_with << ", lambda=0: " << ew_without;
  verdict(9, ew_with >= ew_without, "push-map ablation direction at n=32", detail.str());
}

void criterion_10_performance() {
  const auto records =
      run_bench({128}, {NetworkKind::odd_even, NetworkKind::bitonic}, 64, 3, 1010);
  const double odd_total = records[0].forward_us + records[0].backward_us;
  const double bit_total = records[1].forward_us + records[1].backward_us;
  const double ratio = bit_total / odd_total;

  const auto big = run_bench({1024}, {NetworkKind::bitonic}, 1, 1, 1011);
  const double big_secs = (big[0].forward_us + big[0].backward_us) * 1e-6;

  std::ostringstream detail;
  detail << "n=128 bitonic/odd-even total ratio " << ratio << "; n=1024 bitonic fwd+bwd "
         << big_secs << " s";
  verdict(10, ratio <= 0.5 && big_secs < 10.0, "runtime scaling of the two kinds", detail.str());
}

}  // namespace

int main() {
  criterion_1_layer_counts();
  criterion_2_discrete_correctness();
  criterion_3_merge_property();
  criterion_4_relaxation_invariants();
  criterion_5_gradient_fidelity();
  criterion_6_hard_limit();
  criterion_7_loss_sanity();
  criterion_8_training();
  criterion_9_art_ablation();
  criterion_10_performance();

  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return 1;
}
