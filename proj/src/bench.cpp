#include "sortnet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sortnet/objective.hpp"
#include "sortnet/relax.hpp"
#include "sortnet/softsort.hpp"

namespace sortnet {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Workspace estimate for one batch: per-instance permutation matrix and trace
// kept for the whole batch, plus one instance's reverse-pass matrices (the
// upstream product, the current prefix product, and the sqrt-spaced
// checkpoints with their active block).
std::size_t estimate_peak_bytes(std::size_t n, std::size_t layers, std::size_t comparators,
                                std::size_t batch) {
  const std::size_t mat = n * n * sizeof(double);
  const std::size_t trace = layers * n * sizeof(double) + comparators * 4 * sizeof(double) +
                            comparators * 2 * sizeof(std::size_t);
  const std::size_t block =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(
                                   static_cast<double>(std::max<std::size_t>(layers, 1))))));
  const std::size_t checkpoint_mats = layers == 0 ? 1 : (layers - 1) / block + 1;
  const std::size_t backward = (2 + checkpoint_mats + block) * mat;
  return batch * (mat + trace) + backward + mat /* loss gradient */;
}

}  // namespace

std::vector<BenchRecord> run_bench(const std::vector<std::size_t>& sizes,
                                   const std::vector<NetworkKind>& kinds, std::size_t batch,
                                   std::size_t repeats, unsigned long long seed) {
  if (batch < 1) throw std::invalid_argument("run_bench: batch must be >= 1");
  if (repeats < 1) throw std::invalid_argument("run_bench: repeats must be >= 1");

  using clock = std::chrono::steady_clock;
  std::vector<BenchRecord> records;

  for (std::size_t n : sizes) {
    for (NetworkKind kind : kinds) {
      const ComparatorSchedule schedule =
          kind == NetworkKind::odd_even ? odd_even_schedule(n) : bitonic_schedule(n);
      RelaxConfig cfg;
      cfg.steepness = std::max(1.0, default_steepness(schedule));
      cfg.art_lambda = 0.25;

      std::mt19937_64 rng(seed + n);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<std::vector<double>> inputs(batch, std::vector<double>(n));
      for (auto& v : inputs) {
        for (double& x : v) x = normal(rng);
      }

      std::vector<std::size_t> ranks(n);
      for (std::size_t i = 0; i < n; ++i) ranks[i] = i;
      std::shuffle(ranks.begin(), ranks.end(), rng);
      const GroundTruthPermutation q(ranks);

      std::vector<double> fwd_times, bwd_times;
      for (std::size_t rep = 0; rep < repeats; ++rep) {
        const auto t0 = clock::now();
        std::vector<ForwardResult> results = forward_batch(inputs, schedule, cfg);
        const auto t1 = clock::now();

        std::vector<Mat> grads;
        grads.reserve(batch);
        for (const auto& r : results) grads.push_back(ranking_ce_loss(r.permutation, q).grad);

        const auto t2 = clock::now();
        double sink = 0.0;
        for (std::size_t b = 0; b < results.size(); ++b) {
          const std::vector<double> g = backward(results[b].trace, nullptr, &grads[b]);
          sink += g[0];
        }
        const auto t3 = clock::now();
        if (!std::isfinite(sink)) throw std::runtime_error("run_bench: non-finite gradient");

        fwd_times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        bwd_times.push_back(std::chrono::duration<double, std::micro>(t3 - t2).count());
      }

      BenchRecord rec;
      rec.n = n;
      rec.kind = kind;
      rec.layers = schedule.layer_count();
      rec.forward_us = median(fwd_times);
      rec.backward_us = median(bwd_times);
      rec.peak_alloc_bytes = estimate_peak_bytes(n, schedule.layer_count(),
                                                 schedule.comparator_count(), batch);
      rec.batch = batch;
      records.push_back(rec);
    }
  }
  return records;
}

std::string bench_to_csv(const std::vector<BenchRecord>& records) {
  std::ostringstream out;
  out << "n,kind,layers,forward_us,backward_us,peak_alloc_bytes,batch\n";
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.3f", r.forward_us);
    out << r.n << ',' << to_string(r.kind) << ',' << r.layers << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.3f", r.backward_us);
    out << ',' << buf << ',' << r.peak_alloc_bytes << ',' << r.batch << "\n";
  }
  return out.str();
}

}  // namespace sortnet
