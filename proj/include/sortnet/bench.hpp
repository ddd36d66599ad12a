#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sortnet/schedule.hpp"

namespace sortnet {

struct BenchRecord {
  std::size_t n = 0;
  NetworkKind kind = NetworkKind::odd_even;
  std::size_t layers = 0;
  double forward_us = 0.0;   // wall time for the whole batch, median of repeats
  double backward_us = 0.0;  // same, for the reverse pass with a dense P gradient
  std::size_t peak_alloc_bytes = 0;
  std::size_t batch = 0;
};

// Times forward and backward (ranking cross-entropy gradient on P) for every
// (n, kind) combination over a batch of random inputs. Timings are medians
// over `repeats` runs; the allocation figure is an estimate derived from the
// workspace shapes, not a measurement.
std::vector<BenchRecord> run_bench(const std::vector<std::size_t>& sizes,
                                   const std::vector<NetworkKind>& kinds, std::size_t batch,
                                   std::size_t repeats, unsigned long long seed);

// CSV with columns n,kind,layers,forward_us,backward_us,peak_alloc_bytes,batch
std::string bench_to_csv(const std::vector<BenchRecord>& records);

}  // namespace sortnet
