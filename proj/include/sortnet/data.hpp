#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sortnet/objective.hpp"

namespace sortnet {

// One supervision unit: n feature vectors plus the ground-truth ordering of
// their latent keys. The keys themselves are not stored; supervision is
// order-only.
struct RankingGroup {
  std::vector<std::vector<double>> items;  // n vectors of dimension d
  GroundTruthPermutation true_perm;
};

struct Dataset {
  std::vector<RankingGroup> groups;
  std::size_t d = 0;
  std::size_t n = 0;

  std::size_t item_count() const { return groups.size() * n; }
};

struct SynthResult {
  Dataset dataset;
  // Latent key of every item in group-major order; kept out of the dataset so
  // training can only see the ordering. Used for rank-k evaluation.
  std::vector<double> eval_keys;
};

// Draws a latent weight vector w* and standard-normal features, scores each
// item as w*.x plus optional Gaussian noise, and groups consecutive items
// into ranking groups of size n. Deterministic given the seed.
SynthResult synth_generate(std::size_t d, std::size_t n, std::size_t group_count,
                           double noise_std, unsigned long long seed);

// CSV with header group,rank,f0,...,f{d-1}; one row per item, rows in any
// order, ranks 0-based within each group (0 = smallest).
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& dataset, const std::string& path);

}  // namespace sortnet
