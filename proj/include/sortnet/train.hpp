#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sortnet/data.hpp"
#include "sortnet/model.hpp"
#include "sortnet/objective.hpp"
#include "sortnet/relax.hpp"
#include "sortnet/schedule.hpp"

namespace sortnet {

enum class LossKind { ranking_ce, top_k };

struct TrainConfig {
  NetworkKind kind = NetworkKind::odd_even;
  std::size_t n = 0;
  RelaxConfig relax;
  std::size_t steps = 1;
  std::size_t batch_size = 100;
  double learning_rate = 0.00031622776601683794;  // 10^-3.5
  unsigned long long seed = 1;
  double grad_clip = 0.0;  // 0 disables clipping
  LossKind loss = LossKind::ranking_ce;
  std::size_t top_k = 1;

  void validate() const;
};

struct TrainResult {
  ScoringModel model;
  std::vector<double> loss_history;  // one batch-mean loss per step
};

// Trains the model end-to-end through the relaxed sorting network from
// ordering supervision only. Per step: draw batch_size groups (uniform with
// replacement), score each group's items independently, run the relaxed
// network, take the configured loss against the group's ground-truth
// permutation, backpropagate through network then model, average gradients
// over the batch in draw order, and apply one Adam step. Deterministic given
// the seed.
TrainResult train_loop(const Dataset& dataset, const TrainConfig& config, ScoringModel model);

// Convenience overload with a seeded default-initialized model.
TrainResult train_loop(const Dataset& dataset, const TrainConfig& config);

// Scores every item independently, computes exact-match and element-wise
// rank accuracy per group, and (when latent keys are supplied) the exact-match
// fraction over regrouped sets of k items.
MetricReport evaluate(const ScoringModel& model, const Dataset& dataset, std::size_t k,
                      std::span<const double> eval_keys = {});

// Checkpoint file: single JSON object with keys architecture, d, params,
// config, seed, step. Extension .ckpt.json.
struct Checkpoint {
  ScoringModel model;
  TrainConfig config;
  std::size_t step = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sortnet
