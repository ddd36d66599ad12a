#include "sortnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "sortnet/adam.hpp"
#include "sortnet/softsort.hpp"

namespace sortnet {

void TrainConfig::validate() const {
  if (n < 2) throw std::invalid_argument("TrainConfig: n must be >= 2");
  if (steps < 1) throw std::invalid_argument("TrainConfig: steps must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  if (grad_clip < 0.0) throw std::invalid_argument("TrainConfig: grad clip must be >= 0");
  if (loss == LossKind::top_k && (top_k < 1 || top_k > n)) {
    throw std::invalid_argument("TrainConfig: top_k out of range");
  }
  relax.validate();
}

namespace {

// Index of the element with the highest ground-truth rank.
std::size_t top_element(const GroundTruthPermutation& q) {
  for (std::size_t c = 0; c < q.n(); ++c) {
    if (q.rank_of[c] == q.n() - 1) return c;
  }
  throw std::logic_error("top_element: malformed permutation");
}

}  // namespace

TrainResult train_loop(const Dataset& dataset, const TrainConfig& config, ScoringModel model) {
  config.validate();
  if (dataset.groups.empty()) throw std::invalid_argument("train_loop: empty dataset");
  if (dataset.n != config.n) {
    throw std::invalid_argument("train_loop: dataset group size does not match config.n");
  }
  if (model.d != dataset.d) {
    throw std::invalid_argument("train_loop: model dimension does not match dataset");
  }

  const ComparatorSchedule schedule = config.kind == NetworkKind::odd_even
                                          ? odd_even_schedule(config.n)
                                          : bitonic_schedule(config.n);

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.groups.size() - 1);

  AdamState opt(model.params.size(), config.learning_rate);

  TrainResult result;
  result.loss_history.reserve(config.steps);

  const std::size_t n = config.n;
  std::vector<double> scores(n);
  std::vector<double> batch_grad(model.params.size());

  for (std::size_t step = 0; step < config.steps; ++step) {
    std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
    double batch_loss = 0.0;

    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const RankingGroup& group = dataset.groups[pick(rng)];
      for (std::size_t i = 0; i < n; ++i) scores[i] = model_forward(model, group.items[i]);

      ForwardResult fw = forward(scores, schedule, config.relax);
      LossResult lr = config.loss == LossKind::ranking_ce
                          ? ranking_ce_loss(fw.permutation, group.true_perm)
                          : top_k_loss(fw.permutation, top_element(group.true_perm), config.top_k);
      batch_loss += lr.loss;

      const std::vector<double> grad_scores = backward(fw.trace, nullptr, &lr.grad);
      for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> g = model_backward(model, group.items[i], grad_scores[i]);
        for (std::size_t p = 0; p < batch_grad.size(); ++p) batch_grad[p] += g[p];
      }
    }

    const double inv_batch = 1.0 / static_cast<double>(config.batch_size);
    for (double& g : batch_grad) g *= inv_batch;

    if (config.grad_clip > 0.0) {
      double norm_sq = 0.0;
      for (double g : batch_grad) norm_sq += g * g;
      const double norm = std::sqrt(norm_sq);
      if (norm > config.grad_clip) {
        const double scale = config.grad_clip / norm;
        for (double& g : batch_grad) g *= scale;
      }
    }

    adam_step(opt, model.params, batch_grad);
    result.loss_history.push_back(batch_loss * inv_batch);
  }

  result.model = std::move(model);
  return result;
}

TrainResult train_loop(const Dataset& dataset, const TrainConfig& config) {
  return train_loop(dataset, config,
                    model_init(ModelArch::linear, dataset.d, {}, config.seed ^ 0x9e3779b97f4a7c15ULL));
}

MetricReport evaluate(const ScoringModel& model, const Dataset& dataset, std::size_t k,
                      std::span<const double> eval_keys) {
  if (dataset.groups.empty()) throw std::invalid_argument("evaluate: empty dataset");
  if (model.d != dataset.d) throw std::invalid_argument("evaluate: model dimension mismatch");
  if (!eval_keys.empty() && eval_keys.size() != dataset.item_count()) {
    throw std::invalid_argument("evaluate: eval_keys length mismatch");
  }

  MetricReport report;
  report.k = k;
  report.count = dataset.groups.size();

  std::vector<double> all_scores;
  all_scores.reserve(dataset.item_count());
  std::vector<double> scores(dataset.n);
  double em_sum = 0.0;
  double ew_sum = 0.0;
  for (const auto& group : dataset.groups) {
    for (std::size_t i = 0; i < dataset.n; ++i) {
      scores[i] = model_forward(model, group.items[i]);
      all_scores.push_back(scores[i]);
    }
    const std::vector<std::size_t> pred = hard_ranks(scores);
    em_sum += exact_match(pred, group.true_perm.rank_of);
    ew_sum += elementwise_fraction(pred, group.true_perm.rank_of);
  }
  report.em = em_sum / static_cast<double>(report.count);
  report.ew = ew_sum / static_cast<double>(report.count);

  if (!eval_keys.empty()) {
    if (eval_keys.size() < k) throw std::invalid_argument("evaluate: fewer than k items");
    report.em_k = em_k_eval(all_scores, eval_keys, k, 0x7a11a11ULL);
    report.has_em_k = true;
  }
  return report;
}

namespace {

nlohmann::json relax_to_json(const RelaxConfig& cfg) {
  return {{"steepness", cfg.steepness},
          {"lambda", cfg.art_lambda},
          {"epsilon", cfg.epsilon},
          {"mode", cfg.mode == SwapMode::soft ? "soft" : "hard"}};
}

RelaxConfig relax_from_json(const nlohmann::json& j) {
  RelaxConfig cfg;
  cfg.steepness = j.at("steepness").get<double>();
  cfg.art_lambda = j.at("lambda").get<double>();
  cfg.epsilon = j.at("epsilon").get<double>();
  cfg.mode = j.at("mode").get<std::string>() == "hard" ? SwapMode::hard : SwapMode::soft;
  return cfg;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json arch;
  if (ckpt.model.arch == ModelArch::linear) {
    arch = {{"kind", "linear"}};
  } else {
    arch = {{"kind", "mlp"}, {"hidden", ckpt.model.hidden}};
  }
  const TrainConfig& c = ckpt.config;
  nlohmann::json config{{"kind", to_string(c.kind)},
                        {"n", c.n},
                        {"relax", relax_to_json(c.relax)},
                        {"steps", c.steps},
                        {"batch", c.batch_size},
                        {"lr", c.learning_rate},
                        {"clip", c.grad_clip},
                        {"loss", c.loss == LossKind::ranking_ce ? "ranking_ce" : "top_k"},
                        {"k", c.top_k},
                        {"adam_beta1", 0.9},
                        {"adam_beta2", 0.999},
                        {"adam_epsilon", 1e-8}};
  nlohmann::json j{{"architecture", std::move(arch)}, {"d", ckpt.model.d},
                   {"params", ckpt.model.params},    {"config", std::move(config)},
                   {"seed", c.seed},                 {"step", ckpt.step}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("load_checkpoint: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    const auto& arch = j.at("architecture");
    ckpt.model.arch =
        arch.at("kind").get<std::string>() == "mlp" ? ModelArch::mlp : ModelArch::linear;
    if (ckpt.model.arch == ModelArch::mlp) {
      ckpt.model.hidden = arch.at("hidden").get<std::vector<std::size_t>>();
    }
    ckpt.model.d = j.at("d").get<std::size_t>();
    ckpt.model.params = j.at("params").get<std::vector<double>>();
    const auto& config = j.at("config");
    ckpt.config.kind = network_kind_from_string(config.at("kind").get<std::string>());
    ckpt.config.n = config.at("n").get<std::size_t>();
    ckpt.config.relax = relax_from_json(config.at("relax"));
    ckpt.config.steps = config.at("steps").get<std::size_t>();
    ckpt.config.batch_size = config.at("batch").get<std::size_t>();
    ckpt.config.learning_rate = config.at("lr").get<double>();
    ckpt.config.grad_clip = config.at("clip").get<double>();
    ckpt.config.loss = config.at("loss").get<std::string>() == "top_k" ? LossKind::top_k
                                                                       : LossKind::ranking_ce;
    ckpt.config.top_k = config.at("k").get<std::size_t>();
    ckpt.config.seed = j.at("seed").get<unsigned long long>();
    ckpt.step = j.at("step").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("load_checkpoint: malformed checkpoint: ") + e.what());
  }
  const std::size_t expect =
      ScoringModel::param_count(ckpt.model.arch, ckpt.model.d, ckpt.model.hidden);
  if (ckpt.model.params.size() != expect) {
    throw std::runtime_error("load_checkpoint: parameter count does not match architecture");
  }
  return ckpt;
}

}  // namespace sortnet
