#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sortnet/bench.hpp"
#include "sortnet/data.hpp"
#include "sortnet/model.hpp"
#include "sortnet/objective.hpp"
#include "sortnet/relax.hpp"
#include "sortnet/schedule.hpp"
#include "sortnet/softsort.hpp"
#include "sortnet/train.hpp"

namespace {

using namespace sortnet;

std::string format_value(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
  return std::string(buf, res.ptr);
}

std::string join_values(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_value(values[i]);
  }
  return out;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    std::size_t pos = 0;
    out.push_back(std::stod(field, &pos));
    if (pos != field.size()) throw std::runtime_error("malformed value: " + field);
  }
  if (out.empty()) throw std::runtime_error("no values given");
  return out;
}

std::vector<double> read_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    std::stringstream ss(token);
    std::string field;
    while (std::getline(ss, field, ',')) {
      if (field.empty()) continue;
      out.push_back(std::stod(field));
    }
  }
  if (out.empty()) throw std::runtime_error("no values in " + path);
  return out;
}

ComparatorSchedule make_schedule(const std::string& kind, std::size_t n) {
  return network_kind_from_string(kind) == NetworkKind::odd_even ? odd_even_schedule(n)
                                                                 : bitonic_schedule(n);
}

// Values with all pairwise gaps >= min_gap, randomly permuted.
std::vector<double> gapped_values(std::size_t n, double min_gap, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.0, min_gap);
  std::vector<double> values(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += min_gap + jitter(rng);
    values[i] = acc;
  }
  const double shift = acc / 2.0;
  for (double& v : values) v -= shift;
  std::shuffle(values.begin(), values.end(), rng);
  return values;
}

struct DataFlags {
  std::string csv_path;
  unsigned long long synth_seed = 0;
  std::size_t groups = 0;
  std::size_t skip_groups = 0;
  std::size_t d = 0;
  std::size_t n = 0;
  double noise = 0.0;
  CLI::Option* seed_opt = nullptr;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--data", csv_path, "CSV dataset (group,rank,f0,...)");
    seed_opt = cmd->add_option("--synth-seed", synth_seed, "generate synthetic data with this seed");
    cmd->add_option("--groups", groups, "synthetic group count")->needs(seed_opt);
    cmd->add_option("--skip-groups", skip_groups,
                    "drop this many leading groups (held-out split of the same generation)")
        ->needs(seed_opt);
    cmd->add_option("--noise", noise, "synthetic key noise std")->needs(seed_opt);
    cmd->add_option("--d", d, "feature dimension (synthetic)");
    cmd->add_option("--n", n, "group size (synthetic)");
  }

  bool synthetic() const { return seed_opt != nullptr && seed_opt->count() > 0; }

  // Loads or generates; keys returned only for the synthetic path.
  std::pair<Dataset, std::vector<double>> resolve() const {
    if (!csv_path.empty() && synthetic()) {
      throw CLI::ValidationError("give either --data or --synth-seed, not both");
    }
    if (!csv_path.empty()) return {load_csv(csv_path), {}};
    if (synthetic()) {
      if (d == 0 || n == 0 || groups == 0) {
        throw CLI::ValidationError("synthetic data needs --d, --n and --groups");
      }
      SynthResult synth = synth_generate(d, n, skip_groups + groups, noise, synth_seed);
      Dataset ds;
      ds.d = d;
      ds.n = n;
      ds.groups.assign(std::make_move_iterator(synth.dataset.groups.begin() + skip_groups),
                       std::make_move_iterator(synth.dataset.groups.end()));
      std::vector<double> keys(synth.eval_keys.begin() + skip_groups * n,
                               synth.eval_keys.end());
      return {std::move(ds), std::move(keys)};
    }
    throw CLI::ValidationError("need --data or --synth-seed");
  }
};

int cmd_gen_schedule(const std::string& kind, std::size_t n, const std::string& out_path) {
  const ComparatorSchedule schedule = make_schedule(kind, n);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << schedule_serialize(schedule) << "\n";
    if (!out) throw std::runtime_error("write failed for " + out_path);
  }
  std::cout << "layers: " << schedule.layer_count() << "\n";
  return 0;
}

int cmd_sort(const std::vector<double>& values, const std::string& kind, double steepness,
             double lambda, double epsilon, bool hard, const std::string& emit_perm) {
  const ComparatorSchedule schedule = make_schedule(kind, values.size());
  RelaxConfig cfg;
  cfg.steepness = steepness > 0.0 ? steepness : std::max(1.0, default_steepness(schedule));
  cfg.art_lambda = lambda;
  cfg.epsilon = epsilon;
  cfg.mode = hard ? SwapMode::hard : SwapMode::soft;

  const ForwardResult result = forward(values, schedule, cfg);
  std::cout << join_values(result.sorted) << "\n";

  if (!emit_perm.empty()) {
    std::ofstream out(emit_perm);
    if (!out) throw std::runtime_error("cannot open " + emit_perm);
    for (std::size_t r = 0; r < result.permutation.rows(); ++r) {
      for (std::size_t c = 0; c < result.permutation.cols(); ++c) {
        if (c > 0) out << ',';
        out << format_value(result.permutation(r, c));
      }
      out << "\n";
    }
  }
  return 0;
}

int cmd_gradcheck(std::size_t n, const std::string& kind, double lambda, double steepness,
                  unsigned long long seed, double h) {
  const ComparatorSchedule schedule = make_schedule(kind, n);
  RelaxConfig cfg;
  // The finite-difference oracle needs moderate steepness: truncation error of
  // the clamped cross-entropy grows with the cube of the sigmoid log-slopes.
  cfg.steepness = steepness > 0.0
                      ? steepness
                      : std::min(std::max(1.0, default_steepness(schedule)), 10.0);
  cfg.art_lambda = lambda;

  std::mt19937_64 rng(seed);
  const std::vector<double> values = gapped_values(n, 0.1, rng);
  const double err = gradient_check(schedule, cfg, values, h);
  std::cout << "max_rel_error: " << format_value(err) << "\n";
  return err < 1e-3 ? 0 : 2;
}

int cmd_train(const DataFlags& data_flags, TrainConfig config, double steepness,
              const std::string& arch, const std::vector<std::size_t>& hidden,
              unsigned long long model_seed, const std::string& out_path,
              const std::string& loss_csv) {
  auto [dataset, keys] = data_flags.resolve();
  config.n = dataset.n;

  const ComparatorSchedule schedule = config.kind == NetworkKind::odd_even
                                          ? odd_even_schedule(config.n)
                                          : bitonic_schedule(config.n);
  config.relax.steepness = steepness > 0.0 ? steepness : std::max(1.0, default_steepness(schedule));

  const ModelArch model_arch = arch == "mlp" ? ModelArch::mlp : ModelArch::linear;
  ScoringModel model = model_init(model_arch, dataset.d,
                                  model_arch == ModelArch::mlp ? hidden : std::vector<std::size_t>{},
                                  model_seed);

  TrainResult result = train_loop(dataset, config, std::move(model));

  if (!loss_csv.empty()) {
    std::ofstream out(loss_csv);
    if (!out) throw std::runtime_error("cannot open " + loss_csv);
    out << "step,loss\n";
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
      out << i << ',' << format_value(result.loss_history[i]) << "\n";
    }
  }

  save_checkpoint({result.model, config, config.steps}, out_path);
  std::cout << "final_loss: " << format_value(result.loss_history.back()) << "\n";
  std::cout << "checkpoint: " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const DataFlags& data_flags, std::size_t k) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  auto [dataset, keys] = data_flags.resolve();
  if (dataset.d != ckpt.model.d) {
    throw std::runtime_error("eval: dataset dimension does not match checkpoint");
  }
  const MetricReport report = evaluate(ckpt.model, dataset, k, keys);
  nlohmann::json j{{"em", report.em}, {"ew", report.ew}, {"count", report.count}};
  if (report.has_em_k) {
    j["em5"] = report.em_k;
  } else {
    j["em5"] = nullptr;
  }
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_bench(const std::vector<std::size_t>& sizes, const std::vector<std::string>& kind_names,
              std::size_t batch, std::size_t repeats, unsigned long long seed,
              const std::string& out_path) {
  std::vector<NetworkKind> kinds;
  for (const auto& name : kind_names) kinds.push_back(network_kind_from_string(name));
  const std::vector<BenchRecord> records = run_bench(sizes, kinds, batch, repeats, seed);
  const std::string csv = bench_to_csv(records);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << csv;
  }
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentiable sorting networks"};
  app.require_subcommand(1);

  // gen-schedule
  auto* gen = app.add_subcommand("gen-schedule", "generate a comparator schedule");
  std::string gen_kind;
  std::size_t gen_n = 0;
  std::string gen_out;
  gen->add_option("--kind", gen_kind, "odd-even or bitonic")->required();
  gen->add_option("--n", gen_n, "lane count")->required();
  gen->add_option("--out", gen_out, "output .schedule.json path");

  // sort
  auto* sort_cmd = app.add_subcommand("sort", "run the relaxed network on values");
  std::string sort_values, sort_input, sort_kind = "odd-even", sort_perm;
  double sort_steepness = 0.0, sort_lambda = 0.0, sort_epsilon = 1e-10;
  bool sort_hard = false;
  sort_cmd->add_option("--values", sort_values, "comma-separated values");
  sort_cmd->add_option("--input", sort_input, "file with values");
  sort_cmd->add_option("--kind", sort_kind, "odd-even or bitonic");
  sort_cmd->add_option("--steepness", sort_steepness, "sigmoid steepness (default 2x layers)")
      ->check(CLI::PositiveNumber);
  sort_cmd->add_option("--lambda", sort_lambda, "push-map strength in [0,1]");
  sort_cmd->add_option("--epsilon", sort_epsilon, "push-map stabilizer");
  sort_cmd->add_flag("--hard", sort_hard, "discrete min/max swaps");
  sort_cmd->add_option("--emit-perm", sort_perm, "write the permutation matrix as CSV");

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck", "compare the reverse pass to finite differences");
  std::size_t grad_n = 8;
  std::string grad_kind = "odd-even";
  double grad_lambda = 0.25, grad_steepness = 0.0, grad_h = 1e-4;
  unsigned long long grad_seed = 1;
  grad->add_option("--n", grad_n, "lane count");
  grad->add_option("--kind", grad_kind, "odd-even or bitonic");
  grad->add_option("--lambda", grad_lambda, "push-map strength");
  grad->add_option("--steepness", grad_steepness, "sigmoid steepness (default 2x layers)")
      ->check(CLI::PositiveNumber);
  grad->add_option("--seed", grad_seed, "input seed");
  grad->add_option("--step", grad_h, "finite-difference step");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a scoring model from ordering supervision");
  DataFlags train_data;
  train_data.add_to(train_cmd);
  TrainConfig train_config;
  train_config.batch_size = 100;
  train_config.relax.art_lambda = 0.25;
  std::string train_kind = "odd-even", train_arch = "linear", train_loss = "ranking-ce";
  std::string train_out = "model.ckpt.json", train_loss_csv = "train_loss.csv";
  std::vector<std::size_t> train_hidden{16};
  double train_steepness = 0.0;
  unsigned long long train_model_seed = 0;
  train_cmd->add_option("--kind", train_kind, "odd-even or bitonic");
  train_cmd->add_option("--steps", train_config.steps, "optimizer steps")->required();
  train_cmd->add_option("--batch", train_config.batch_size, "groups per step");
  train_cmd->add_option("--lr", train_config.learning_rate, "learning rate");
  train_cmd->add_option("--seed", train_config.seed, "training seed");
  train_cmd->add_option("--lambda", train_config.relax.art_lambda, "push-map strength");
  train_cmd->add_option("--steepness", train_steepness, "sigmoid steepness (default 2x layers)")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--epsilon", train_config.relax.epsilon, "push-map stabilizer");
  train_cmd->add_option("--clip", train_config.grad_clip, "gradient-norm clip (0 = off)");
  train_cmd->add_option("--loss", train_loss, "ranking-ce or top-k")
      ->check(CLI::IsMember({"ranking-ce", "top-k"}));
  train_cmd->add_option("--k", train_config.top_k, "k for the top-k loss");
  train_cmd->add_option("--arch", train_arch, "linear or mlp")
      ->check(CLI::IsMember({"linear", "mlp"}));
  train_cmd->add_option("--hidden", train_hidden, "mlp hidden widths")->delimiter(',');
  auto* model_seed_opt = train_cmd->add_option("--model-seed", train_model_seed, "model init seed");
  train_cmd->add_option("--out", train_out, "checkpoint path");
  train_cmd->add_option("--loss-csv", train_loss_csv, "per-step loss CSV path");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  DataFlags eval_data;
  eval_data.add_to(eval_cmd);
  std::string eval_ckpt;
  std::size_t eval_k = 5;
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();
  eval_cmd->add_option("--k", eval_k, "regrouped exact-match size");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "time forward and backward passes");
  std::vector<std::size_t> bench_sizes{4, 16, 32, 128};
  std::vector<std::string> bench_kinds{"odd-even", "bitonic"};
  std::size_t bench_batch = 1, bench_repeats = 5;
  unsigned long long bench_seed = 1;
  std::string bench_out;
  bench_cmd->add_option("--n", bench_sizes, "lane counts")->delimiter(',');
  bench_cmd->add_option("--kinds", bench_kinds, "network kinds")->delimiter(',');
  bench_cmd->add_option("--batch", bench_batch, "instances per timing");
  bench_cmd->add_option("--repeats", bench_repeats, "timing repeats (median)");
  bench_cmd->add_option("--seed", bench_seed, "input seed");
  bench_cmd->add_option("--out", bench_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_schedule(gen_kind, gen_n, gen_out);
    if (sort_cmd->parsed()) {
      if (sort_values.empty() && sort_input.empty()) {
        std::cerr << "sort: need --values or --input\n";
        return 1;
      }
      const std::vector<double> values =
          !sort_values.empty() ? parse_values(sort_values) : read_values_file(sort_input);
      return cmd_sort(values, sort_kind, sort_steepness, sort_lambda, sort_epsilon, sort_hard,
                      sort_perm);
    }
    if (grad->parsed()) {
      return cmd_gradcheck(grad_n, grad_kind, grad_lambda, grad_steepness, grad_seed, grad_h);
    }
    if (train_cmd->parsed()) {
      train_config.kind = network_kind_from_string(train_kind);
      train_config.loss = train_loss == "top-k" ? LossKind::top_k : LossKind::ranking_ce;
      if (model_seed_opt->count() == 0) {
        train_model_seed = train_config.seed ^ 0x9e3779b97f4a7c15ULL;
      }
      return cmd_train(train_data, train_config, train_steepness, train_arch, train_hidden,
                       train_model_seed, train_out, train_loss_csv);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_ckpt, eval_data, eval_k);
    if (bench_cmd->parsed()) {
      return cmd_bench(bench_sizes, bench_kinds, bench_batch, bench_repeats, bench_seed,
                       bench_out);
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
