#include "sortnet/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "sortnet/softsort.hpp"

namespace sortnet {

SynthResult synth_generate(std::size_t d, std::size_t n, std::size_t group_count,
                           double noise_std, unsigned long long seed) {
  if (d < 1) throw std::invalid_argument("synth_generate: d must be >= 1");
  if (n < 2) throw std::invalid_argument("synth_generate: n must be >= 2");
  if (group_count < 1) throw std::invalid_argument("synth_generate: need at least one group");
  if (noise_std < 0.0) throw std::invalid_argument("synth_generate: noise_std must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> latent_weights(d);
  for (double& w : latent_weights) w = normal(rng);

  SynthResult out;
  out.dataset.d = d;
  out.dataset.n = n;
  out.dataset.groups.reserve(group_count);
  out.eval_keys.reserve(group_count * n);

  std::vector<double> keys(n);
  for (std::size_t g = 0; g < group_count; ++g) {
    std::vector<std::vector<double>> items(n);
    for (std::size_t i = 0; i < n; ++i) {
      items[i].resize(d);
      double key = 0.0;
      for (std::size_t f = 0; f < d; ++f) {
        items[i][f] = normal(rng);
        key += latent_weights[f] * items[i][f];
      }
      if (noise_std > 0.0) key += noise_std * normal(rng);
      keys[i] = key;
      out.eval_keys.push_back(key);
    }
    out.dataset.groups.push_back({std::move(items), GroundTruthPermutation(hard_ranks(keys))});
  }
  return out;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  if (header.size() < 3 || header[0] != "group" || header[1] != "rank") {
    throw std::runtime_error("load_csv: header must be group,rank,f0,...");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t f = 0; f < d; ++f) {
    if (header[2 + f] != "f" + std::to_string(f)) {
      throw std::runtime_error("load_csv: feature columns must be f0,f1,...");
    }
  }

  struct Row {
    std::size_t rank;
    std::vector<double> features;
  };
  std::map<long long, std::vector<Row>> by_group;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != header.size()) {
      throw std::runtime_error("load_csv: wrong field count on line " + std::to_string(line_no));
    }
    try {
      const long long group = std::stoll(fields[0]);
      if (group < 0) throw std::runtime_error("negative group id");
      const long long rank = std::stoll(fields[1]);
      if (rank < 0) throw std::runtime_error("negative rank");
      Row row;
      row.rank = static_cast<std::size_t>(rank);
      row.features.reserve(d);
      for (std::size_t f = 0; f < d; ++f) {
        std::size_t pos = 0;
        row.features.push_back(std::stod(fields[2 + f], &pos));
        if (pos != fields[2 + f].size()) throw std::runtime_error("trailing junk in float");
      }
      by_group[group].push_back(std::move(row));
    } catch (const std::exception& e) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (by_group.empty()) throw std::runtime_error("load_csv: no data rows");

  Dataset ds;
  ds.d = d;
  ds.n = by_group.begin()->second.size();
  for (auto& [group_id, rows] : by_group) {
    if (rows.size() != ds.n) {
      throw std::runtime_error("load_csv: inconsistent group sizes (group " +
                               std::to_string(group_id) + ")");
    }
    std::vector<std::vector<double>> items;
    std::vector<std::size_t> ranks;
    items.reserve(rows.size());
    ranks.reserve(rows.size());
    for (auto& row : rows) {
      items.push_back(std::move(row.features));
      ranks.push_back(row.rank);
    }
    try {
      ds.groups.push_back({std::move(items), GroundTruthPermutation(std::move(ranks))});
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("load_csv: invalid rank permutation in group " +
                               std::to_string(group_id));
    }
  }
  return ds;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  out << "group,rank";
  for (std::size_t f = 0; f < dataset.d; ++f) out << ",f" << f;
  out << "\n";
  char buf[64];
  for (std::size_t g = 0; g < dataset.groups.size(); ++g) {
    const auto& group = dataset.groups[g];
    for (std::size_t i = 0; i < group.items.size(); ++i) {
      out << g << ',' << group.true_perm.rank_of[i];
      for (double v : group.items[i]) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out << ',' << std::string_view(buf, res.ptr);
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

}  // namespace sortnet
