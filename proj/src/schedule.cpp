#include "sortnet/schedule.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include <json.hpp>

namespace sortnet {

namespace {

std::size_t log2_exact(std::size_t n) {
  // precondition: n is a power of two
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

std::size_t expected_layer_count(NetworkKind kind, std::size_t n) {
  if (kind == NetworkKind::odd_even) return n;
  const std::size_t k = log2_exact(n);
  return k * (k + 1) / 2;
}

}  // namespace

std::string to_string(NetworkKind kind) {
  return kind == NetworkKind::odd_even ? "odd-even" : "bitonic";
}

NetworkKind network_kind_from_string(const std::string& name) {
  if (name == "odd-even") return NetworkKind::odd_even;
  if (name == "bitonic") return NetworkKind::bitonic;
  throw std::invalid_argument("unknown network kind: " + name);
}

std::size_t ComparatorSchedule::comparator_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.size();
  return total;
}

ComparatorSchedule odd_even_schedule(std::size_t n) {
  if (n < 1) throw std::invalid_argument("odd_even_schedule: n must be >= 1");
  ComparatorSchedule s;
  s.n = n;
  s.kind = NetworkKind::odd_even;
  s.layers.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t start = t % 2;  // layer 1 (t=0) pairs even offsets
    for (std::size_t i = start; i + 1 < n; i += 2) {
      s.layers[t].push_back({i, i + 1});
    }
  }
  return s;
}

ComparatorSchedule bitonic_schedule(std::size_t n) {
  if (n < 1 || !std::has_single_bit(n)) {
    throw std::invalid_argument("bitonic_schedule: n must be a power of two");
  }
  ComparatorSchedule s;
  s.n = n;
  s.kind = NetworkKind::bitonic;
  for (std::size_t block = 2; block <= n; block *= 2) {
    for (std::size_t stride = block / 2; stride >= 1; stride /= 2) {
      Layer layer;
      for (std::size_t i = 0; i < n; ++i) {
        if ((i & stride) != 0) continue;
        const std::size_t partner = i ^ stride;
        if (partner >= n) continue;
        const bool ascending = (i & block) == 0;
        if (ascending) {
          layer.push_back({i, partner});
        } else {
          layer.push_back({partner, i});
        }
      }
      s.layers.push_back(std::move(layer));
    }
  }
  return s;
}

void validate_schedule(const ComparatorSchedule& schedule) {
  if (schedule.n < 1) throw std::invalid_argument("schedule: n must be >= 1");
  if (schedule.kind == NetworkKind::bitonic && !std::has_single_bit(schedule.n)) {
    throw std::invalid_argument("schedule: bitonic requires n to be a power of two");
  }
  if (schedule.layer_count() != expected_layer_count(schedule.kind, schedule.n)) {
    throw std::invalid_argument("schedule: layer count does not match kind");
  }
  std::vector<char> used(schedule.n);
  for (const auto& layer : schedule.layers) {
    std::fill(used.begin(), used.end(), 0);
    for (const auto& c : layer) {
      if (c.min_pos >= schedule.n || c.max_pos >= schedule.n) {
        throw std::invalid_argument("schedule: lane index out of range");
      }
      if (c.min_pos == c.max_pos) {
        throw std::invalid_argument("schedule: degenerate comparator");
      }
      if (used[c.min_pos] || used[c.max_pos]) {
        throw std::invalid_argument("schedule: lane reused within a layer");
      }
      used[c.min_pos] = used[c.max_pos] = 1;
    }
  }
}

void hard_execute(const ComparatorSchedule& schedule, std::vector<double>& values) {
  if (values.size() != schedule.n) {
    throw std::invalid_argument("hard_execute: size mismatch");
  }
  for (const auto& layer : schedule.layers) {
    for (const auto& c : layer) {
      double& lo = values[c.min_pos];
      double& hi = values[c.max_pos];
      if (lo > hi) std::swap(lo, hi);
    }
  }
}

bool validate_discrete(const ComparatorSchedule& schedule) {
  validate_schedule(schedule);
  if (schedule.n > 20) {
    throw std::invalid_argument("validate_discrete: n above exhaustive bound (20)");
  }
  const std::size_t n = schedule.n;
  std::vector<double> values(n);
  for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
    for (std::size_t i = 0; i < n; ++i) values[i] = (bits >> i) & 1u;
    hard_execute(schedule, values);
    if (!std::is_sorted(values.begin(), values.end())) return false;
  }
  return true;
}

std::string schedule_serialize(const ComparatorSchedule& schedule) {
  validate_schedule(schedule);
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& layer : schedule.layers) {
    nlohmann::ordered_json jl = nlohmann::ordered_json::array();
    for (const auto& c : layer) {
      jl.push_back({c.min_pos, c.max_pos});
    }
    layers.push_back(std::move(jl));
  }
  nlohmann::ordered_json j;
  j["n"] = schedule.n;
  j["kind"] = to_string(schedule.kind);
  j["layers"] = std::move(layers);
  return j.dump();
}

ComparatorSchedule schedule_parse(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("schedule_parse: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("kind") || !j.contains("layers")) {
    throw std::runtime_error("schedule_parse: expected object with n, kind, layers");
  }
  ComparatorSchedule s;
  if (!j["n"].is_number_unsigned() || j["n"].get<std::size_t>() < 1) {
    throw std::runtime_error("schedule_parse: n must be a positive integer");
  }
  s.n = j["n"].get<std::size_t>();
  s.kind = network_kind_from_string(j["kind"].get<std::string>());
  for (const auto& jl : j["layers"]) {
    Layer layer;
    for (const auto& jc : jl) {
      if (!jc.is_array() || jc.size() != 2) {
        throw std::runtime_error("schedule_parse: comparator must be a [min, max] pair");
      }
      layer.push_back({jc[0].get<std::size_t>(), jc[1].get<std::size_t>()});
    }
    s.layers.push_back(std::move(layer));
  }
  validate_schedule(s);
  return s;
}

}  // namespace sortnet
