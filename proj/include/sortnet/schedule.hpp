#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sortnet {

// One compare-and-swap between two lanes. After execution the smaller value
// sits at min_pos and the larger at max_pos, which encodes the direction of
// the comparator without a separate flag.
struct Comparator {
  std::size_t min_pos = 0;
  std::size_t max_pos = 0;

  bool operator==(const Comparator&) const = default;
};

using Layer = std::vector<Comparator>;

enum class NetworkKind { odd_even, bitonic };

std::string to_string(NetworkKind kind);
NetworkKind network_kind_from_string(const std::string& name);

// Fixed wiring of a sorting network: layers of lane-disjoint comparators,
// executed in order. Immutable after construction; safe to share read-only
// across threads.
struct ComparatorSchedule {
  std::size_t n = 0;
  NetworkKind kind = NetworkKind::odd_even;
  std::vector<Layer> layers;

  std::size_t layer_count() const { return layers.size(); }
  std::size_t comparator_count() const;

  bool operator==(const ComparatorSchedule&) const = default;
};

// Odd-even transposition network: n layers of adjacent-pair comparators,
// alternating between even starting offsets (lanes 0-1, 2-3, ...) and odd
// ones (lanes 1-2, 3-4, ...). The first layer starts even. For n = 1 the
// single layer is empty.
ComparatorSchedule odd_even_schedule(std::size_t n);

// Bitonic network for n = 2^k lanes, log2(n)*(log2(n)+1)/2 layers. Throws
// std::invalid_argument for other n.
ComparatorSchedule bitonic_schedule(std::size_t n);

// Throws std::invalid_argument if a layer reuses a lane, a comparator is
// degenerate or out of range, or the layer count does not match the kind's
// formula.
void validate_schedule(const ComparatorSchedule& schedule);

// Executes the network with hard min/max on `values` in place.
void hard_execute(const ComparatorSchedule& schedule, std::vector<double>& values);

// 0-1 principle check: true iff the schedule sorts all 2^n binary inputs.
// Exhaustive, so restricted to n <= 20 (throws above that).
bool validate_discrete(const ComparatorSchedule& schedule);

// Text format: {"n": <int>, "kind": "odd-even"|"bitonic",
//               "layers": [ [ [min_pos, max_pos], ... ], ... ]}
std::string schedule_serialize(const ComparatorSchedule& schedule);
ComparatorSchedule schedule_parse(const std::string& text);

}  // namespace sortnet
