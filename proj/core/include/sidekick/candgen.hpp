#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sidekick/model.hpp"

namespace sidekick {

enum class NodeRole { kDepot, kCustomerSelf, kCandidateCopy };

struct CandidateNode {
  int node_id = 0;
  int color = 0;     // 0 = depot, 1..n = customers
  int location = 0;  // physical location, doubles as the draft score
  NodeRole role = NodeRole::kDepot;

  bool operator==(const CandidateNode&) const = default;
};

/// The expanded candidate graph ("flat points"): the depot, one self node per
/// customer and, for drone-eligible customers, copies placed at the nearest
/// pool locations that can act as launch/retrieval markers.
class CandidateGraph {
 public:
  std::vector<CandidateNode> nodes;
  std::vector<std::int64_t> distances;      // node x node, truck ticks
  std::vector<std::int64_t> service_times;  // drone ticks node location -> its customer
  int drone_count = 1;
  int truck_count = 1;
  bool capacity_line = false;
  bool vehicles_line = false;

  /// Validates structure and builds the per-color index. Throws InputError.
  void index();

  int size() const { return static_cast<int>(nodes.size()); }
  int color_count() const { return color_count_; }
  /// Largest color-set size (the k used for expansion).
  int k() const { return k_; }
  int location_count() const { return location_count_; }

  std::int64_t distance(int a, int b) const {
    return distances[static_cast<std::size_t>(a) * nodes.size() + static_cast<std::size_t>(b)];
  }
  /// Node ids of a color, customer self node first.
  std::span<const int> members(int color) const;
  int self_node(int color) const { return self_[static_cast<std::size_t>(color)]; }
  bool eligible(int color) const { return members(color).size() > 1; }

  bool operator==(const CandidateGraph& other) const;

 private:
  int color_count_ = 0;
  int k_ = 0;
  int location_count_ = 0;
  std::vector<int> offsets_;
  std::vector<int> members_;
  std::vector<int> self_;
};

/// Nearest-neighbor expansion. The pool for customer c is every other
/// customer location, the depot and any waypoint; ties break by location id.
/// Throws ConfigError when k - 1 exceeds the pool.
CandidateGraph expand_candidates(const Instance& instance, const DistanceModel& dm,
                                 const VariantConfig& config, int k);

/// min(7, pool size + 1).
int default_k(const Instance& instance);

/// Per-customer table recoverable from the graph alone (no demands).
CustomerTable customer_table(const CandidateGraph& graph);

/// Explicit distance model reconstructed from the integer data of a graph:
/// truck times from the edge weights, drone times from the service times.
/// Pairs not present in the graph are unknown.
DistanceModel distance_model_from_graph(const CandidateGraph& graph, const VariantConfig& config, int scale);

}  // namespace sidekick
