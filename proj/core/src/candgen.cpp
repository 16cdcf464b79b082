#include "sidekick/candgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace sidekick {

void CandidateGraph::index() {
  const int n_nodes = size();
  if (n_nodes == 0) throw InputError("candidate graph has no nodes");
  if (distances.size() != static_cast<std::size_t>(n_nodes) * static_cast<std::size_t>(n_nodes))
    throw InputError("distance matrix does not match node count");
  if (service_times.size() != static_cast<std::size_t>(n_nodes))
    throw InputError("service times do not match node count");
  if (drone_count < 1 || truck_count < 1) throw InputError("drone and truck counts must be positive");

  color_count_ = 0;
  location_count_ = 0;
  for (int i = 0; i < n_nodes; ++i) {
    const CandidateNode& node = nodes[static_cast<std::size_t>(i)];
    if (node.node_id != i) throw InputError(fmt::format("node ids not dense at {}", i));
    if (node.color < 0 || node.location < 0) throw InputError(fmt::format("negative color or location at node {}", i));
    color_count_ = std::max(color_count_, node.color);
    location_count_ = std::max(location_count_, node.location + 1);
  }
  if (color_count_ == 0) throw InputError("candidate graph has no customers");
  if (nodes.front().color != 0 || nodes.front().role != NodeRole::kDepot)
    throw InputError("node 0 must be the depot");

  const auto colors = static_cast<std::size_t>(color_count_) + 1;
  std::vector<int> count(colors, 0);
  for (const CandidateNode& node : nodes) ++count[static_cast<std::size_t>(node.color)];
  if (count[0] != 1) throw InputError("exactly one depot node expected");
  offsets_.assign(colors + 1, 0);
  for (std::size_t c = 0; c < colors; ++c) offsets_[c + 1] = offsets_[c] + count[c];
  members_.assign(nodes.size(), -1);
  self_.assign(colors, -1);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (const CandidateNode& node : nodes) {
    const auto c = static_cast<std::size_t>(node.color);
    if (node.role == NodeRole::kCustomerSelf) {
      if (node.location != node.color) throw InputError(fmt::format("customer {} self node at wrong location", node.color));
      if (self_[c] >= 0) throw InputError(fmt::format("color {} has two customer nodes", node.color));
      self_[c] = node.node_id;
    } else if (node.role == NodeRole::kCandidateCopy) {
      if (node.color == 0) throw InputError("depot color cannot hold candidate copies");
      if (node.location == node.color)
        throw InputError(fmt::format("copy of color {} sits at its own customer location", node.color));
    } else if (node.color != 0) {
      throw InputError(fmt::format("depot-role node {} has color {}", node.node_id, node.color));
    }
  }
  self_[0] = 0;
  for (std::size_t c = 1; c < colors; ++c) {
    if (self_[c] < 0) throw InputError(fmt::format("color {} has no customer node", c));
    members_[static_cast<std::size_t>(fill[c]++)] = self_[c];
  }
  members_[static_cast<std::size_t>(fill[0]++)] = 0;
  for (const CandidateNode& node : nodes) {
    if (node.role == NodeRole::kCandidateCopy) members_[static_cast<std::size_t>(fill[static_cast<std::size_t>(node.color)]++)] = node.node_id;
  }
  k_ = 0;
  for (std::size_t c = 1; c < colors; ++c) {
    if (count[c] == 0) throw InputError(fmt::format("color {} is empty", c));
    k_ = std::max(k_, count[c]);
  }
}

std::span<const int> CandidateGraph::members(int color) const {
  const auto c = static_cast<std::size_t>(color);
  return {members_.data() + offsets_[c], static_cast<std::size_t>(offsets_[c + 1] - offsets_[c])};
}

bool CandidateGraph::operator==(const CandidateGraph& other) const {
  return nodes == other.nodes && distances == other.distances && service_times == other.service_times &&
         drone_count == other.drone_count && truck_count == other.truck_count &&
         capacity_line == other.capacity_line && vehicles_line == other.vehicles_line;
}

int default_k(const Instance& instance) {
  const int pool = instance.customer_count() + instance.waypoint_count();
  return std::min(7, pool + 1);
}

CandidateGraph expand_candidates(const Instance& instance, const DistanceModel& dm,
                                 const VariantConfig& config, int k) {
  const int n = instance.customer_count();
  if (n < 1) throw InputError("instance has no customers");
  if (dm.size() != instance.location_count()) throw ConfigError("distance model does not match instance");
  // Pool: other customers, depot, waypoints.
  const int pool_size = instance.location_count() - 1;
  if (k < 2) throw ConfigError(fmt::format("k must be at least 2 (got {})", k));
  if (k - 1 > pool_size)
    throw ConfigError(fmt::format("k = {} exceeds the candidate pool of {} locations (max k = {})", k, pool_size,
                                  pool_size + 1));

  const CustomerTable customers = customer_table(instance, config);
  const int copies_per_site = config.loop == LoopPolicy::kAllow ? 2 : 1;

  CandidateGraph g;
  g.nodes.push_back({0, 0, 0, NodeRole::kDepot});
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(pool_size));
  for (int c = 1; c <= n; ++c) {
    g.nodes.push_back({g.size(), c, c, NodeRole::kCustomerSelf});
    if (!customers.eligible[static_cast<std::size_t>(c)]) continue;
    pool.clear();
    for (int loc = 0; loc < instance.location_count(); ++loc) {
      if (loc != c) pool.push_back(loc);
    }
    std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
      const double da = dm.drone_dist(a, c);
      const double db = dm.drone_dist(b, c);
      return da < db || (da == db && a < b);
    });
    for (int i = 0; i < k - 1; ++i) {
      for (int dup = 0; dup < copies_per_site; ++dup)
        g.nodes.push_back({g.size(), c, pool[static_cast<std::size_t>(i)], NodeRole::kCandidateCopy});
    }
  }

  const auto size = static_cast<std::size_t>(g.size());
  g.distances.resize(size * size);
  g.service_times.resize(size);
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = 0; b < size; ++b) g.distances[a * size + b] = dm.truck_ticks(g.nodes[a].location, g.nodes[b].location);
    const CandidateNode& node = g.nodes[a];
    g.service_times[a] = node.color == 0 ? 0 : dm.drone_ticks(node.location, node.color);
  }
  g.drone_count = config.drone_count;
  g.truck_count = config.truck_count;
  g.capacity_line = config.variant != Variant::kFstsp;
  g.vehicles_line = config.multi_route();
  g.index();
  return g;
}

CustomerTable customer_table(const CandidateGraph& graph) {
  CustomerTable t;
  const auto n = static_cast<std::size_t>(graph.color_count());
  t.location.assign(n + 1, 0);
  t.demand.assign(n + 1, 0.0);
  t.eligible.assign(n + 1, 0);
  for (int c = 1; c <= graph.color_count(); ++c) {
    t.location[static_cast<std::size_t>(c)] = graph.nodes[static_cast<std::size_t>(graph.self_node(c))].location;
    t.eligible[static_cast<std::size_t>(c)] = graph.eligible(c);
  }
  return t;
}

DistanceModel distance_model_from_graph(const CandidateGraph& graph, const VariantConfig& config, int scale) {
  const int size = graph.location_count();
  const auto n = static_cast<std::size_t>(size);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> truck(n * n, nan), drone(n * n, nan);
  for (const CandidateNode& a : graph.nodes) {
    for (const CandidateNode& b : graph.nodes) {
      truck[static_cast<std::size_t>(a.location) * n + static_cast<std::size_t>(b.location)] =
          static_cast<double>(graph.distance(a.node_id, b.node_id)) / scale;
    }
    if (a.color != 0) {
      const double t = static_cast<double>(graph.service_times[static_cast<std::size_t>(a.node_id)]) / scale;
      drone[static_cast<std::size_t>(a.location) * n + static_cast<std::size_t>(a.color)] = t;
      drone[static_cast<std::size_t>(a.color) * n + static_cast<std::size_t>(a.location)] = t;
    }
  }
  return DistanceModel::from_times(size, std::move(truck), std::move(drone), config, scale);
}

}  // namespace sidekick
