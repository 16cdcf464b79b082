#include "sidekick/codec.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace sidekick {

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::kUnservedCustomer: return "unserved-customer";
    case Violation::kDoubleService: return "double-service";
    case Violation::kIneligibleDroneCustomer: return "ineligible-drone-customer";
    case Violation::kLoopSortie: return "loop-sortie";
    case Violation::kRevisit: return "revisit";
    case Violation::kDroneConcurrency: return "drone-concurrency";
    case Violation::kEndurance: return "endurance";
    case Violation::kPayload: return "payload";
    case Violation::kTruckCapacity: return "truck-capacity";
    case Violation::kRouteDuration: return "route-duration";
    case Violation::kMalformedSortie: return "malformed-sortie";
  }
  return "?";
}

int PenaltyReport::hard_count() const {
  int total = 0;
  for (int c : counts) total += c;
  return total;
}

int StructuredSolution::drone_customers() const {
  return static_cast<int>(std::count(served_by.begin(), served_by.end(), ServiceMode::kDrone));
}

int StructuredSolution::drones_used() const {
  int peak = 0;
  for (const RouteSchedule& r : schedule.routes) peak = std::max(peak, r.max_airborne);
  return peak;
}

int StructuredSolution::routes_used() const {
  return static_cast<int>(std::count_if(routes.begin(), routes.end(), [](const TruckRoute& r) { return r.used(); }));
}

bool StructuredSolution::same_plan(const StructuredSolution& other) const {
  return routes == other.routes && served_by == other.served_by;
}

int tour_length(const CandidateGraph& graph, int trucks) { return graph.size() + trucks - 1; }

void check_tour(const GiantTour& tour, const CandidateGraph& graph, int trucks) {
  const int length = tour_length(graph, trucks);
  if (static_cast<int>(tour.order.size()) != length)
    throw InputError(fmt::format("tour has {} nodes, expected {}", tour.order.size(), length));
  std::vector<char> seen(static_cast<std::size_t>(length), 0);
  for (int node : tour.order) {
    if (node < 0 || node >= length) throw InputError(fmt::format("tour node {} out of range", node + 1));
    if (seen[static_cast<std::size_t>(node)]++) throw InputError(fmt::format("tour node {} appears twice", node + 1));
  }
}

void root_tour(GiantTour& tour) {
  auto it = std::find(tour.order.begin(), tour.order.end(), 0);
  if (it != tour.order.end()) std::rotate(tour.order.begin(), it, tour.order.end());
}

Decoder::Decoder(const CandidateGraph& graph, int trucks) : graph_(&graph), trucks_(trucks) {
  const auto length = static_cast<std::size_t>(tour_length(graph, trucks));
  color_.assign(length, 0);
  location_.assign(length, 0);
  is_copy_.assign(length, 0);
  for (const CandidateNode& node : graph.nodes) {
    const auto i = static_cast<std::size_t>(node.node_id);
    color_[i] = node.color;
    location_[i] = node.location;
    is_copy_[i] = node.role == NodeRole::kCandidateCopy;
  }
  const auto colors = static_cast<std::size_t>(graph.color_count()) + 1;
  self_pos_.assign(colors, -1);
  sortie_index_.assign(colors, -1);
}

namespace {

enum class Event { kServe, kLaunch, kRetrieve };

// Appends an event to the route, merging into the last stop when the
// location matches and the merge is allowed.
int emit(TruckRoute& route, int location, Event event, int customer, int launch_stop_of_customer) {
  const int last = static_cast<int>(route.stops.size()) - 1;
  Stop& back = route.stops.back();
  bool merge = back.location == location;
  if (merge && event == Event::kServe) merge = back.customer == 0;
  if (merge && event == Event::kRetrieve) merge = launch_stop_of_customer != last;
  if (!merge) {
    route.stops.push_back(Stop{location, 0});
  }
  if (event == Event::kServe) route.stops.back().customer = customer;
  return static_cast<int>(route.stops.size()) - 1;
}

}  // namespace

void Decoder::decode(const GiantTour& tour, StructuredSolution& out) {
  const int length = static_cast<int>(tour.order.size());
  const int n = graph_->color_count();
  out.routes.resize(static_cast<std::size_t>(trucks_));
  for (TruckRoute& r : out.routes) {
    r.stops.clear();
    r.sorties.clear();
  }
  out.served_by.assign(static_cast<std::size_t>(n) + 1, ServiceMode::kUnserved);
  std::fill(sortie_index_.begin(), sortie_index_.end(), -1);

  int start = 0;
  while (start < length && tour.order[static_cast<std::size_t>(start)] != 0) ++start;
  if (start == length) start = 0;
  auto node_at = [&](int i) { return tour.order[static_cast<std::size_t>((start + i) % length)]; };

  int route_index = -1;
  TruckRoute* route = nullptr;
  // Sorties of the current segment still waiting for a retrieval marker.
  std::vector<int>& pending = launch_pos_;
  pending.clear();

  auto close_route = [&]() {
    if (route == nullptr) return;
    const int last = static_cast<int>(route->stops.size()) - 1;
    bool merge = last > 0 && route->stops.back().location == 0 && route->stops.back().customer == 0;
    if (merge) {
      for (int s : pending) {
        if (route->sorties[static_cast<std::size_t>(s)].launch_stop == last) merge = false;
      }
    }
    if (!merge) route->stops.push_back(Stop{0, 0});
    const int end = static_cast<int>(route->stops.size()) - 1;
    for (int s : pending) route->sorties[static_cast<std::size_t>(s)].retrieval_stop = end;
    pending.clear();
  };

  for (int i = 0; i < length; ++i) {
    const int node = node_at(i);
    if (is_depot_node(*graph_, node)) {
      close_route();
      ++route_index;
      route = &out.routes[static_cast<std::size_t>(std::min(route_index, trucks_ - 1))];
      route->stops.push_back(Stop{0, 0});
      continue;
    }
    const auto ni = static_cast<std::size_t>(node);
    const int c = color_[ni];
    const auto ci = static_cast<std::size_t>(c);
    if (is_copy_[ni]) {
      const int next = i + 1 < length ? node_at(i + 1) : 0;
      if (!is_depot_node(*graph_, next) && graph_->self_node(c) == next) {
        const int stop = emit(*route, location_[ni], Event::kLaunch, c, -1);
        sortie_index_[ci] = static_cast<int>(route->sorties.size());
        route->sorties.push_back(Sortie{stop, c, -1});
        pending.push_back(sortie_index_[ci]);
      } else if (sortie_index_[ci] >= 0 && out.served_by[ci] == ServiceMode::kDrone &&
                 route->sorties.size() > static_cast<std::size_t>(sortie_index_[ci]) &&
                 route->sorties[static_cast<std::size_t>(sortie_index_[ci])].customer == c &&
                 route->sorties[static_cast<std::size_t>(sortie_index_[ci])].retrieval_stop < 0) {
        Sortie& sortie = route->sorties[static_cast<std::size_t>(sortie_index_[ci])];
        sortie.retrieval_stop = emit(*route, location_[ni], Event::kRetrieve, c, sortie.launch_stop);
        pending.erase(std::find(pending.begin(), pending.end(), sortie_index_[ci]));
      }
      continue;
    }
    // Customer self node.
    const int prev = node_at(i - 1);
    if (!is_depot_node(*graph_, prev) && is_copy_[static_cast<std::size_t>(prev)] && color_[static_cast<std::size_t>(prev)] == c) {
      out.served_by[ci] = ServiceMode::kDrone;
    } else {
      out.served_by[ci] = ServiceMode::kTruck;
      emit(*route, location_[ni], Event::kServe, c, -1);
    }
  }
  close_route();
}

StructuredSolution decode(const GiantTour& tour, const CandidateGraph& graph, const VariantConfig& config) {
  Decoder decoder(graph, config.multi_route() ? config.truck_count : 1);
  StructuredSolution out;
  decoder.decode(tour, out);
  return out;
}

int count_revisits(const TruckRoute& route) {
  if (route.stops.size() < 2) return 0;
  std::vector<int> run_starts;
  run_starts.reserve(route.stops.size());
  for (std::size_t i = 0; i + 1 < route.stops.size(); ++i) {
    if (i == 0 || route.stops[i].location != route.stops[i - 1].location) run_starts.push_back(route.stops[i].location);
  }
  std::sort(run_starts.begin(), run_starts.end());
  int violations = 0;
  for (std::size_t i = 1; i < run_starts.size(); ++i) {
    if (run_starts[i] == run_starts[i - 1] && (i < 2 || run_starts[i - 2] != run_starts[i])) ++violations;
  }
  return violations;
}

int check_revisit(const StructuredSolution& solution, RevisitPolicy policy) {
  if (policy == RevisitPolicy::kRevisitOk) return 0;
  int total = 0;
  for (const TruckRoute& r : solution.routes) total += count_revisits(r);
  return total;
}

namespace {

int copy_at(const CandidateGraph& graph, int color, int location, const std::vector<char>& used) {
  for (int node : graph.members(color)) {
    const CandidateNode& cn = graph.nodes[static_cast<std::size_t>(node)];
    if (cn.role == NodeRole::kCandidateCopy && cn.location == location && !used[static_cast<std::size_t>(node)]) return node;
  }
  return -1;
}

}  // namespace

GiantTour encode(const StructuredSolution& plan, const CandidateGraph& graph) {
  const int trucks = static_cast<int>(plan.routes.size());
  if (trucks < 1) throw InputError("plan has no routes");
  const int n = graph.color_count();
  std::vector<char> used(static_cast<std::size_t>(graph.size()), 0);
  std::vector<int> seen(static_cast<std::size_t>(n) + 1, 0);
  GiantTour tour;
  tour.order.reserve(static_cast<std::size_t>(tour_length(graph, trucks)));

  auto push = [&](int node) {
    used[static_cast<std::size_t>(node)] = 1;
    tour.order.push_back(node);
  };
  auto park_ghosts = [&](int color) {
    for (int node : graph.members(color)) {
      if (!used[static_cast<std::size_t>(node)] && graph.nodes[static_cast<std::size_t>(node)].role == NodeRole::kCandidateCopy) push(node);
    }
  };
  auto check_customer = [&](int c) {
    if (c < 1 || c > n) throw InputError(fmt::format("plan references unknown customer {}", c));
    if (seen[static_cast<std::size_t>(c)]++) throw InputError(fmt::format("customer {} served twice", c));
  };

  for (int r = 0; r < trucks; ++r) {
    const TruckRoute& route = plan.routes[static_cast<std::size_t>(r)];
    push(r == 0 ? 0 : graph.size() + r - 1);
    const int stops = static_cast<int>(route.stops.size());
    if (stops < 2 || route.stops.front().location != 0 || route.stops.back().location != 0)
      throw InputError(fmt::format("route {} must start and end at the depot", r + 1));
    for (int s = 0; s < stops; ++s) {
      const Stop& stop = route.stops[static_cast<std::size_t>(s)];
      const bool last = s == stops - 1;
      for (const Sortie& sortie : route.sorties) {
        if (sortie.retrieval_stop != s) continue;
        const int b = copy_at(graph, sortie.customer, stop.location, used);
        if (b >= 0) {
          push(b);
          park_ghosts(sortie.customer);
        } else if (!last) {
          throw InputError(fmt::format("customer {}: retrieval site {} is outside its candidate pool", sortie.customer,
                                       stop.location));
        }
      }
      if (stop.customer != 0) {
        check_customer(stop.customer);
        if (stop.location != graph.nodes[static_cast<std::size_t>(graph.self_node(stop.customer))].location)
          throw InputError(fmt::format("customer {} served away from its location", stop.customer));
        push(graph.self_node(stop.customer));
        park_ghosts(stop.customer);
      }
      for (const Sortie& sortie : route.sorties) {
        if (sortie.launch_stop != s) continue;
        check_customer(sortie.customer);
        if (sortie.retrieval_stop <= s || sortie.retrieval_stop >= stops)
          throw InputError(fmt::format("customer {}: sortie retrieval must follow launch", sortie.customer));
        const int a = copy_at(graph, sortie.customer, stop.location, used);
        if (a < 0)
          throw InputError(fmt::format("customer {}: launch site {} is outside its candidate pool", sortie.customer,
                                       stop.location));
        const int retrieval_loc = route.stops[static_cast<std::size_t>(sortie.retrieval_stop)].location;
        const bool fallback = sortie.retrieval_stop == stops - 1 && [&] {
          for (int node : graph.members(sortie.customer)) {
            const CandidateNode& cn = graph.nodes[static_cast<std::size_t>(node)];
            if (node != a && cn.role == NodeRole::kCandidateCopy && cn.location == retrieval_loc) return false;
          }
          return true;
        }();
        if (fallback) {
          used[static_cast<std::size_t>(a)] = 1;
          park_ghosts(sortie.customer);
          used[static_cast<std::size_t>(a)] = 0;
        }
        push(a);
        push(graph.self_node(sortie.customer));
      }
    }
  }
  for (int c = 1; c <= n; ++c) {
    if (seen[static_cast<std::size_t>(c)] == 0) throw InputError(fmt::format("customer {} is not served by the plan", c));
  }

  Decoder decoder(graph, trucks);
  StructuredSolution check;
  decoder.decode(tour, check);
  if (check.routes != plan.routes) throw InputError("plan is not in canonical decoded form");
  return tour;
}

}  // namespace sidekick
