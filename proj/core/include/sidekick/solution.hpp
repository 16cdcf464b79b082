#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sidekick {

/// A cyclic permutation of every candidate-graph node plus the V-1 route
/// separator ids (graph.size() .. graph.size()+V-2), rooted at node 0.
struct GiantTour {
  std::vector<int> order;

  bool operator==(const GiantTour&) const = default;
};

struct Stop {
  int location = 0;
  int customer = 0;  // truck-served customer at this stop, 0 when none

  bool operator==(const Stop&) const = default;
};

/// Drone flight: launched at route stop `launch_stop`, serves `customer`,
/// rejoins the same truck at `retrieval_stop`.
struct Sortie {
  int launch_stop = 0;
  int customer = 0;
  int retrieval_stop = 0;

  bool operator==(const Sortie&) const = default;
};

/// Stops begin and end at the depot; an unused truck has the two depot stops
/// only. Sorties are ordered by launch stop.
struct TruckRoute {
  std::vector<Stop> stops;
  std::vector<Sortie> sorties;

  bool used() const { return stops.size() > 2 || !sorties.empty(); }
  bool operator==(const TruckRoute&) const = default;
};

enum class ServiceMode : std::uint8_t { kUnserved, kTruck, kDrone };

enum class Violation : int {
  kUnservedCustomer,
  kDoubleService,
  kIneligibleDroneCustomer,
  kLoopSortie,
  kRevisit,
  kDroneConcurrency,
  kEndurance,
  kPayload,
  kTruckCapacity,
  kRouteDuration,
  kMalformedSortie,
};
inline constexpr int kViolationKinds = 11;

std::string_view to_string(Violation v);

/// Hard terms are priced at kHardPenalty each; the soft term is the objective.
inline constexpr double kHardPenalty = 1e6;

struct PenaltyReport {
  std::array<int, kViolationKinds> counts{};
  double soft_objective = 0.0;
  double total_penalty = 0.0;

  int count(Violation v) const { return counts[static_cast<std::size_t>(v)]; }
  int& count(Violation v) { return counts[static_cast<std::size_t>(v)]; }
  int hard_count() const;
  bool feasible() const { return hard_count() == 0; }
  void finalize() { total_penalty = kHardPenalty * hard_count() + soft_objective; }
};

/// Times in integer ticks (minutes * scale).
struct SortieTimes {
  std::int64_t launch_start = 0;      // launch handling begins
  std::int64_t depart = 0;            // drone leaves the truck
  std::int64_t arrive_customer = 0;
  std::int64_t arrive_retrieval = 0;  // drone reaches the rendezvous location
  std::int64_t rejoin_start = 0;      // both present, recovery begins
  std::int64_t rejoin_complete = 0;

  bool operator==(const SortieTimes&) const = default;
};

struct RouteSchedule {
  std::vector<std::int64_t> arrival;
  std::vector<std::int64_t> departure;
  std::vector<SortieTimes> sorties;  // parallel to TruckRoute::sorties
  std::int64_t return_time = 0;
  int max_airborne = 0;
  int concurrency_violations = 0;

  bool operator==(const RouteSchedule&) const = default;
};

struct Schedule {
  std::vector<RouteSchedule> routes;
  std::int64_t makespan = 0;

  bool operator==(const Schedule&) const = default;
};

/// Decoded truck-and-drone plan. served_by is indexed by customer id
/// (entry 0 unused).
struct StructuredSolution {
  std::vector<TruckRoute> routes;
  std::vector<ServiceMode> served_by;
  Schedule schedule;
  double objective = 0.0;
  PenaltyReport report;

  int drone_customers() const;
  int drones_used() const;  // peak simultaneous drones over all routes
  int routes_used() const;
  /// Same routes, sorties and service assignment (schedule ignored).
  bool same_plan(const StructuredSolution& other) const;
};

}  // namespace sidekick
