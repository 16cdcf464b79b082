#include "sidekick/eval.hpp"

#include <algorithm>
#include <cmath>

namespace sidekick {
namespace {

bool known(std::int64_t ticks) { return ticks < DistanceModel::kUnknownTicks; }

std::int64_t limit_ticks(const DistanceModel& dm, double minutes) {
  return std::isinf(minutes) ? std::numeric_limits<std::int64_t>::max() : dm.to_ticks(minutes);
}

bool sortie_shape_ok(const TruckRoute& route, const Sortie& s, int customers) {
  const int stops = static_cast<int>(route.stops.size());
  return s.customer >= 1 && s.customer <= customers && s.launch_stop >= 0 && s.retrieval_stop < stops &&
         s.launch_stop < s.retrieval_stop;
}

}  // namespace

SortieCheck sortie_feasible(int i, int j, int k, const DistanceModel& dm, const VariantConfig& config,
                            const CustomerTable& customers) {
  if (j < 1 || j > customers.count()) return {false, Violation::kMalformedSortie};
  const int loc = customers.location[static_cast<std::size_t>(j)];
  if (i == loc || k == loc) return {false, Violation::kMalformedSortie};
  if (!known(dm.drone_ticks(i, loc)) || !known(dm.drone_ticks(loc, k))) return {false, Violation::kMalformedSortie};
  if (config.loop == LoopPolicy::kForbid && i == k) return {false, Violation::kLoopSortie};
  if (!customers.eligible[static_cast<std::size_t>(j)]) return {false, Violation::kIneligibleDroneCustomer};
  if (customers.demand[static_cast<std::size_t>(j)] > config.drone_payload) return {false, Violation::kPayload};
  if (!std::isinf(config.endurance)) {
    const std::int64_t need = dm.to_ticks(config.launch_time) + dm.to_ticks(config.retrieval_time) +
                              dm.to_ticks(config.serv_drone) + dm.drone_ticks(i, loc) + dm.drone_ticks(loc, k);
    if (need > dm.to_ticks(config.endurance)) return {false, Violation::kEndurance};
  }
  return {};
}

void simulate_schedule(const StructuredSolution& plan, const DistanceModel& dm, const VariantConfig& config,
                       const CustomerTable& customers, Schedule& out) {
  const std::int64_t launch = dm.to_ticks(config.launch_time);
  const std::int64_t retrieve = dm.to_ticks(config.retrieval_time);
  const std::int64_t serv_t = dm.to_ticks(config.serv_truck);
  const std::int64_t serv_d = dm.to_ticks(config.serv_drone);
  const int n = customers.count();

  out.routes.resize(plan.routes.size());
  out.makespan = 0;
  thread_local std::vector<int> arriving;
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const TruckRoute& route = plan.routes[r];
    RouteSchedule& rs = out.routes[r];
    const std::size_t stops = route.stops.size();
    rs.arrival.assign(stops, 0);
    rs.departure.assign(stops, 0);
    rs.sorties.assign(route.sorties.size(), SortieTimes{});
    rs.max_airborne = 0;
    rs.concurrency_violations = 0;
    rs.return_time = 0;
    if (stops == 0) continue;

    std::int64_t t = 0;
    int airborne = 0;
    std::size_t next_launch = 0;
    for (std::size_t s = 0; s < stops; ++s) {
      const Stop& stop = route.stops[s];
      if (s > 0) t = rs.departure[s - 1] + dm.truck_ticks(route.stops[s - 1].location, stop.location);
      rs.arrival[s] = t;

      arriving.clear();
      for (std::size_t j = 0; j < route.sorties.size(); ++j) {
        const Sortie& so = route.sorties[j];
        if (so.retrieval_stop == static_cast<int>(s) && sortie_shape_ok(route, so, n)) arriving.push_back(static_cast<int>(j));
      }
      std::sort(arriving.begin(), arriving.end(), [&](int a, int b) {
        const std::int64_t ta = rs.sorties[static_cast<std::size_t>(a)].arrive_retrieval;
        const std::int64_t tb = rs.sorties[static_cast<std::size_t>(b)].arrive_retrieval;
        return ta < tb || (ta == tb && a < b);
      });
      for (int j : arriving) {
        SortieTimes& st = rs.sorties[static_cast<std::size_t>(j)];
        st.rejoin_start = std::max(t, st.arrive_retrieval);
        t = st.rejoin_start + retrieve;
        st.rejoin_complete = t;
        --airborne;
      }

      if (stop.customer != 0) t += serv_t;

      // Sorties are ordered by launch stop.
      while (next_launch < route.sorties.size() && route.sorties[next_launch].launch_stop < static_cast<int>(s)) ++next_launch;
      for (; next_launch < route.sorties.size() && route.sorties[next_launch].launch_stop == static_cast<int>(s); ++next_launch) {
        const Sortie& so = route.sorties[next_launch];
        if (!sortie_shape_ok(route, so, n)) continue;
        SortieTimes& st = rs.sorties[next_launch];
        const int cloc = customers.location[static_cast<std::size_t>(so.customer)];
        const int rloc = route.stops[static_cast<std::size_t>(so.retrieval_stop)].location;
        st.launch_start = t;
        t += launch;
        st.depart = t;
        if (airborne >= config.drone_count) ++rs.concurrency_violations;
        ++airborne;
        rs.max_airborne = std::max(rs.max_airborne, airborne);
        st.arrive_customer = st.depart + dm.drone_ticks(stop.location, cloc);
        st.arrive_retrieval = st.arrive_customer + serv_d + dm.drone_ticks(cloc, rloc);
      }
      rs.departure[s] = t;
    }
    rs.return_time = rs.departure[stops - 1];
    out.makespan = std::max(out.makespan, rs.return_time);
  }
}

Schedule simulate_schedule(const StructuredSolution& plan, const DistanceModel& dm, const VariantConfig& config,
                           const CustomerTable& customers) {
  Schedule s;
  simulate_schedule(plan, dm, config, customers, s);
  return s;
}

double cost_objective(const StructuredSolution& plan, const Schedule& schedule, const DistanceModel& dm,
                      const VariantConfig& config, const CustomerTable& customers) {
  const CostCoefficients& k = config.cost;
  const int n = customers.count();
  double total = 0.0;
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const TruckRoute& route = plan.routes[r];
    if (route.stops.empty()) continue;
    double miles = 0.0;
    for (std::size_t s = 1; s < route.stops.size(); ++s) miles += dm.truck_dist(route.stops[s - 1].location, route.stops[s].location);
    const RouteSchedule& rs = schedule.routes[r];
    const double minutes = dm.from_ticks(rs.return_time - rs.departure.front());
    total += k.truck_per_mile * miles + k.truck_per_min * minutes;
  }
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const TruckRoute& route = plan.routes[r];
    for (std::size_t j = 0; j < route.sorties.size(); ++j) {
      const Sortie& so = route.sorties[j];
      if (!sortie_shape_ok(route, so, n)) continue;
      const int cloc = customers.location[static_cast<std::size_t>(so.customer)];
      const int lloc = route.stops[static_cast<std::size_t>(so.launch_stop)].location;
      const int rloc = route.stops[static_cast<std::size_t>(so.retrieval_stop)].location;
      const double flight = dm.drone_dist(lloc, cloc) + dm.drone_dist(cloc, rloc);
      const SortieTimes& st = schedule.routes[r].sorties[j];
      const double airborne = dm.from_ticks(st.rejoin_start - st.depart);
      total += k.drone_per_mile * flight + k.drone_per_min * airborne;
    }
  }
  return total;
}

const PenaltyReport& evaluate_plan(StructuredSolution& plan, const DistanceModel& dm, const VariantConfig& config,
                                   const CustomerTable& customers) {
  PenaltyReport& rep = plan.report;
  rep = PenaltyReport{};
  const int n = customers.count();
  simulate_schedule(plan, dm, config, customers, plan.schedule);

  thread_local std::vector<int> visits;
  visits.assign(static_cast<std::size_t>(n) + 1, 0);
  const std::int64_t handling =
      dm.to_ticks(config.launch_time) + dm.to_ticks(config.retrieval_time) + dm.to_ticks(config.serv_drone);
  const std::int64_t endurance = limit_ticks(dm, config.endurance);
  const std::int64_t max_duration = limit_ticks(dm, config.max_route_duration);

  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const TruckRoute& route = plan.routes[r];
    const RouteSchedule& rs = plan.schedule.routes[r];
    double load = 0.0;
    for (const Stop& stop : route.stops) {
      if (stop.customer < 1 || stop.customer > n) continue;
      ++visits[static_cast<std::size_t>(stop.customer)];
      load += customers.demand[static_cast<std::size_t>(stop.customer)];
    }
    for (const Sortie& so : route.sorties) {
      if (!sortie_shape_ok(route, so, n)) {
        ++rep.count(Violation::kMalformedSortie);
        if (so.customer >= 1 && so.customer <= n) ++visits[static_cast<std::size_t>(so.customer)];
        continue;
      }
      ++visits[static_cast<std::size_t>(so.customer)];
      load += customers.demand[static_cast<std::size_t>(so.customer)];
      const int lloc = route.stops[static_cast<std::size_t>(so.launch_stop)].location;
      const int rloc = route.stops[static_cast<std::size_t>(so.retrieval_stop)].location;
      const int cloc = customers.location[static_cast<std::size_t>(so.customer)];
      // Each sortie reports every class it violates.
      if (lloc == cloc || rloc == cloc || !known(dm.drone_ticks(lloc, cloc)) || !known(dm.drone_ticks(cloc, rloc))) {
        ++rep.count(Violation::kMalformedSortie);
        continue;
      }
      if (config.loop == LoopPolicy::kForbid && lloc == rloc) ++rep.count(Violation::kLoopSortie);
      if (!customers.eligible[static_cast<std::size_t>(so.customer)]) ++rep.count(Violation::kIneligibleDroneCustomer);
      if (customers.demand[static_cast<std::size_t>(so.customer)] > config.drone_payload) ++rep.count(Violation::kPayload);
      if (handling + dm.drone_ticks(lloc, cloc) + dm.drone_ticks(cloc, rloc) > endurance) ++rep.count(Violation::kEndurance);
    }
    rep.count(Violation::kDroneConcurrency) += rs.concurrency_violations;
    if (load > config.truck_capacity) ++rep.count(Violation::kTruckCapacity);
    if (!route.stops.empty() && rs.return_time - rs.departure.front() > max_duration) ++rep.count(Violation::kRouteDuration);
  }
  for (int c = 1; c <= n; ++c) {
    const int v = visits[static_cast<std::size_t>(c)];
    if (v == 0) ++rep.count(Violation::kUnservedCustomer);
    if (v > 1) rep.count(Violation::kDoubleService) += v - 1;
  }
  rep.count(Violation::kRevisit) = check_revisit(plan, config.revisit);

  plan.objective = config.objective == Objective::kCost
                       ? cost_objective(plan, plan.schedule, dm, config, customers)
                       : dm.from_ticks(plan.schedule.makespan);
  rep.soft_objective = plan.objective;
  rep.finalize();
  return rep;
}

TourEvaluator::TourEvaluator(const CandidateGraph& graph, const DistanceModel& dm, const VariantConfig& config,
                             CustomerTable customers)
    : graph_(&graph),
      dm_(&dm),
      config_(&config),
      customers_(std::move(customers)),
      trucks_(config.multi_route() ? config.truck_count : 1),
      decoder_(graph, trucks_) {
  if (customers_.count() != graph.color_count()) throw ConfigError("customer table does not match the graph");
}

const PenaltyReport& TourEvaluator::evaluate(const GiantTour& tour) {
  decoder_.decode(tour, plan_);
  return evaluate_plan(plan_, *dm_, *config_, customers_);
}

PenaltyReport penalty(const GiantTour& tour, const CandidateGraph& graph, const DistanceModel& dm,
                      const VariantConfig& config, const CustomerTable& customers) {
  TourEvaluator ev(graph, dm, config, customers);
  return ev.evaluate(tour);
}

}  // namespace sidekick
