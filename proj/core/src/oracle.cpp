#include "sidekick/oracle.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <utility>

#include <fmt/format.h>

#include "sidekick/eval.hpp"

namespace sidekick {
namespace {

using Clock = std::chrono::steady_clock;

struct Placement {
  int route = 0;
  int launch = 0;
  int retrieval = 0;
};

class Enumerator {
 public:
  Enumerator(const DistanceModel& dm, const VariantConfig& config, const CustomerTable& customers,
             const OracleLimits& limits)
      : dm_(dm),
        config_(config),
        customers_(customers),
        limits_(limits),
        n_(customers.count()),
        trucks_(config.multi_route() ? config.truck_count : 1),
        start_(Clock::now()) {
    launch_ = dm.to_ticks(config.launch_time);
    retrieve_ = dm.to_ticks(config.retrieval_time);
    serv_t_ = dm.to_ticks(config.serv_truck);
    serv_d_ = dm.to_ticks(config.serv_drone);
    endurance_ = std::isinf(config.endurance) ? std::numeric_limits<std::int64_t>::max() : dm.to_ticks(config.endurance);
  }

  OracleResult run() {
    std::vector<int> candidates;
    for (int c = 1; c <= n_; ++c) {
      if (droneable(c)) candidates.push_back(c);
    }
    const int e = static_cast<int>(candidates.size());
    std::vector<std::uint32_t> masks(std::size_t{1} << e);
    for (std::uint32_t m = 0; m < masks.size(); ++m) masks[m] = m;
    // Larger drone sets first: they tend to give good incumbents early.
    std::stable_sort(masks.begin(), masks.end(),
                     [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) > std::popcount(b); });

    for (std::uint32_t mask : masks) {
      drones_.clear();
      std::vector<char> is_drone(static_cast<std::size_t>(n_) + 1, 0);
      for (int b = 0; b < e; ++b) {
        if (mask & (1u << b)) {
          drones_.push_back(candidates[static_cast<std::size_t>(b)]);
          is_drone[static_cast<std::size_t>(candidates[static_cast<std::size_t>(b)])] = 1;
        }
      }
      truck_.clear();
      for (int c = 1; c <= n_; ++c) {
        if (!is_drone[static_cast<std::size_t>(c)]) truck_.push_back(c);
      }
      routes_.assign(static_cast<std::size_t>(trucks_), {});
      used_.assign(truck_.size(), 0);
      extend_routes(0, 0);
    }
    if (!found_) throw OracleRefused("no feasible plan exists for this instance");
    OracleResult result;
    result.optimum = best_value_;
    result.plan = best_plan_;
    evaluate_plan(result.plan, dm_, config_, customers_);
    result.enumerated = enumerated_;
    result.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    return result;
  }

 private:
  bool droneable(int c) const {
    return customers_.eligible[static_cast<std::size_t>(c)] &&
           customers_.demand[static_cast<std::size_t>(c)] <= config_.drone_payload;
  }

  int loc(int c) const { return customers_.location[static_cast<std::size_t>(c)]; }

  bool prune(double bound) const {
    return !limits_.naive && found_ && bound > best_value_ + 1e-9 * std::max(1.0, std::abs(best_value_));
  }

  // Lower bound from truck driving and service alone.
  double truck_bound(int open_route) const {
    if (config_.objective == Objective::kMakespan) {
      std::int64_t worst = 0;
      for (int r = 0; r <= open_route; ++r) {
        const auto& seq = routes_[static_cast<std::size_t>(r)];
        std::int64_t t = 0;
        int at = 0;
        for (int c : seq) {
          t += dm_.truck_ticks(at, loc(c)) + serv_t_;
          at = loc(c);
        }
        if (r < open_route) t += dm_.truck_ticks(at, 0);
        worst = std::max(worst, t);
      }
      return dm_.from_ticks(worst);
    }
    double total = 0.0;
    for (int r = 0; r <= open_route; ++r) {
      const auto& seq = routes_[static_cast<std::size_t>(r)];
      int at = 0;
      double miles = 0.0;
      std::int64_t t = 0;
      for (int c : seq) {
        miles += dm_.truck_dist(at, loc(c));
        t += dm_.truck_ticks(at, loc(c)) + serv_t_;
        at = loc(c);
      }
      if (r < open_route) {
        miles += dm_.truck_dist(at, 0);
        t += dm_.truck_ticks(at, 0);
      }
      total += config_.cost.truck_per_mile * miles + config_.cost.truck_per_min * dm_.from_ticks(t);
    }
    return total;
  }

  void extend_routes(int route, int placed) {
    if (!limits_.naive && prune(truck_bound(route))) return;
    const int count = static_cast<int>(truck_.size());
    auto& seq = routes_[static_cast<std::size_t>(route)];
    if (placed == count) {
      // Remaining routes stay empty.
      start_sorties();
      return;
    }
    for (int i = 0; i < count; ++i) {
      if (used_[static_cast<std::size_t>(i)]) continue;
      used_[static_cast<std::size_t>(i)] = 1;
      seq.push_back(truck_[static_cast<std::size_t>(i)]);
      extend_routes(route, placed + 1);
      seq.pop_back();
      used_[static_cast<std::size_t>(i)] = 0;
    }
    // Close this route. Identical trucks: a later nonempty route must open
    // with a larger customer than this one did.
    if (route + 1 < trucks_ && !seq.empty()) {
      const int first = seq.front();
      for (int i = 0; i < count; ++i) {
        if (used_[static_cast<std::size_t>(i)] || truck_[static_cast<std::size_t>(i)] < first) continue;
        used_[static_cast<std::size_t>(i)] = 1;
        routes_[static_cast<std::size_t>(route) + 1].push_back(truck_[static_cast<std::size_t>(i)]);
        extend_routes(route + 1, placed + 1);
        routes_[static_cast<std::size_t>(route) + 1].pop_back();
        used_[static_cast<std::size_t>(i)] = 0;
      }
    }
  }

  void start_sorties() {
    // Stop locations and driving-only times per route.
    stop_loc_.assign(static_cast<std::size_t>(trucks_), {});
    base_dep_.assign(static_cast<std::size_t>(trucks_), {});
    base_return_.assign(static_cast<std::size_t>(trucks_), 0);
    cover_.assign(static_cast<std::size_t>(trucks_), {});
    for (int r = 0; r < trucks_; ++r) {
      auto& locs = stop_loc_[static_cast<std::size_t>(r)];
      auto& dep = base_dep_[static_cast<std::size_t>(r)];
      locs.push_back(0);
      for (int c : routes_[static_cast<std::size_t>(r)]) locs.push_back(loc(c));
      locs.push_back(0);
      std::int64_t t = 0;
      dep.assign(locs.size(), 0);
      for (std::size_t s = 0; s < locs.size(); ++s) {
        if (s > 0) t += dm_.truck_ticks(locs[s - 1], locs[s]);
        if (s > 0 && s + 1 < locs.size()) t += serv_t_;
        dep[s] = t;
      }
      base_return_[static_cast<std::size_t>(r)] = t;
      cover_[static_cast<std::size_t>(r)].assign(locs.size(), 0);
    }
    placements_.assign(drones_.size(), Placement{});
    sortie_bound_ = truck_bound(trucks_ - 1);
    place_sortie(0, sortie_bound_);
  }

  bool site_allowed(int customer, int location) const {
    if (limits_.pool == nullptr) return true;
    for (int node : limits_.pool->members(customer)) {
      const CandidateNode& cn = limits_.pool->nodes[static_cast<std::size_t>(node)];
      if (cn.role == NodeRole::kCandidateCopy && cn.location == location) return true;
    }
    return false;
  }

  void place_sortie(std::size_t index, double bound) {
    if (index == drones_.size()) {
      leaf();
      return;
    }
    const int c = drones_[index];
    const int cl = loc(c);
    for (int r = 0; r < trucks_; ++r) {
      const auto& locs = stop_loc_[static_cast<std::size_t>(r)];
      auto& cover = cover_[static_cast<std::size_t>(r)];
      const int stops = static_cast<int>(locs.size());
      for (int i = 0; i < stops - 1; ++i) {
        if (!site_allowed(c, locs[static_cast<std::size_t>(i)])) continue;
        for (int k = i + 1; k < stops; ++k) {
          const int li = locs[static_cast<std::size_t>(i)], lk = locs[static_cast<std::size_t>(k)];
          if (config_.loop == LoopPolicy::kForbid && li == lk) continue;
          if (!site_allowed(c, lk)) continue;
          const std::int64_t out = dm_.drone_ticks(li, cl), back = dm_.drone_ticks(cl, lk);
          if (launch_ + retrieve_ + serv_d_ + out + back > endurance_) continue;
          bool crowded = false;
          for (int s = i; s < k && !crowded; ++s) crowded = cover[static_cast<std::size_t>(s)] >= config_.drone_count;
          if (crowded) continue;

          double next = bound;
          if (config_.objective == Objective::kMakespan) {
            const auto& dep = base_dep_[static_cast<std::size_t>(r)];
            const std::int64_t rejoin = dep[static_cast<std::size_t>(i)] + launch_ + out + serv_d_ + back + retrieve_;
            const std::int64_t finish = rejoin + (base_return_[static_cast<std::size_t>(r)] - dep[static_cast<std::size_t>(k)]);
            next = std::max(bound, dm_.from_ticks(finish));
          } else {
            next = bound + config_.cost.drone_per_mile * (dm_.drone_dist(li, cl) + dm_.drone_dist(cl, lk)) +
                   config_.cost.drone_per_min * dm_.from_ticks(out + serv_d_ + back);
          }
          if (prune(next)) continue;

          for (int s = i; s < k; ++s) ++cover[static_cast<std::size_t>(s)];
          placements_[index] = Placement{r, i, k};
          place_sortie(index + 1, next);
          for (int s = i; s < k; ++s) --cover[static_cast<std::size_t>(s)];
        }
      }
    }
  }

  void leaf() {
    ++enumerated_;
    if (limits_.max_plans && enumerated_ > *limits_.max_plans)
      throw OracleRefused(fmt::format("enumeration limit of {} plans exceeded", *limits_.max_plans));
    if (limits_.time_limit && (enumerated_ & 1023) == 0 &&
        std::chrono::duration<double>(Clock::now() - start_).count() > *limits_.time_limit)
      throw OracleRefused(fmt::format("oracle time limit of {} s exceeded", *limits_.time_limit));

    work_.routes.assign(static_cast<std::size_t>(trucks_), {});
    work_.served_by.assign(static_cast<std::size_t>(n_) + 1, ServiceMode::kTruck);
    for (int r = 0; r < trucks_; ++r) {
      TruckRoute& route = work_.routes[static_cast<std::size_t>(r)];
      route.stops.push_back(Stop{0, 0});
      for (int c : routes_[static_cast<std::size_t>(r)]) route.stops.push_back(Stop{loc(c), c});
      route.stops.push_back(Stop{0, 0});
    }
    for (std::size_t d = 0; d < drones_.size(); ++d) {
      const Placement& p = placements_[d];
      work_.routes[static_cast<std::size_t>(p.route)].sorties.push_back(Sortie{p.launch, drones_[d], p.retrieval});
      work_.served_by[static_cast<std::size_t>(drones_[d])] = ServiceMode::kDrone;
    }
    for (TruckRoute& route : work_.routes) {
      std::sort(route.sorties.begin(), route.sorties.end(), [](const Sortie& a, const Sortie& b) {
        return a.launch_stop < b.launch_stop || (a.launch_stop == b.launch_stop && a.customer < b.customer);
      });
    }
    const PenaltyReport& rep = evaluate_plan(work_, dm_, config_, customers_);
    if (!rep.feasible()) return;
    if (!found_ || work_.objective < best_value_) {
      found_ = true;
      best_value_ = work_.objective;
      best_plan_ = work_;
    }
  }

  const DistanceModel& dm_;
  const VariantConfig& config_;
  const CustomerTable& customers_;
  const OracleLimits& limits_;
  int n_;
  int trucks_;
  Clock::time_point start_;
  std::int64_t launch_ = 0, retrieve_ = 0, serv_t_ = 0, serv_d_ = 0, endurance_ = 0;

  std::vector<int> drones_, truck_;
  std::vector<char> used_;
  std::vector<std::vector<int>> routes_;
  std::vector<std::vector<int>> stop_loc_;
  std::vector<std::vector<std::int64_t>> base_dep_;
  std::vector<std::int64_t> base_return_;
  std::vector<std::vector<int>> cover_;
  std::vector<Placement> placements_;
  double sortie_bound_ = 0.0;

  StructuredSolution work_;
  StructuredSolution best_plan_;
  double best_value_ = 0.0;
  bool found_ = false;
  std::int64_t enumerated_ = 0;
};

}  // namespace

OracleResult brute_force(const DistanceModel& dm, const VariantConfig& config, const CustomerTable& customers,
                         const OracleLimits& limits) {
  config.validate();
  const int n = customers.count();
  if (n < 1) throw InputError("instance has no customers");
  const int cap = config.multi_route() ? kOracleMaxCustomersVrpd : kOracleMaxCustomers;
  if (n > cap)
    throw OracleRefused(fmt::format("oracle refuses {} customers; the cap for {} is {}", n, to_string(config.variant), cap));
  if (limits.pool != nullptr && limits.pool->color_count() != n)
    throw ConfigError("candidate pool does not match the customer table");
  Enumerator e(dm, config, customers, limits);
  return e.run();
}

double evaluate_plan_independent(const StructuredSolution& plan, const DistanceModel& dm,
                                 const VariantConfig& config, const CustomerTable& customers) {
  const std::int64_t d_l = dm.to_ticks(config.launch_time);
  const std::int64_t d_r = dm.to_ticks(config.retrieval_time);
  const std::int64_t s_t = dm.to_ticks(config.serv_truck);
  const std::int64_t s_d = dm.to_ticks(config.serv_drone);

  struct Flight {
    std::int64_t takeoff = 0;
    std::int64_t rendezvous = 0;  // drone reaches the retrieval location
    std::int64_t recovery = 0;    // truck and drone both present
  };

  std::int64_t latest = 0;
  double truck_cost = 0.0;
  std::vector<std::vector<Flight>> flights(plan.routes.size());

  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const TruckRoute& route = plan.routes[r];
    if (route.stops.empty()) continue;
    std::multimap<int, std::size_t> launches_at, recoveries_at;
    for (std::size_t f = 0; f < route.sorties.size(); ++f) {
      const Sortie& s = route.sorties[f];
      if (s.launch_stop < 0 || s.retrieval_stop >= static_cast<int>(route.stops.size()) || s.launch_stop >= s.retrieval_stop)
        throw InputError(fmt::format("sortie for customer {} is malformed", s.customer));
      launches_at.emplace(s.launch_stop, f);
      recoveries_at.emplace(s.retrieval_stop, f);
    }
    auto& fl = flights[r];
    fl.assign(route.sorties.size(), Flight{});

    std::int64_t clock = 0;
    std::int64_t leave_depot = 0;
    double miles = 0.0;
    for (std::size_t s = 0; s < route.stops.size(); ++s) {
      const int here = route.stops[s].location;
      if (s > 0) {
        const int prev = route.stops[s - 1].location;
        clock += dm.truck_ticks(prev, here);
        miles += dm.truck_dist(prev, here);
      }
      std::vector<std::pair<std::int64_t, std::size_t>> waiting;
      for (auto [it, end] = recoveries_at.equal_range(static_cast<int>(s)); it != end; ++it)
        waiting.emplace_back(fl[it->second].rendezvous, it->second);
      std::sort(waiting.begin(), waiting.end());
      for (const auto& [when, f] : waiting) {
        clock = std::max(clock, when);
        fl[f].recovery = clock;
        clock += d_r;
      }
      if (route.stops[s].customer != 0) clock += s_t;
      for (auto [it, end] = launches_at.equal_range(static_cast<int>(s)); it != end; ++it) {
        const Sortie& so = route.sorties[it->second];
        const int target = customers.location[static_cast<std::size_t>(so.customer)];
        const int meet = route.stops[static_cast<std::size_t>(so.retrieval_stop)].location;
        clock += d_l;
        fl[it->second].takeoff = clock;
        fl[it->second].rendezvous = clock + dm.drone_ticks(here, target) + s_d + dm.drone_ticks(target, meet);
      }
      if (s == 0) leave_depot = clock;
    }
    latest = std::max(latest, clock);
    truck_cost += config.cost.truck_per_mile * miles + config.cost.truck_per_min * dm.from_ticks(clock - leave_depot);
  }

  if (config.objective == Objective::kMakespan) return dm.from_ticks(latest);

  double total = truck_cost;
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const TruckRoute& route = plan.routes[r];
    for (std::size_t f = 0; f < route.sorties.size(); ++f) {
      const Sortie& so = route.sorties[f];
      const int target = customers.location[static_cast<std::size_t>(so.customer)];
      const int from = route.stops[static_cast<std::size_t>(so.launch_stop)].location;
      const int to = route.stops[static_cast<std::size_t>(so.retrieval_stop)].location;
      total += config.cost.drone_per_mile * (dm.drone_dist(from, target) + dm.drone_dist(target, to)) +
               config.cost.drone_per_min * dm.from_ticks(flights[r][f].recovery - flights[r][f].takeoff);
    }
  }
  return total;
}

}  // namespace sidekick
