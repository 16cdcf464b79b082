#include "sidekick/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace sidekick {

InputError::InputError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, what) : what), line_(line) {}

int Instance::drone_eligible_count() const {
  return static_cast<int>(std::count_if(customers.begin(), customers.end(), [](const Customer& c) {
    return c.drone_eligible && !c.truck_only;
  }));
}

void Instance::check() const {
  if (locations.empty()) throw InputError("instance has no depot");
  if (customers.empty()) throw InputError("instance has no customers");
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const Location& loc = locations[i];
    if (loc.id != static_cast<int>(i)) throw InputError(fmt::format("location ids not dense at {}", i));
    if (!std::isfinite(loc.x) || !std::isfinite(loc.y))
      throw InputError(fmt::format("non-finite coordinate for location {}", loc.id));
  }
  if (static_cast<int>(locations.size()) < customer_count() + 1)
    throw InputError("fewer locations than customers");
  for (int c = 1; c <= customer_count(); ++c) {
    if (customer(c).location != c) throw InputError(fmt::format("customer {} not at location {}", c, c));
  }
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kFstsp: return "fstsp";
    case Variant::kTspMd: return "tsp-md";
    case Variant::kVrpd11: return "vrpd-11";
    case Variant::kVrpd1m: return "vrpd-1m";
  }
  return "?";
}

std::string_view to_string(Objective o) { return o == Objective::kMakespan ? "makespan" : "cost"; }

Variant parse_variant(std::string_view text) {
  if (text == "fstsp") return Variant::kFstsp;
  if (text == "tsp-md" || text == "tspmd") return Variant::kTspMd;
  if (text == "vrpd-11" || text == "vrpd") return Variant::kVrpd11;
  if (text == "vrpd-1m") return Variant::kVrpd1m;
  throw ConfigError(fmt::format("unknown variant '{}'", text));
}

Objective parse_objective(std::string_view text) {
  if (text == "makespan") return Objective::kMakespan;
  if (text == "cost") return Objective::kCost;
  throw ConfigError(fmt::format("unknown objective '{}'", text));
}

VariantConfig VariantConfig::fstsp() { return VariantConfig{}; }

VariantConfig VariantConfig::tsp_md(int drones) {
  VariantConfig c;
  c.variant = Variant::kTspMd;
  c.drone_count = drones;
  return c;
}

VariantConfig VariantConfig::vrpd_sacramento(int trucks) {
  VariantConfig c;
  c.variant = Variant::kVrpd11;
  c.objective = Objective::kCost;
  c.truck_count = trucks;
  c.endurance = 30.0;
  c.launch_time = 1.0;
  c.retrieval_time = 1.0;
  c.serv_truck = 2.0;
  c.serv_drone = 1.0;
  c.truck_capacity = 1300.0;
  c.drone_payload = 5.0;
  c.max_route_duration = 8.0 * 60.0;
  // Fuel price 1.13 EUR/L at 0.07 L/km and 1.61 km/mile; drones at 10%.
  c.cost.truck_per_mile = 0.127351;
  c.cost.drone_per_mile = 0.0127351;
  return c;
}

VariantConfig VariantConfig::murray(double endurance_minutes) {
  VariantConfig c;
  c.endurance = endurance_minutes;
  c.launch_time = 1.0;
  c.retrieval_time = 1.0;
  return c;
}

void VariantConfig::validate() const {
  if (!(truck_speed > 0.0) || !(drone_speed > 0.0)) throw ConfigError("speeds must be positive");
  if (!(time_factor > 0.0)) throw ConfigError("time factor must be positive");
  if (drone_count < 1) throw ConfigError("drone count must be at least 1");
  if (truck_count < 1) throw ConfigError("truck count must be at least 1");
  switch (variant) {
    case Variant::kFstsp:
      if (drone_count != 1 || truck_count != 1) throw ConfigError("FSTSP requires one truck and one drone");
      break;
    case Variant::kTspMd:
      if (truck_count != 1) throw ConfigError("TSP-mD requires a single truck");
      break;
    case Variant::kVrpd11:
      if (drone_count != 1) throw ConfigError("1-1 VRP-D pairs each truck with exactly one drone");
      break;
    case Variant::kVrpd1m: break;
  }
  if (non_customer_lr && !(waypoint_spacing > 0.0))
    throw ConfigError("non-customer L/R points need a positive waypoint spacing");
  for (double v : {launch_time, retrieval_time, serv_truck, serv_drone}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("handling and service times must be finite and >= 0");
  }
}

std::int64_t DistanceModel::round_half_up(double value, int scale) {
  return static_cast<std::int64_t>(std::floor(value * scale + 0.5));
}

DistanceModel DistanceModel::euclidean(const Instance& instance, const VariantConfig& config, int scale) {
  if (scale < 1) throw ConfigError("scale must be >= 1");
  if (!(config.truck_speed > 0.0) || !(config.drone_speed > 0.0)) throw ConfigError("speeds must be positive");
  instance.check();
  DistanceModel dm;
  dm.mode_ = DistanceMode::kEuclidean;
  dm.size_ = instance.location_count();
  dm.scale_ = scale;
  const auto n = static_cast<std::size_t>(dm.size_);
  dm.truck_mi_.assign(n * n, 0.0);
  for (int i = 0; i < dm.size_; ++i) {
    for (int j = 0; j < dm.size_; ++j) {
      const Location& a = instance.locations[static_cast<std::size_t>(i)];
      const Location& b = instance.locations[static_cast<std::size_t>(j)];
      dm.truck_mi_[dm.at(i, j)] = i == j ? 0.0 : std::hypot(a.x - b.x, a.y - b.y);
    }
  }
  dm.drone_mi_ = dm.truck_mi_;
  dm.truck_min_.resize(n * n);
  dm.drone_min_.resize(n * n);
  for (std::size_t e = 0; e < n * n; ++e) {
    dm.truck_min_[e] = dm.truck_mi_[e] / config.truck_speed * config.time_factor;
    dm.drone_min_[e] = dm.drone_mi_[e] / config.drone_speed * config.time_factor;
  }
  dm.fill_ticks();
  return dm;
}

DistanceModel DistanceModel::from_times(int size, std::vector<double> truck_minutes,
                                        std::vector<double> drone_minutes, const VariantConfig& config,
                                        int scale) {
  if (scale < 1) throw ConfigError("scale must be >= 1");
  const auto n = static_cast<std::size_t>(size);
  if (size < 1 || truck_minutes.size() != n * n || drone_minutes.size() != n * n)
    throw InputError("explicit matrices must be square and match the location count");
  DistanceModel dm;
  dm.mode_ = DistanceMode::kExplicit;
  dm.size_ = size;
  dm.scale_ = scale;
  dm.truck_min_ = std::move(truck_minutes);
  dm.drone_min_ = std::move(drone_minutes);
  for (int i = 0; i < size; ++i) {
    dm.truck_min_[dm.at(i, i)] = 0.0;
    dm.drone_min_[dm.at(i, i)] = 0.0;
  }
  dm.truck_mi_.resize(n * n);
  dm.drone_mi_.resize(n * n);
  for (std::size_t e = 0; e < n * n; ++e) {
    dm.truck_mi_[e] = dm.truck_min_[e] * config.truck_speed / config.time_factor;
    dm.drone_mi_[e] = dm.drone_min_[e] * config.drone_speed / config.time_factor;
  }
  dm.fill_ticks();
  return dm;
}

void DistanceModel::fill_ticks() {
  const std::size_t count = truck_min_.size();
  truck_ticks_.resize(count);
  drone_ticks_.resize(count);
  dist_ticks_.resize(count);
  auto ticks = [this](double v) { return std::isfinite(v) ? round_half_up(v, scale_) : kUnknownTicks; };
  for (std::size_t e = 0; e < count; ++e) {
    truck_ticks_[e] = ticks(truck_min_[e]);
    drone_ticks_[e] = ticks(drone_min_[e]);
    dist_ticks_[e] = ticks(truck_mi_[e]);
  }
}

DistanceModel build_distance_model(const Instance& instance, const VariantConfig& config, int scale) {
  return DistanceModel::euclidean(instance, config, scale);
}

Instance with_grid_waypoints(const Instance& instance, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("waypoint spacing must be positive");
  Instance out = instance;
  double min_x = instance.locations.front().x, max_x = min_x;
  double min_y = instance.locations.front().y, max_y = min_y;
  for (const Location& l : instance.locations) {
    min_x = std::min(min_x, l.x);
    max_x = std::max(max_x, l.x);
    min_y = std::min(min_y, l.y);
    max_y = std::max(max_y, l.y);
  }
  const int nx = static_cast<int>(std::floor((max_x - min_x) / spacing + 1e-9));
  const int ny = static_cast<int>(std::floor((max_y - min_y) / spacing + 1e-9));
  for (int iy = 0; iy <= ny; ++iy) {
    for (int ix = 0; ix <= nx; ++ix) {
      const double x = min_x + ix * spacing;
      const double y = min_y + iy * spacing;
      const bool taken = std::any_of(out.locations.begin(), out.locations.end(),
                                     [&](const Location& l) { return l.x == x && l.y == y; });
      if (!taken) out.locations.push_back(Location{static_cast<int>(out.locations.size()), x, y});
    }
  }
  return out;
}

CustomerTable customer_table(const Instance& instance, const VariantConfig& config) {
  CustomerTable t;
  const int n = instance.customer_count();
  t.location.assign(static_cast<std::size_t>(n) + 1, 0);
  t.demand.assign(static_cast<std::size_t>(n) + 1, 0.0);
  t.eligible.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int c = 1; c <= n; ++c) {
    const Customer& cu = instance.customer(c);
    const auto i = static_cast<std::size_t>(c);
    t.location[i] = cu.location;
    t.demand[i] = cu.demand.value_or(0.0);
    t.eligible[i] = cu.drone_eligible && !cu.truck_only && t.demand[i] <= config.drone_payload;
  }
  return t;
}

}  // namespace sidekick
