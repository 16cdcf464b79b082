#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sidekick {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Malformed input data (instance files, interchange files). Carries the
/// 1-based line number when the problem is tied to a specific line.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

/// Inconsistent or unsupported solver configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Location {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct Customer {
  int location = 0;
  std::optional<double> demand;
  bool drone_eligible = true;
  // Marked heavy by the source file, regardless of payload.
  bool truck_only = false;
};

/// Physical problem. Location ids are dense: 0 is the depot, 1..n are the
/// customers (customer c lives at location c), n+1.. are non-customer
/// waypoints usable only as launch/retrieval sites.
struct Instance {
  std::string name;
  std::vector<Location> locations;
  std::vector<Customer> customers;  // customers[c-1] is customer c
  std::string area_tag;

  const Location& depot() const { return locations.front(); }
  int customer_count() const { return static_cast<int>(customers.size()); }
  int location_count() const { return static_cast<int>(locations.size()); }
  int waypoint_count() const { return location_count() - customer_count() - 1; }
  const Customer& customer(int c) const { return customers.at(static_cast<std::size_t>(c - 1)); }
  int drone_eligible_count() const;

  /// Throws InputError if ids are not dense or a coordinate is not finite.
  void check() const;
};

enum class Variant { kFstsp, kTspMd, kVrpd11, kVrpd1m };
enum class Objective { kMakespan, kCost };
enum class RevisitPolicy { kNoRevisit, kRevisitOk };
enum class LoopPolicy { kForbid, kAllow };

std::string_view to_string(Variant v);
std::string_view to_string(Objective o);
Variant parse_variant(std::string_view text);
Objective parse_objective(std::string_view text);

struct CostCoefficients {
  double truck_per_mile = 0.0;
  double truck_per_min = 0.0;
  double drone_per_mile = 0.0;
  double drone_per_min = 0.0;
};

struct VariantConfig {
  Variant variant = Variant::kFstsp;
  Objective objective = Objective::kMakespan;
  double truck_speed = 35.0;  // distance units per hour
  double drone_speed = 50.0;
  // Minutes per (distance unit / speed unit); 60 turns mph into minutes.
  double time_factor = 60.0;
  int drone_count = 1;  // per truck
  int truck_count = 1;
  double endurance = kUnbounded;  // minutes
  double launch_time = 0.0;
  double retrieval_time = 0.0;
  double serv_truck = 0.0;
  double serv_drone = 0.0;
  double truck_capacity = kUnbounded;  // kg
  double drone_payload = kUnbounded;   // kg
  double max_route_duration = kUnbounded;  // minutes
  CostCoefficients cost;
  RevisitPolicy revisit = RevisitPolicy::kNoRevisit;
  LoopPolicy loop = LoopPolicy::kForbid;
  bool non_customer_lr = false;
  double waypoint_spacing = 0.0;  // grid spacing when non_customer_lr is set

  /// Poikonen Set 4 min-makespan setting: unbounded endurance, no handling
  /// or service times, speed ratio 50/35.
  static VariantConfig fstsp();
  static VariantConfig tsp_md(int drones);
  /// Sacramento Set 6 1-1 VRP-D parameters.
  static VariantConfig vrpd_sacramento(int trucks);
  /// Murray Set 1 FSTSP with endurance and 1 minute launch/retrieval.
  static VariantConfig murray(double endurance_minutes);

  bool multi_route() const { return variant == Variant::kVrpd11 || variant == Variant::kVrpd1m; }

  /// Throws ConfigError when fleet sizes contradict the variant or speeds
  /// are not positive.
  void validate() const;
};

enum class DistanceMode { kEuclidean, kExplicit };

/// Travel data between physical locations. Times are kept both in exact
/// minutes and as fixed-point integer ticks (minutes * scale, rounded half
/// up); the search and schedule simulation run on ticks, cost recomputation
/// uses the exact values. Immutable after construction.
class DistanceModel {
 public:
  static constexpr std::int64_t kUnknownTicks = std::int64_t{1} << 40;

  DistanceModel() = default;

  /// Euclidean distances; d = d' and travel time = d / speed * time_factor.
  static DistanceModel euclidean(const Instance& instance, const VariantConfig& config, int scale);

  /// Explicit time matrices in minutes (row-major size x size). Entries that
  /// are NaN are unknown and map to kUnknownTicks. Distances are derived
  /// from times at the configured speeds.
  static DistanceModel from_times(int size, std::vector<double> truck_minutes,
                                  std::vector<double> drone_minutes, const VariantConfig& config,
                                  int scale);

  DistanceMode mode() const { return mode_; }
  int size() const { return size_; }
  int scale() const { return scale_; }

  double truck_time(int i, int j) const { return truck_min_[at(i, j)]; }
  double drone_time(int i, int j) const { return drone_min_[at(i, j)]; }
  double truck_dist(int i, int j) const { return truck_mi_[at(i, j)]; }
  double drone_dist(int i, int j) const { return drone_mi_[at(i, j)]; }
  std::int64_t truck_ticks(int i, int j) const { return truck_ticks_[at(i, j)]; }
  std::int64_t drone_ticks(int i, int j) const { return drone_ticks_[at(i, j)]; }
  std::int64_t scaled_dist(int i, int j) const { return dist_ticks_[at(i, j)]; }

  std::int64_t to_ticks(double minutes) const { return round_half_up(minutes, scale_); }
  double from_ticks(std::int64_t ticks) const { return static_cast<double>(ticks) / scale_; }

  static std::int64_t round_half_up(double value, int scale);

 private:
  std::size_t at(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(size_) + static_cast<std::size_t>(j);
  }
  void fill_ticks();

  DistanceMode mode_ = DistanceMode::kEuclidean;
  int size_ = 0;
  int scale_ = 1;
  std::vector<double> truck_min_, drone_min_, truck_mi_, drone_mi_;
  std::vector<std::int64_t> truck_ticks_, drone_ticks_, dist_ticks_;
};

DistanceModel build_distance_model(const Instance& instance, const VariantConfig& config, int scale);

/// Returns a copy of the instance with a uniform grid of waypoints over the
/// bounding box of all locations (grid points coinciding with an existing
/// location are skipped).
Instance with_grid_waypoints(const Instance& instance, double spacing);

/// Per-customer data the evaluator needs, independent of where it came from
/// (an Instance or a parsed .drone file).
struct CustomerTable {
  std::vector<int> location;  // index c (0 unused)
  std::vector<double> demand;
  std::vector<char> eligible;

  int count() const { return static_cast<int>(location.size()) - 1; }
};

CustomerTable customer_table(const Instance& instance, const VariantConfig& config);

}  // namespace sidekick
