#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sidekick/candgen.hpp"
#include "sidekick/model.hpp"
#include "sidekick/solution.hpp"

namespace sidekick {

// Poikonen TSP-D coordinate files: optional count/header lines, then one
// "x y" or "id x y" row per location, depot first. '#' and /* */ comments
// are ignored. All customers are drone-eligible.
Instance parse_poikonen(std::string_view text, std::string name);
Instance load_poikonen(const std::filesystem::path& path);
std::string format_poikonen(const Instance& instance);

// Sacramento VRP-D files: "x y demand" or "id x y demand" rows, depot first;
// "key: value" header lines are skipped. Eligible iff demand <= payload.
Instance parse_sacramento(std::string_view text, std::string name, double payload);
Instance load_sacramento(const std::filesystem::path& path, double payload = 5.0);
std::string format_sacramento(const Instance& instance);

/// Murray instance directory: nodes.csv plus tau.csv (truck) and
/// tauprime.csv (drone) travel times in seconds, including the trailing
/// depot-return copy which is dropped.
struct MurrayInstance {
  Instance instance;
  std::vector<double> truck_minutes;  // (n+1)^2, row-major
  std::vector<double> drone_minutes;

  DistanceModel distances(const VariantConfig& config, int scale) const;
};

MurrayInstance load_murray(const std::filesystem::path& directory);

struct ClosureReport {
  bool pass = false;
  std::string claimed_text;
  std::optional<double> claimed;
  double recomputed = 0.0;
  StructuredSolution plan;
  std::vector<std::string> violations;  // violation names with counts
  std::string message;
};

/// Re-reads the tour, decodes it against the graph, re-evaluates the plan and
/// compares with the objective in the file name (half a unit of its last
/// printed digit). Travel data and customer attributes come from `dm` and
/// `customers` when given, otherwise from the graph's integer data.
ClosureReport validate(const std::filesystem::path& outtour, const std::filesystem::path& drone,
                       const VariantConfig& config, int scale, const DistanceModel* dm = nullptr,
                       const CustomerTable* customers = nullptr);

/// SVG 1.1 map: depot square, customer circles, one solid polyline per used
/// truck and a dashed two-leg path per sortie colored by drone slot.
std::string render_svg(const StructuredSolution& plan, const Instance& instance);
void render_svg(const StructuredSolution& plan, const Instance& instance, const std::filesystem::path& path);

/// Drone slot of each sortie of a route: the lowest slot whose previous
/// sortie was retrieved at or before the launch stop.
std::vector<int> drone_slots(const TruckRoute& route);

/// 100 * (reference - ours) / reference; positive means ours is better.
double gap_percent(double reference, double ours);

struct BenchmarkRecord {
  std::string instance;
  Variant variant = Variant::kFstsp;
  double objective = 0.0;
  std::string objective_text;
  int dcus = 0;
  int drones = 0;
  int routes = 0;
  std::int64_t iteration_found = 0;
  double wall_time = 0.0;
  std::vector<std::pair<std::string, double>> gaps;  // reference column -> gap%
};

/// Reference values transcribed from published tables: CSV with a header and
/// an `instance` first column. Blank or non-numeric cells read as absent.
class ReferenceTable {
 public:
  static ReferenceTable parse(std::string_view text);
  static ReferenceTable load(const std::filesystem::path& path);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& instances() const { return instances_; }
  bool has_column(std::string_view column) const;
  std::optional<double> value(std::string_view instance, std::string_view column) const;
  std::string text(std::string_view instance, std::string_view column) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> instances_;
  std::vector<std::vector<std::string>> cells_;
};

/// Fills record.gaps for each listed reference column present for the instance.
void attach_gaps(BenchmarkRecord& record, const ReferenceTable& table, const std::vector<std::string>& columns);

std::string gap_table_header(const std::vector<std::string>& columns, bool timing_columns);
std::string gap_table_row(const BenchmarkRecord& record, const std::vector<std::string>& columns,
                          bool timing_columns);
/// Average of each gap column over the records having it.
std::vector<std::optional<double>> average_gaps(const std::vector<BenchmarkRecord>& records,
                                                const std::vector<std::string>& columns);

}  // namespace sidekick
