#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sidekick/candgen.hpp"
#include "sidekick/eval.hpp"
#include "sidekick/model.hpp"
#include "sidekick/solution.hpp"

namespace sidekick {

enum class MoveKind : unsigned {
  kTwoOpt = 1u << 0,
  kOrOpt = 1u << 1,
  kRelocate = 1u << 2,
  kSwap = 1u << 3,
  kMarkerRetarget = 1u << 4,
};
inline constexpr unsigned kAllMoves = 0x1f;

std::string_view to_string(MoveKind kind);

struct SearchSettings {
  double time_limit = 10.0;  // seconds
  std::uint64_t seed = 1;
  std::optional<std::int64_t> max_iterations;  // kicks
  // Stop after this many kicks without a new best (0 = never).
  std::int64_t stall_limit = 0;
  int kick_strength = 1;
  unsigned move_set = kAllMoves;
  bool record_trace = false;
  int neighbor_count = 10;  // candidate list size for tour moves

  void validate() const;
};

struct TracePoint {
  std::int64_t iteration = 0;
  double total_penalty = 0.0;
};

struct SearchResult {
  GiantTour best_tour;
  StructuredSolution best_solution;
  PenaltyReport best_penalty;
  std::int64_t iteration_found = 0;
  std::int64_t iterations = 0;
  std::int64_t evaluations = 0;
  double wall_time = 0.0;
  std::vector<TracePoint> trace;
};

/// A move on a giant tour. Position 0 (node 0) never moves.
struct Move {
  MoveKind kind = MoveKind::kTwoOpt;
  int i = 0;
  int j = 0;
  int len = 1;
  bool reversed = false;
  // marker-retarget
  int color = 0;
  int launch = -1;     // copy used as launch marker, -1 = truck service
  int retrieval = -1;  // copy used as retrieval marker, -1 = depot return
  int gap = 0;         // reduced-tour nodes between the customer and the retrieval marker

  /// Applies the move in place. For marker-retarget the previous tour is kept
  /// in `saved` so undo can restore it.
  void apply(std::vector<int>& tour, const CandidateGraph& graph);
  void undo(std::vector<int>& tour, const CandidateGraph& graph);
  std::vector<int> saved;
};

/// Nearest-neighbor all-truck start, ghosts parked after their customer.
GiantTour initial_tour(const CandidateGraph& graph, const VariantConfig& config, const CustomerTable& customers);

SearchResult solve(const CandidateGraph& graph, const DistanceModel& dm, const VariantConfig& config,
                   const CustomerTable& customers, const SearchSettings& settings);

struct BatchItem {
  std::string name;
  CandidateGraph graph;
  DistanceModel dm;
  CustomerTable customers;
  VariantConfig config;
};

struct BatchRow {
  std::string instance;
  Variant variant = Variant::kFstsp;
  double objective = 0.0;
  std::string objective_text;
  bool feasible = false;
  int dcus = 0;
  int drones = 0;
  int routes = 0;
  std::int64_t iteration_found = 0;
  double wall_time = 0.0;
  std::filesystem::path tour_file;
};

struct BatchOptions {
  int parallelism = 1;
  bool timing_columns = true;  // off for byte-reproducible tables
  int scale = 10;
};

std::string batch_csv_header(bool timing_columns);
std::string batch_csv_row(const BatchRow& row, bool timing_columns);

/// One solve per item with seed = settings.seed + index; writes an .outtour per
/// item into out_dir (when non-empty) and returns rows in item order.
std::vector<BatchRow> run_batch(const std::vector<BatchItem>& items, const SearchSettings& settings,
                                const std::filesystem::path& out_dir, const BatchOptions& options);

}  // namespace sidekick
