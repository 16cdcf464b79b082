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

// .drone files: TSPLIB-style header lines and sections, 1-based node ids,
// integers only, LF line endings.
std::string format_drone(const CandidateGraph& graph);
CandidateGraph parse_drone(std::string_view text);
void write_drone_file(const CandidateGraph& graph, const std::filesystem::path& path);
CandidateGraph parse_drone_file(const std::filesystem::path& path);

struct ParSettings {
  std::string problem_file;
  std::optional<double> time_limit;  // seconds
  std::optional<std::uint64_t> seed;
  std::string output_tour_file;
  std::optional<int> config;  // 1 or 2
  std::optional<int> runs;
  // Unrecognized keys, kept in file order.
  std::vector<std::pair<std::string, std::string>> extra;

  bool operator==(const ParSettings&) const = default;
};

struct ParParse {
  ParSettings settings;
  std::vector<std::string> warnings;
};

std::string format_par(const ParSettings& settings);
ParParse parse_par(std::string_view text);
void write_par_file(const ParSettings& settings, const std::filesystem::path& path);
ParParse parse_par_file(const std::filesystem::path& path);

/// Objective text used in .outtour file names: makespans with the decimals
/// implied by the scale (trailing zeros trimmed), costs with 6 significant
/// digits.
std::string objective_stem(double objective, Objective kind, int scale);

struct OutTour {
  GiantTour tour;
  std::string objective_text;
  double objective = 0.0;
  std::string instance;
};

std::string format_outtour(const GiantTour& tour);
/// Writes "<objective>_<instance>.outtour" into `directory`; returns the path.
std::filesystem::path write_outtour(const GiantTour& tour, double objective, Objective kind, int scale,
                                    std::string_view instance, const std::filesystem::path& directory);
OutTour read_outtour(const std::filesystem::path& path);
GiantTour parse_outtour(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sidekick
