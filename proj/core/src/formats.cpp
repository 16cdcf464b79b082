#include "sidekick/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace sidekick {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::int64_t parse_int(std::string_view token, int line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw InputError(fmt::format("non-integer token '{}'", token), line);
  return v;
}

bool starts_keyword(std::string_view line) {
  line = trim(line);
  return !line.empty() && ((line.front() >= 'A' && line.front() <= 'Z') || (line.front() >= 'a' && line.front() <= 'z'));
}

// Token stream over the data lines following a section keyword.
class SectionReader {
 public:
  SectionReader(const std::vector<std::string_view>& lines, std::size_t& cursor) : lines_(lines), cursor_(cursor) {}

  bool next(std::string_view& token, int& line) {
    while (pos_ >= tokens_.size()) {
      if (cursor_ >= lines_.size() || starts_keyword(lines_[cursor_])) return false;
      tokens_ = split_ws(lines_[cursor_]);
      line_ = static_cast<int>(cursor_) + 1;
      pos_ = 0;
      ++cursor_;
    }
    token = tokens_[pos_++];
    line = line_;
    return true;
  }
  std::int64_t need_int(std::string_view what) {
    std::string_view token;
    int line = 0;
    if (!next(token, line)) throw InputError(fmt::format("truncated {}", what), static_cast<int>(cursor_) + 1);
    last_line_ = line;
    return parse_int(token, line);
  }
  int line() const { return last_line_; }

 private:
  const std::vector<std::string_view>& lines_;
  std::size_t& cursor_;
  std::vector<std::string_view> tokens_;
  std::size_t pos_ = 0;
  int line_ = 0;
  int last_line_ = 0;
};

}  // namespace

std::string format_drone(const CandidateGraph& graph) {
  const int n = graph.size();
  std::string out;
  out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * 4 + 256);
  auto it = std::back_inserter(out);
  fmt::format_to(it, "DIMENSION: {}\n", n);
  if (graph.capacity_line) fmt::format_to(it, "CAPACITY: {}\n", graph.drone_count);
  if (graph.vehicles_line) fmt::format_to(it, "VEHICLES: {}\n", graph.truck_count);
  out += "EDGE_WEIGHT_SECTION\n";
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (b > 0) out += ' ';
      fmt::format_to(it, "{}", graph.distance(a, b));
    }
    out += '\n';
  }
  out += "CTSP_SET_SECTION\n";
  for (int c = 0; c <= graph.color_count(); ++c) {
    fmt::format_to(it, "{}", c);
    for (int node : graph.members(c)) fmt::format_to(it, " {}", node + 1);
    out += " -1\n";
  }
  out += "SERVICE_TIME_SECTION\n";
  for (int a = 0; a < n; ++a) fmt::format_to(it, "{} {}\n", a + 1, graph.service_times[static_cast<std::size_t>(a)]);
  out += "DRAFT_LIMIT_SECTION\n";
  for (int a = 0; a < n; ++a) fmt::format_to(it, "{} {}\n", a + 1, graph.nodes[static_cast<std::size_t>(a)].location);
  out += "EOF\n";
  return out;
}

CandidateGraph parse_drone(std::string_view text) {
  const std::vector<std::string_view> lines = split_lines(text);
  CandidateGraph g;
  int dimension = -1;
  std::vector<int> color, location;
  std::vector<char> have_service, have_draft, have_color;
  bool seen_edges = false, seen_sets = false, seen_service = false, seen_draft = false;
  std::vector<std::pair<int, int>> set_order;  // (color, node) in file order

  auto need_dimension = [&](int line) {
    if (dimension < 0) throw InputError("section before DIMENSION", line);
  };

  std::size_t cursor = 0;
  while (cursor < lines.size()) {
    const int line_no = static_cast<int>(cursor) + 1;
    const std::string_view line = trim(lines[cursor]);
    ++cursor;
    if (line.empty()) continue;
    const auto colon = line.find(':');
    const std::string_view key = trim(colon == std::string_view::npos ? line : line.substr(0, colon));
    const std::string_view value = colon == std::string_view::npos ? std::string_view{} : trim(line.substr(colon + 1));

    if (key == "EOF") break;
    if (key == "NAME" || key == "TYPE" || key == "COMMENT") continue;
    if (key == "DIMENSION" || key == "CAPACITY" || key == "VEHICLES") {
      if (colon == std::string_view::npos) throw InputError(fmt::format("{} needs a value", key), line_no);
      const std::int64_t v = parse_int(value, line_no);
      if (v < 1) throw InputError(fmt::format("{} must be positive", key), line_no);
      if (key == "DIMENSION") {
        if (dimension >= 0) throw InputError("duplicate DIMENSION", line_no);
        dimension = static_cast<int>(v);
        const auto d = static_cast<std::size_t>(dimension);
        color.assign(d, -1);
        location.assign(d, -1);
        have_service.assign(d, 0);
        have_draft.assign(d, 0);
        have_color.assign(d, 0);
        g.distances.assign(d * d, 0);
        g.service_times.assign(d, 0);
      } else if (key == "CAPACITY") {
        g.capacity_line = true;
        g.drone_count = static_cast<int>(v);
      } else {
        g.vehicles_line = true;
        g.truck_count = static_cast<int>(v);
      }
      continue;
    }
    if (colon != std::string_view::npos) throw InputError(fmt::format("unknown keyword '{}'", key), line_no);

    SectionReader reader(lines, cursor);
    if (key == "EDGE_WEIGHT_SECTION") {
      need_dimension(line_no);
      if (seen_edges) throw InputError("duplicate EDGE_WEIGHT_SECTION", line_no);
      seen_edges = true;
      for (auto& w : g.distances) {
        w = reader.need_int("EDGE_WEIGHT_SECTION");
        if (w < 0) throw InputError("negative edge weight", reader.line());
      }
      std::string_view extra;
      int el = 0;
      if (reader.next(extra, el)) throw InputError(fmt::format("unexpected token '{}' in EDGE_WEIGHT_SECTION", extra), el);
    } else if (key == "CTSP_SET_SECTION") {
      need_dimension(line_no);
      if (seen_sets) throw InputError("duplicate CTSP_SET_SECTION", line_no);
      seen_sets = true;
      std::string_view token;
      int tl = 0;
      while (reader.next(token, tl)) {
        const std::int64_t c = parse_int(token, tl);
        if (c < 0 || c > dimension) throw InputError(fmt::format("color {} out of range", c), tl);
        for (;;) {
          const std::int64_t node = reader.need_int("CTSP_SET_SECTION");
          if (node == -1) break;
          if (node < 1 || node > dimension) throw InputError(fmt::format("node {} out of range", node), reader.line());
          const auto i = static_cast<std::size_t>(node - 1);
          if (have_color[i]) throw InputError(fmt::format("node {} listed in two sets", node), reader.line());
          have_color[i] = 1;
          color[i] = static_cast<int>(c);
          set_order.emplace_back(static_cast<int>(c), static_cast<int>(node - 1));
        }
      }
    } else if (key == "SERVICE_TIME_SECTION" || key == "DRAFT_LIMIT_SECTION") {
      need_dimension(line_no);
      const bool service = key == "SERVICE_TIME_SECTION";
      bool& seen = service ? seen_service : seen_draft;
      if (seen) throw InputError(fmt::format("duplicate {}", key), line_no);
      seen = true;
      std::vector<char>& have = service ? have_service : have_draft;
      for (int i = 0; i < dimension; ++i) {
        const std::int64_t node = reader.need_int(key);
        const int nl = reader.line();
        const std::int64_t v = reader.need_int(key);
        if (node < 1 || node > dimension) throw InputError(fmt::format("node {} out of range", node), nl);
        const auto idx = static_cast<std::size_t>(node - 1);
        if (have[idx]) throw InputError(fmt::format("node {} listed twice", node), nl);
        if (v < 0) throw InputError("negative value", nl);
        have[idx] = 1;
        if (service) g.service_times[idx] = v;
        else location[idx] = static_cast<int>(v);
      }
      std::string_view extra;
      int el = 0;
      if (reader.next(extra, el)) throw InputError(fmt::format("unexpected token '{}' in {}", extra, key), el);
    } else {
      throw InputError(fmt::format("unknown keyword '{}'", key), line_no);
    }
  }

  if (dimension < 0) throw InputError("missing DIMENSION");
  if (!seen_edges) throw InputError("missing EDGE_WEIGHT_SECTION");
  if (!seen_sets) throw InputError("missing CTSP_SET_SECTION");
  if (!seen_service) throw InputError("missing SERVICE_TIME_SECTION");
  if (!seen_draft) throw InputError("missing DRAFT_LIMIT_SECTION");
  for (int i = 0; i < dimension; ++i) {
    if (!have_color[static_cast<std::size_t>(i)]) throw InputError(fmt::format("node {} has no color", i + 1));
  }

  g.nodes.resize(static_cast<std::size_t>(dimension));
  for (int i = 0; i < dimension; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    CandidateNode& node = g.nodes[idx];
    node.node_id = i;
    node.color = color[idx];
    node.location = location[idx];
    if (node.color == 0) node.role = NodeRole::kDepot;
    else if (node.location == node.color) node.role = NodeRole::kCustomerSelf;
    else node.role = NodeRole::kCandidateCopy;
  }
  g.index();
  // Member order is part of the file; keep the writer's convention.
  for (int c = 0; c <= g.color_count(); ++c) {
    std::size_t expected = 0;
    for (const auto& [sc, node] : set_order) {
      if (sc != c) continue;
      if (g.members(c)[expected] != node)
        throw InputError(fmt::format("set {} must list the customer first and copies in node order", c));
      ++expected;
    }
  }
  return g;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError(fmt::format("write failed for {}", path.string()));
}

void write_drone_file(const CandidateGraph& graph, const std::filesystem::path& path) {
  write_text_file(path, format_drone(graph));
}

CandidateGraph parse_drone_file(const std::filesystem::path& path) { return parse_drone(read_text_file(path)); }

std::string format_par(const ParSettings& s) {
  std::string out;
  auto it = std::back_inserter(out);
  fmt::format_to(it, "PROBLEM_FILE: {}\n", s.problem_file);
  if (s.time_limit) fmt::format_to(it, "TIME_LIMIT: {}\n", *s.time_limit);
  if (s.seed) fmt::format_to(it, "SEED: {}\n", *s.seed);
  if (!s.output_tour_file.empty()) fmt::format_to(it, "OUTPUT_TOUR_FILE: {}\n", s.output_tour_file);
  if (s.config) fmt::format_to(it, "CONFIG: {}\n", *s.config);
  if (s.runs) fmt::format_to(it, "RUNS: {}\n", *s.runs);
  for (const auto& [k, v] : s.extra) fmt::format_to(it, "{}: {}\n", k, v);
  return out;
}

ParParse parse_par(std::string_view text) {
  ParParse result;
  ParSettings& s = result.settings;
  bool have_problem = false;
  std::vector<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto sep = line.find(':');
    if (sep == std::string_view::npos) sep = line.find('=');
    if (sep == std::string_view::npos) throw InputError(fmt::format("expected 'KEY: value', got '{}'", line), line_no);
    const std::string key(trim(line.substr(0, sep)));
    const std::string value(trim(line.substr(sep + 1)));
    if (key.empty()) throw InputError("empty key", line_no);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      result.warnings.push_back(fmt::format("line {}: duplicate key {}, last value wins", line_no, key));
    } else {
      seen.push_back(key);
    }
    if (key == "PROBLEM_FILE") {
      s.problem_file = value;
      have_problem = true;
    } else if (key == "TIME_LIMIT") {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size() || !(v > 0.0) || !std::isfinite(v))
        throw InputError(fmt::format("TIME_LIMIT must be a positive number, got '{}'", value), line_no);
      s.time_limit = v;
    } else if (key == "SEED") {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size())
        throw InputError(fmt::format("SEED must be a non-negative integer, got '{}'", value), line_no);
      s.seed = v;
    } else if (key == "OUTPUT_TOUR_FILE") {
      s.output_tour_file = value;
    } else if (key == "CONFIG") {
      const std::int64_t v = parse_int(value, line_no);
      if (v != 1 && v != 2) throw InputError("CONFIG must be 1 or 2", line_no);
      s.config = static_cast<int>(v);
    } else if (key == "RUNS") {
      const std::int64_t v = parse_int(value, line_no);
      if (v < 1) throw InputError("RUNS must be positive", line_no);
      s.runs = static_cast<int>(v);
    } else {
      auto existing = std::find_if(s.extra.begin(), s.extra.end(), [&](const auto& kv) { return kv.first == key; });
      if (existing != s.extra.end()) {
        existing->second = value;
      } else {
        result.warnings.push_back(fmt::format("line {}: unknown key {} preserved", line_no, key));
        s.extra.emplace_back(key, value);
      }
    }
  }
  if (!have_problem) throw InputError("missing PROBLEM_FILE");
  return result;
}

void write_par_file(const ParSettings& settings, const std::filesystem::path& path) {
  if (settings.problem_file.empty()) throw InputError("missing PROBLEM_FILE");
  write_text_file(path, format_par(settings));
}

ParParse parse_par_file(const std::filesystem::path& path) { return parse_par(read_text_file(path)); }

std::string objective_stem(double objective, Objective kind, int scale) {
  if (kind == Objective::kCost) return fmt::format("{:.6g}", objective);
  int decimals = 0;
  for (int s = scale; s >= 10; s /= 10) ++decimals;
  std::string text = fmt::format("{:.{}f}", objective, decimals);
  if (text.find('.') != std::string::npos) {
    while (text.back() == '0') text.pop_back();
    if (text.back() == '.') text.pop_back();
  }
  if (text == "-0") text = "0";
  return text;
}

std::string format_outtour(const GiantTour& tour) {
  std::string out;
  auto it = std::back_inserter(out);
  for (int node : tour.order) fmt::format_to(it, "{}\n", node + 1);
  out += "-1\n";
  return out;
}

std::filesystem::path write_outtour(const GiantTour& tour, double objective, Objective kind, int scale,
                                    std::string_view instance, const std::filesystem::path& directory) {
  if (tour.order.empty()) throw InputError("cannot write an empty tour");
  if (instance.empty()) throw InputError("tour needs an instance name");
  const std::filesystem::path path =
      directory / fmt::format("{}_{}.outtour", objective_stem(objective, kind, scale), instance);
  write_text_file(path, format_outtour(tour));
  return path;
}

GiantTour parse_outtour(std::string_view text) {
  GiantTour tour;
  bool terminated = false;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    for (std::string_view token : split_ws(lines[i])) {
      if (terminated) throw InputError("data after -1 terminator", line_no);
      const std::int64_t v = parse_int(token, line_no);
      if (v == -1) {
        terminated = true;
        continue;
      }
      if (v < 1) throw InputError(fmt::format("invalid node id {}", v), line_no);
      tour.order.push_back(static_cast<int>(v - 1));
    }
  }
  if (!terminated) throw InputError("tour is missing the -1 terminator");
  if (tour.order.empty()) throw InputError("tour is empty");
  return tour;
}

OutTour read_outtour(const std::filesystem::path& path) {
  OutTour out;
  out.tour = parse_outtour(read_text_file(path));
  const std::string stem = path.stem().string();
  const auto us = stem.find('_');
  if (us == std::string::npos || us == 0 || us + 1 == stem.size())
    throw InputError(fmt::format("tour file name '{}' is not '<objective>_<instance>'", stem));
  out.objective_text = stem.substr(0, us);
  out.instance = stem.substr(us + 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(out.objective_text.data(), out.objective_text.data() + out.objective_text.size(), v);
  if (ec != std::errc{} || ptr != out.objective_text.data() + out.objective_text.size())
    throw InputError(fmt::format("tour file name has a non-numeric objective '{}'", out.objective_text));
  out.objective = v;
  return out;
}

}  // namespace sidekick
