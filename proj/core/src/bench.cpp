#include "sidekick/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "sidekick/codec.hpp"
#include "sidekick/eval.hpp"
#include "sidekick/formats.hpp"

namespace sidekick {
namespace {

struct Row {
  int line = 0;
  std::vector<std::string_view> tokens;
};

// Blanks out '#' and /* */ comments, keeping newlines so line numbers hold.
std::string strip_comments(std::string_view text) {
  std::string out(text);
  bool block = false;
  bool hash = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == '\n') {
      hash = false;
      continue;
    }
    if (block) {
      if (out[i] == '*' && i + 1 < out.size() && out[i + 1] == '/') {
        out[i] = out[i + 1] = ' ';
        ++i;
        block = false;
      } else {
        out[i] = ' ';
      }
    } else if (hash) {
      out[i] = ' ';
    } else if (out[i] == '#') {
      hash = true;
      out[i] = ' ';
    } else if (out[i] == '/' && i + 1 < out.size() && out[i + 1] == '*') {
      out[i] = out[i + 1] = ' ';
      ++i;
      block = true;
    }
  }
  return out;
}

bool is_sep(char c) { return c == ' ' || c == '\t' || c == '\r' || c == ',' || c == ';'; }

std::vector<Row> rows_of(std::string_view text) {
  std::vector<Row> rows;
  int line = 0;
  while (!text.empty() || line == 0) {
    ++line;
    const auto nl = text.find('\n');
    std::string_view s = text.substr(0, nl);
    Row row{line, {}};
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && is_sep(s[i])) ++i;
      std::size_t j = i;
      while (j < s.size() && !is_sep(s[j])) ++j;
      if (j > i) row.tokens.push_back(s.substr(i, j - i));
      i = j;
    }
    if (!row.tokens.empty()) rows.push_back(std::move(row));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return rows;
}

std::optional<double> number(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool header_like(const Row& row) {
  const char c = row.tokens.front().front();
  if (!((c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.')) return true;
  return std::any_of(row.tokens.begin(), row.tokens.end(),
                     [](std::string_view t) { return t.find(':') != std::string_view::npos; });
}

std::vector<double> numeric_row(const Row& row) {
  std::vector<double> out;
  for (std::string_view t : row.tokens) {
    const auto v = number(t);
    if (!v) throw InputError(fmt::format("malformed number '{}'", t), row.line);
    out.push_back(*v);
  }
  return out;
}

// Collects coordinate rows of a fixed width (`plain` values, or one more
// with a leading id). Leading single-value rows and header lines before the
// data are skipped; afterwards every row must conform.
std::vector<std::vector<double>> data_rows(std::string_view text, std::size_t plain) {
  const std::string clean = strip_comments(text);
  std::vector<std::vector<double>> out;
  std::size_t width = 0;
  for (const Row& row : rows_of(clean)) {
    if (header_like(row)) {
      if (out.empty()) continue;
      throw InputError(fmt::format("unexpected text '{}'", row.tokens.front()), row.line);
    }
    std::vector<double> v = numeric_row(row);
    if (out.empty() && v.size() < plain) continue;  // count or size header
    if (width == 0) {
      if (v.size() != plain && v.size() != plain + 1)
        throw InputError(fmt::format("expected {} or {} values, got {}", plain, plain + 1, v.size()), row.line);
      width = v.size();
    } else if (v.size() != width) {
      throw InputError(fmt::format("expected {} values, got {}", width, v.size()), row.line);
    }
    if (width == plain + 1) v.erase(v.begin());
    out.push_back(std::move(v));
  }
  return out;
}

std::string name_of(const std::filesystem::path& path) { return path.stem().string(); }

}  // namespace

Instance parse_poikonen(std::string_view text, std::string name) {
  const auto rows = data_rows(text, 2);
  if (rows.size() < 2) throw InputError("instance needs a depot and at least one customer");
  Instance inst;
  inst.name = std::move(name);
  inst.area_tag = "Set 4";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    inst.locations.push_back({static_cast<int>(i), rows[i][0], rows[i][1]});
    if (i > 0) inst.customers.push_back({static_cast<int>(i), std::nullopt, true, false});
  }
  inst.check();
  return inst;
}

Instance load_poikonen(const std::filesystem::path& path) {
  return parse_poikonen(read_text_file(path), name_of(path));
}

std::string format_poikonen(const Instance& instance) {
  std::string out = fmt::format("{}\n", instance.customer_count() + 1);
  for (int i = 0; i <= instance.customer_count(); ++i) {
    const Location& l = instance.locations[static_cast<std::size_t>(i)];
    out += fmt::format("{} {}\n", l.x, l.y);
  }
  return out;
}

Instance parse_sacramento(std::string_view text, std::string name, double payload) {
  const auto rows = data_rows(text, 3);
  if (rows.size() < 2) throw InputError("instance needs a depot and at least one customer");
  Instance inst;
  inst.name = std::move(name);
  inst.area_tag = "Set 6";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    inst.locations.push_back({static_cast<int>(i), rows[i][0], rows[i][1]});
    if (i == 0) continue;
    const double demand = rows[i][2];
    if (demand < 0) throw InputError(fmt::format("negative demand for customer {}", i));
    inst.customers.push_back({static_cast<int>(i), demand, demand <= payload, false});
  }
  inst.check();
  return inst;
}

Instance load_sacramento(const std::filesystem::path& path, double payload) {
  return parse_sacramento(read_text_file(path), name_of(path), payload);
}

std::string format_sacramento(const Instance& instance) {
  std::string out;
  for (int i = 0; i <= instance.customer_count(); ++i) {
    const Location& l = instance.locations[static_cast<std::size_t>(i)];
    const double demand = i == 0 ? 0.0 : instance.customer(i).demand.value_or(0.0);
    out += fmt::format("{} {} {}\n", l.x, l.y, demand);
  }
  return out;
}

namespace {

std::vector<std::vector<double>> csv_matrix(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError(fmt::format("missing matrix file {}", path.string()));
  const std::string text = read_text_file(path);
  std::vector<std::vector<double>> rows;
  for (const Row& row : rows_of(text)) {
    if (rows.empty() && header_like(row)) continue;
    rows.push_back(numeric_row(row));
  }
  if (rows.empty()) throw InputError(fmt::format("{} holds no rows", path.filename().string()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size())
      throw InputError(fmt::format("{} is not square: row {} has {} of {} entries", path.filename().string(), i + 1,
                                   rows[i].size(), rows.size()));
  }
  return rows;
}

}  // namespace

DistanceModel MurrayInstance::distances(const VariantConfig& config, int scale) const {
  return DistanceModel::from_times(instance.location_count(), truck_minutes, drone_minutes, config, scale);
}

MurrayInstance load_murray(const std::filesystem::path& directory) {
  const auto nodes_path = directory / "nodes.csv";
  if (!std::filesystem::exists(nodes_path)) throw InputError(fmt::format("missing {}", nodes_path.string()));
  const auto tau = csv_matrix(directory / "tau.csv");
  const auto taup = csv_matrix(directory / "tauprime.csv");
  if (tau.size() != taup.size()) throw InputError("tau.csv and tauprime.csv differ in size");
  if (tau.size() < 3) throw InputError("matrices must cover the depot, a customer and the depot copy");
  const int n = static_cast<int>(tau.size()) - 2;

  std::vector<std::vector<double>> nodes;
  int width = 0;
  const std::string text = read_text_file(nodes_path);
  for (const Row& row : rows_of(text)) {
    if (nodes.empty() && header_like(row)) continue;
    auto v = numeric_row(row);
    if (width == 0) width = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != width || width < 4)
      throw InputError(fmt::format("nodes.csv row needs at least 4 consistent columns"), row.line);
    nodes.push_back(std::move(v));
  }
  if (static_cast<int>(nodes.size()) < n + 1)
    throw InputError(fmt::format("nodes.csv lists {} nodes, matrices need {}", nodes.size(), n + 1));

  // Last column: a 0/1 heavy flag, or a parcel weight in pounds (heavy > 5).
  const bool flag_column = std::all_of(nodes.begin(), nodes.begin() + n + 1, [](const auto& r) {
    return r.back() == 0.0 || r.back() == 1.0;
  });

  MurrayInstance m;
  m.instance.name = name_of(directory.filename().empty() ? directory.parent_path() : directory);
  m.instance.area_tag = "Set 1";
  for (int i = 0; i <= n; ++i) {
    const auto& r = nodes[static_cast<std::size_t>(i)];
    // id,type,lat,lon,...,flag or id,x,y,flag
    const double x = width >= 6 ? r[3] : r[1];
    const double y = r[2];
    m.instance.locations.push_back({i, x, y});
    if (i == 0) continue;
    const bool heavy = flag_column ? r.back() == 1.0 : r.back() > 5.0;
    m.instance.customers.push_back({i, std::nullopt, !heavy, heavy});
  }
  m.instance.check();

  const auto size = static_cast<std::size_t>(n + 1);
  m.truck_minutes.resize(size * size);
  m.drone_minutes.resize(size * size);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      m.truck_minutes[i * size + j] = tau[i][j] / 60.0;
      m.drone_minutes[i * size + j] = taup[i][j] / 60.0;
    }
  }
  return m;
}

namespace {

// Half a unit in the last printed digit of a decimal or exponent literal.
double text_tolerance(std::string_view text) {
  int exponent = 0;
  const auto e = text.find_first_of("eE");
  std::string_view mantissa = text.substr(0, e);
  if (e != std::string_view::npos) {
    std::string_view exp = text.substr(e + 1);
    if (!exp.empty() && exp.front() == '+') exp.remove_prefix(1);
    std::from_chars(exp.data(), exp.data() + exp.size(), exponent);
  }
  const auto dot = mantissa.find('.');
  const int decimals = dot == std::string_view::npos ? 0 : static_cast<int>(mantissa.size() - dot - 1);
  return 0.5 * std::pow(10.0, exponent - decimals);
}

}  // namespace

ClosureReport validate(const std::filesystem::path& outtour, const std::filesystem::path& drone,
                       const VariantConfig& config, int scale, const DistanceModel* dm,
                       const CustomerTable* customers) {
  ClosureReport r;
  const CandidateGraph graph = parse_drone_file(drone);
  OutTour ot;
  try {
    ot = read_outtour(outtour);
    check_tour(ot.tour, graph, config.multi_route() ? config.truck_count : 1);
  } catch (const InputError& e) {
    r.message = fmt::format("FAIL malformed tour: {}", e.what());
    return r;
  }
  r.claimed_text = ot.objective_text;
  r.claimed = ot.objective;

  std::optional<DistanceModel> own_dm;
  if (dm == nullptr) dm = &own_dm.emplace(distance_model_from_graph(graph, config, scale));
  std::optional<CustomerTable> own_customers;
  if (customers == nullptr) customers = &own_customers.emplace(customer_table(graph));

  r.plan = decode(ot.tour, graph, config);
  const PenaltyReport& rep = evaluate_plan(r.plan, *dm, config, *customers);
  r.recomputed = r.plan.objective;
  for (int v = 0; v < kViolationKinds; ++v) {
    const int count = rep.counts[static_cast<std::size_t>(v)];
    if (count > 0) r.violations.push_back(fmt::format("{} x{}", to_string(static_cast<Violation>(v)), count));
  }
  const double tol = text_tolerance(r.claimed_text) + 1e-9 * std::max(1.0, std::abs(ot.objective));
  const bool matches = std::abs(r.recomputed - ot.objective) <= tol;
  const std::string recomputed = objective_stem(r.recomputed, config.objective, scale);
  if (!r.violations.empty()) {
    std::string names;
    for (const auto& v : r.violations) names += (names.empty() ? "" : ", ") + v;
    r.message = fmt::format("FAIL {} (objective {})", names, recomputed);
  } else if (!matches) {
    r.message = fmt::format("FAIL objective mismatch: file claims {}, recomputed {}", r.claimed_text, recomputed);
  } else {
    r.pass = true;
    r.message = fmt::format("PASS objective {}", recomputed);
  }
  return r;
}

std::vector<int> drone_slots(const TruckRoute& route) {
  std::vector<int> slot(route.sorties.size(), 0);
  std::vector<int> busy_until;  // retrieval stop of the slot's last sortie
  for (std::size_t s = 0; s < route.sorties.size(); ++s) {
    const Sortie& so = route.sorties[s];
    std::size_t d = 0;
    while (d < busy_until.size() && busy_until[d] > so.launch_stop) ++d;
    if (d == busy_until.size()) busy_until.push_back(0);
    busy_until[d] = so.retrieval_stop;
    slot[s] = static_cast<int>(d);
  }
  return slot;
}

namespace {

constexpr const char* kTruckColors[] = {"#222222", "#1f4e79", "#7f3f00", "#2e6b30", "#5b2c6f"};
constexpr const char* kDroneColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd",
                                        "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string render_svg(const StructuredSolution& plan, const Instance& instance) {
  constexpr double kSize = 800.0;
  constexpr double kMargin = 30.0;
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (const Location& l : instance.locations) {
    lo_x = std::min(lo_x, l.x), hi_x = std::max(hi_x, l.x);
    lo_y = std::min(lo_y, l.y), hi_y = std::max(hi_y, l.y);
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  const double unit = (kSize - 2 * kMargin) / span;
  auto px = [&](int loc) { return kMargin + (instance.locations.at(static_cast<std::size_t>(loc)).x - lo_x) * unit; };
  auto py = [&](int loc) {
    return kSize - kMargin - (instance.locations.at(static_cast<std::size_t>(loc)).y - lo_y) * unit;
  };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
      kSize);
  out += fmt::format("<title>{}</title>\n", instance.name);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{0}\" fill=\"white\"/>\n", kSize);

  int used = 0;
  for (const TruckRoute& route : plan.routes) {
    if (!route.used()) continue;
    const char* color = kTruckColors[used++ % std::size(kTruckColors)];
    std::string points;
    for (const Stop& s : route.stops) points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ", px(s.location), py(s.location));
    out += fmt::format("<polyline class=\"truck\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       points, color);
  }
  for (const TruckRoute& route : plan.routes) {
    const std::vector<int> slots = drone_slots(route);
    for (std::size_t s = 0; s < route.sorties.size(); ++s) {
      const Sortie& so = route.sorties[s];
      const int a = route.stops.at(static_cast<std::size_t>(so.launch_stop)).location;
      const int b = route.stops.at(static_cast<std::size_t>(so.retrieval_stop)).location;
      out += fmt::format(
          "<polyline class=\"drone\" points=\"{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}\" fill=\"none\" stroke=\"{}\" "
          "stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n",
          px(a), py(a), px(so.customer), py(so.customer), px(b), py(b),
          kDroneColors[static_cast<std::size_t>(slots[s]) % std::size(kDroneColors)]);
    }
  }

  for (int c = 1; c <= instance.customer_count(); ++c) {
    const bool by_drone = static_cast<std::size_t>(c) < plan.served_by.size() &&
                          plan.served_by[static_cast<std::size_t>(c)] == ServiceMode::kDrone;
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\" fill=\"{}\" stroke=\"black\"/>\n", px(c), py(c),
                       by_drone ? "white" : "#bbbbbb");
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" font-family=\"sans-serif\">{}</text>\n",
                       px(c) + 6, py(c) - 6, c);
  }
  out += fmt::format("<rect class=\"depot\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"12\" height=\"12\" fill=\"black\"/>\n",
                     px(0) - 6, py(0) - 6);
  out += "</svg>\n";
  return out;
}

void render_svg(const StructuredSolution& plan, const Instance& instance, const std::filesystem::path& path) {
  write_text_file(path, render_svg(plan, instance));
}

double gap_percent(double reference, double ours) {
  if (reference == 0.0) throw std::domain_error("gap against a zero reference");
  return 100.0 * (reference - ours) / reference;
}

ReferenceTable ReferenceTable::parse(std::string_view text) {
  ReferenceTable t;
  int line = 0;
  auto split = [](std::string_view s) {
    std::vector<std::string> cells;
    while (true) {
      const auto comma = s.find(',');
      std::string_view cell = s.substr(0, comma);
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      cells.emplace_back(cell);
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    return cells;
  };
  while (!text.empty()) {
    ++line;
    const auto nl = text.find('\n');
    std::string_view s = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (s.empty() || s == "\r") continue;
    auto cells = split(s);
    if (t.columns_.empty()) {
      if (cells.front() != "instance") throw InputError("reference table must start with an 'instance' column", line);
      t.columns_ = std::move(cells);
      continue;
    }
    if (cells.size() != t.columns_.size())
      throw InputError(fmt::format("expected {} cells, got {}", t.columns_.size(), cells.size()), line);
    t.instances_.push_back(cells.front());
    t.cells_.push_back(std::move(cells));
  }
  if (t.columns_.empty()) throw InputError("empty reference table");
  return t;
}

ReferenceTable ReferenceTable::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

bool ReferenceTable::has_column(std::string_view column) const {
  return std::find(columns_.begin(), columns_.end(), column) != columns_.end();
}

std::string ReferenceTable::text(std::string_view instance, std::string_view column) const {
  const auto col = std::find(columns_.begin(), columns_.end(), column);
  if (col == columns_.end()) throw std::out_of_range(fmt::format("no reference column '{}'", column));
  const auto row = std::find(instances_.begin(), instances_.end(), instance);
  if (row == instances_.end()) return {};
  return cells_[static_cast<std::size_t>(row - instances_.begin())][static_cast<std::size_t>(col - columns_.begin())];
}

std::optional<double> ReferenceTable::value(std::string_view instance, std::string_view column) const {
  return number(text(instance, column));
}

void attach_gaps(BenchmarkRecord& record, const ReferenceTable& table, const std::vector<std::string>& columns) {
  record.gaps.clear();
  for (const std::string& col : columns) {
    const auto ref = table.value(record.instance, col);
    if (ref && *ref != 0.0) record.gaps.emplace_back(col, gap_percent(*ref, record.objective));
  }
}

std::string gap_table_header(const std::vector<std::string>& columns, bool timing_columns) {
  std::string out = "instance,variant,objective,dcus,drones,routes";
  if (timing_columns) out += ",iter,time_s";
  for (const auto& c : columns) out += ",gap_" + c;
  return out;
}

std::string gap_table_row(const BenchmarkRecord& record, const std::vector<std::string>& columns,
                          bool timing_columns) {
  std::string out = fmt::format("{},{},{},{},{},{}", record.instance, to_string(record.variant),
                                record.objective_text.empty() ? fmt::format("{}", record.objective)
                                                              : record.objective_text,
                                record.dcus, record.drones, record.routes);
  if (timing_columns) out += fmt::format(",{},{:.2f}", record.iteration_found, record.wall_time);
  for (const auto& c : columns) {
    const auto it = std::find_if(record.gaps.begin(), record.gaps.end(), [&](const auto& g) { return g.first == c; });
    out += it == record.gaps.end() ? std::string(",") : fmt::format(",{:.2f}", it->second);
  }
  return out;
}

std::vector<std::optional<double>> average_gaps(const std::vector<BenchmarkRecord>& records,
                                                const std::vector<std::string>& columns) {
  std::vector<std::optional<double>> out;
  for (const auto& c : columns) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : records) {
      for (const auto& g : r.gaps) {
        if (g.first == c) sum += g.second, ++n;
      }
    }
    out.push_back(n > 0 ? std::optional<double>(sum / n) : std::nullopt);
  }
  return out;
}

}  // namespace sidekick
