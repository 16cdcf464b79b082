#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <regex>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "sidekick/bench.hpp"
#include "sidekick/candgen.hpp"
#include "sidekick/codec.hpp"
#include "sidekick/eval.hpp"
#include "sidekick/formats.hpp"
#include "sidekick/oracle.hpp"
#include "sidekick/search.hpp"

namespace fs = std::filesystem;

namespace sidekick::cli {
namespace {

// Raised for flag combinations that parse but contradict each other.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string set = "auto";
  std::optional<std::string> variant;
  std::optional<int> config;
  std::optional<double> time_limit;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<int> drones;
  std::optional<int> trucks;
  int scale = 10;
  std::optional<double> time_factor;
  std::optional<double> endurance;
  std::optional<double> waypoint_spacing;
  bool allow_loop = false;
  std::optional<std::int64_t> max_iterations;
  std::int64_t stall_limit = 0;
  std::string format = "csv";
  bool no_timing = false;
};

void add_problem_flags(CLI::App* sub, Options& o) {
  sub->add_option("--set", o.set, "Instance format: poikonen, sacramento, murray or auto")
      ->check(CLI::IsMember({"auto", "poikonen", "sacramento", "murray"}));
  sub->add_option("--variant", o.variant, "fstsp, tsp-md, vrpd-11 or vrpd-1m");
  sub->add_option("--config", o.config, "1 = no revisit, 2 = revisit allowed")->check(CLI::IsMember({1, 2}));
  sub->add_option("--k", o.k, "Candidate set size per drone-eligible customer")->check(CLI::PositiveNumber);
  sub->add_option("--drones", o.drones, "Drones per truck")->check(CLI::PositiveNumber);
  sub->add_option("--trucks", o.trucks, "Trucks (VRP-D)")->check(CLI::PositiveNumber);
  sub->add_option("--scale", o.scale, "Fixed-point ticks per minute")->check(CLI::PositiveNumber);
  sub->add_option("--time-factor", o.time_factor, "Minutes per distance/speed unit")->check(CLI::PositiveNumber);
  sub->add_option("--endurance", o.endurance, "Drone endurance in minutes")->check(CLI::PositiveNumber);
  sub->add_option("--waypoint-spacing", o.waypoint_spacing, "Add a grid of non-customer launch/retrieval sites")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--allow-loop", o.allow_loop, "Allow retrieval at the launch site");
}

void add_search_flags(CLI::App* sub, Options& o) {
  sub->add_option("--time-limit", o.time_limit, "Seconds per solve")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--max-iterations", o.max_iterations, "Kick limit");
  sub->add_option("--stall-limit", o.stall_limit, "Stop after this many kicks without improvement");
}

void add_output_flags(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "csv or json (one object per line)")->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--no-timing", o.no_timing, "Omit iteration and time columns");
}

std::string resolve_set(const Options& o, const fs::path& path) {
  if (o.set != "auto") return o.set;
  if (fs::is_directory(path)) return fs::exists(path / "nodes.csv") ? "murray" : "poikonen";
  static const std::regex sacramento_name(R"(\d+\.\d+\.\d+)");
  if (std::regex_match(path.stem().string(), sacramento_name)) return "sacramento";
  return "poikonen";
}

struct Problem {
  Instance instance;
  std::optional<MurrayInstance> murray;
  std::string set;
};

Problem load_problem(const Options& o, const fs::path& path, double payload) {
  Problem p;
  p.set = resolve_set(o, path);
  if (p.set == "murray") {
    p.murray = load_murray(path);
    p.instance = p.murray->instance;
  } else if (p.set == "sacramento") {
    p.instance = load_sacramento(path, payload);
  } else {
    p.instance = load_poikonen(path);
  }
  return p;
}

VariantConfig build_config(const Options& o, std::string_view set) {
  Variant v = o.variant ? parse_variant(*o.variant)
                        : (set == "sacramento" ? Variant::kVrpd11 : Variant::kFstsp);
  if (!o.variant && o.drones && *o.drones > 1 && v == Variant::kFstsp) v = Variant::kTspMd;
  if (!o.variant && o.trucks && *o.trucks > 1 && v != Variant::kVrpd11 && v != Variant::kVrpd1m)
    throw UsageError("--trucks needs a VRP-D variant");

  VariantConfig c;
  switch (v) {
    case Variant::kFstsp:
      c = set == "murray" ? VariantConfig::murray(o.endurance.value_or(20.0)) : VariantConfig::fstsp();
      break;
    case Variant::kTspMd:
      c = VariantConfig::tsp_md(o.drones.value_or(5));
      if (set == "murray") {
        c.endurance = o.endurance.value_or(20.0);
        c.launch_time = c.retrieval_time = 1.0;
      }
      break;
    case Variant::kVrpd11:
    case Variant::kVrpd1m:
      c = VariantConfig::vrpd_sacramento(o.trucks.value_or(3));
      c.variant = v;
      break;
  }
  if (o.drones) c.drone_count = *o.drones;
  if (o.trucks) c.truck_count = *o.trucks;
  if (o.endurance) c.endurance = *o.endurance;
  if (o.time_factor) c.time_factor = *o.time_factor;
  if (o.config) c.revisit = *o.config == 2 ? RevisitPolicy::kRevisitOk : RevisitPolicy::kNoRevisit;
  if (o.allow_loop) c.loop = LoopPolicy::kAllow;
  if (o.waypoint_spacing) {
    c.non_customer_lr = true;
    c.waypoint_spacing = *o.waypoint_spacing;
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

SearchSettings build_settings(const Options& o) {
  SearchSettings s;
  if (o.time_limit) s.time_limit = *o.time_limit;
  if (o.seed) s.seed = *o.seed;
  s.max_iterations = o.max_iterations;
  s.stall_limit = o.stall_limit;
  s.validate();
  return s;
}

// Everything a solve needs, built from a physical instance.
struct Prepared {
  std::string name;
  Instance instance;
  VariantConfig config;
  DistanceModel dm;
  CandidateGraph graph;
  CustomerTable customers;
};

Prepared prepare(const Options& o, const fs::path& path) {
  Prepared p;
  const VariantConfig probe = build_config(o, resolve_set(o, path));
  Problem prob = load_problem(o, path, probe.drone_payload);
  p.config = build_config(o, prob.set);
  p.instance = prob.instance;
  if (p.config.non_customer_lr) {
    if (prob.murray) throw UsageError("--waypoint-spacing needs coordinate instances");
    p.instance = with_grid_waypoints(p.instance, p.config.waypoint_spacing);
  }
  p.name = p.instance.name;
  p.dm = prob.murray ? prob.murray->distances(p.config, o.scale) : build_distance_model(p.instance, p.config, o.scale);
  p.graph = expand_candidates(p.instance, p.dm, p.config, o.k.value_or(default_k(p.instance)));
  p.customers = customer_table(p.instance, p.config);
  return p;
}

nlohmann::json row_json(const BatchRow& row, bool timing) {
  nlohmann::json j = {{"instance", row.instance},
                      {"variant", std::string(to_string(row.variant))},
                      {"objective", row.objective},
                      {"objective_text", row.objective_text},
                      {"feasible", row.feasible},
                      {"dcus", row.dcus},
                      {"drones", row.drones},
                      {"routes", row.routes}};
  if (timing) {
    j["iter"] = row.iteration_found;
    j["time_s"] = row.wall_time;
  }
  if (!row.tour_file.empty()) j["tour_file"] = row.tour_file.string();
  return j;
}

std::string violation_list(const PenaltyReport& rep) {
  std::string out;
  for (int v = 0; v < kViolationKinds; ++v) {
    const int n = rep.counts[static_cast<std::size_t>(v)];
    if (n > 0) out += fmt::format("{}{} x{}", out.empty() ? "" : ", ", to_string(static_cast<Violation>(v)), n);
  }
  return out;
}

std::string plan_text(const StructuredSolution& plan) {
  std::string out;
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const TruckRoute& route = plan.routes[r];
    if (!route.used()) continue;
    out += fmt::format("route {}:", r + 1);
    for (const Stop& s : route.stops) out += fmt::format(" {}", s.location);
    out += '\n';
    for (const Sortie& so : route.sorties) {
      out += fmt::format("  sortie {} -> {} -> {}\n", route.stops[static_cast<std::size_t>(so.launch_stop)].location,
                         so.customer, route.stops[static_cast<std::size_t>(so.retrieval_stop)].location);
    }
  }
  return out;
}

int cmd_generate(const Options& o, const fs::path& input, const fs::path& out_dir, std::ostream& out) {
  const Prepared p = prepare(o, input);
  fs::create_directories(out_dir);
  const fs::path drone = out_dir / (p.name + ".drone");
  write_drone_file(p.graph, drone);
  ParSettings par;
  par.problem_file = drone.filename().string();
  par.time_limit = o.time_limit.value_or(SearchSettings{}.time_limit);
  par.seed = o.seed.value_or(SearchSettings{}.seed);
  par.output_tour_file = ".";
  par.config = o.config.value_or(1);
  const fs::path par_path = out_dir / (p.name + ".par");
  write_par_file(par, par_path);
  out << drone.string() << '\n' << par_path.string() << '\n';
  return kExitOk;
}

struct SolveInput {
  std::string name;
  VariantConfig config;
  CandidateGraph graph;
  DistanceModel dm;
  CustomerTable customers;
  SearchSettings settings;
  fs::path out_dir;
};

// A .par file names a .drone graph; physical data is recovered from it.
SolveInput solve_input_from_par(const Options& o, const fs::path& par_path, std::ostream& err) {
  const ParParse parsed = parse_par_file(par_path);
  for (const auto& w : parsed.warnings) err << "warning: " << w << '\n';
  const ParSettings& par = parsed.settings;
  SolveInput in;
  const fs::path drone = par_path.parent_path() / par.problem_file;
  in.graph = parse_drone_file(drone);
  in.name = drone.stem().string();

  Options eff = o;
  if (!eff.variant) {
    eff.variant = in.graph.vehicles_line ? "vrpd-11" : (in.graph.drone_count > 1 ? "tsp-md" : "fstsp");
  }
  if (in.graph.capacity_line) {
    if (o.drones && *o.drones != in.graph.drone_count)
      throw UsageError(fmt::format("--drones {} contradicts the graph's CAPACITY {}", *o.drones, in.graph.drone_count));
    eff.drones = in.graph.drone_count;
  }
  if (in.graph.vehicles_line) {
    if (o.trucks && *o.trucks != in.graph.truck_count)
      throw UsageError(fmt::format("--trucks {} contradicts the graph's VEHICLES {}", *o.trucks, in.graph.truck_count));
    eff.trucks = in.graph.truck_count;
  }
  if (par.config) {
    if (o.config && *o.config != *par.config) throw UsageError("--config contradicts the parameter file");
    eff.config = par.config;
  }
  if (!eff.time_limit && par.time_limit) eff.time_limit = par.time_limit;
  if (!eff.seed && par.seed) eff.seed = par.seed;
  in.config = build_config(eff, "graph");
  in.dm = distance_model_from_graph(in.graph, in.config, o.scale);
  in.customers = customer_table(in.graph);
  in.settings = build_settings(eff);
  in.out_dir = par.output_tour_file.empty() ? fs::path(".") : par_path.parent_path() / par.output_tour_file;
  return in;
}

int cmd_solve(const Options& o, const fs::path& input, const std::optional<fs::path>& out_dir, std::ostream& out,
              std::ostream& err) {
  SolveInput in;
  if (input.extension() == ".par") {
    in = solve_input_from_par(o, input, err);
  } else {
    Prepared p = prepare(o, input);
    in.name = p.name;
    in.config = p.config;
    in.graph = std::move(p.graph);
    in.dm = std::move(p.dm);
    in.customers = std::move(p.customers);
    in.settings = build_settings(o);
    in.out_dir = ".";
  }
  if (out_dir) in.out_dir = *out_dir;

  const SearchResult res = solve(in.graph, in.dm, in.config, in.customers, in.settings);
  BatchRow row;
  row.instance = in.name;
  row.variant = in.config.variant;
  row.objective = res.best_solution.objective;
  row.objective_text = objective_stem(row.objective, in.config.objective, o.scale);
  row.feasible = res.best_penalty.feasible();
  row.dcus = res.best_solution.drone_customers();
  row.drones = res.best_solution.drones_used();
  row.routes = res.best_solution.routes_used();
  row.iteration_found = res.iteration_found;
  row.wall_time = res.wall_time;
  fs::create_directories(in.out_dir);
  row.tour_file = write_outtour(res.best_tour, row.objective, in.config.objective, o.scale, in.name, in.out_dir);

  const bool timing = !o.no_timing;
  if (o.format == "json") {
    out << row_json(row, timing).dump() << '\n';
  } else {
    out << batch_csv_header(timing) << batch_csv_row(row, timing);
  }
  if (!row.feasible) {
    err << "infeasible: " << violation_list(res.best_penalty) << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_validate(const Options& o, const fs::path& tour, const fs::path& drone,
                 const std::optional<fs::path>& instance, std::ostream& out) {
  const CandidateGraph graph = parse_drone_file(drone);
  Options eff = o;
  if (!eff.variant) eff.variant = graph.vehicles_line ? "vrpd-11" : (graph.drone_count > 1 ? "tsp-md" : "fstsp");
  if (graph.capacity_line && !eff.drones) eff.drones = graph.drone_count;
  if (graph.vehicles_line && !eff.trucks) eff.trucks = graph.truck_count;

  ClosureReport rep;
  if (instance) {
    const Prepared p = prepare(eff, *instance);
    rep = validate(tour, drone, p.config, o.scale, &p.dm, &p.customers);
  } else {
    rep = validate(tour, drone, build_config(eff, "graph"), o.scale);
  }
  if (o.format == "json") {
    nlohmann::json j = {{"pass", rep.pass}, {"claimed", rep.claimed_text}, {"recomputed", rep.recomputed},
                        {"violations", rep.violations}, {"message", rep.message}};
    out << j.dump() << '\n';
  } else {
    out << rep.message << '\n';
  }
  return rep.pass ? kExitOk : kExitFailure;
}

int cmd_render(const Options& o, const fs::path& tour, const fs::path& drone, const fs::path& instance,
               std::optional<fs::path> output, std::ostream& out) {
  const CandidateGraph graph = parse_drone_file(drone);
  Options eff = o;
  if (!eff.variant) eff.variant = graph.vehicles_line ? "vrpd-11" : (graph.drone_count > 1 ? "tsp-md" : "fstsp");
  if (graph.capacity_line && !eff.drones) eff.drones = graph.drone_count;
  if (graph.vehicles_line && !eff.trucks) eff.trucks = graph.truck_count;
  const Prepared p = prepare(eff, instance);
  const OutTour ot = read_outtour(tour);
  check_tour(ot.tour, graph, p.config.multi_route() ? p.config.truck_count : 1);
  StructuredSolution plan = decode(ot.tour, graph, p.config);
  const fs::path path = output.value_or(fs::path(tour).replace_extension(".svg"));
  render_svg(plan, p.instance, path);
  out << path.string() << '\n';
  return kExitOk;
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const fs::path& in : inputs) {
    if (fs::is_directory(in) && !fs::exists(in / "nodes.csv")) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_regular_file() && e.path().filename().string().front() != '.') found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  return files;
}

int cmd_bench(const Options& o, const std::vector<fs::path>& inputs, const std::optional<fs::path>& reference,
              std::vector<std::string> columns, const std::optional<fs::path>& out_dir, int jobs, std::ostream& out) {
  std::optional<ReferenceTable> table;
  if (reference) table = ReferenceTable::load(*reference);
  if (columns.empty() && table && table->has_column("z_star")) columns.push_back("z_star");
  for (const auto& c : columns) {
    if (!table || !table->has_column(c)) throw UsageError(fmt::format("reference column '{}' not available", c));
  }

  std::vector<BatchItem> items;
  for (const fs::path& f : expand_inputs(inputs)) {
    Prepared p = prepare(o, f);
    items.push_back({p.name, std::move(p.graph), std::move(p.dm), std::move(p.customers), p.config});
  }
  if (items.empty()) throw UsageError("no instances to run");
  BatchOptions bo;
  bo.parallelism = jobs;
  bo.timing_columns = !o.no_timing;
  bo.scale = o.scale;
  if (out_dir) fs::create_directories(*out_dir);
  const auto rows = run_batch(items, build_settings(o), out_dir.value_or(fs::path()), bo);

  std::vector<BenchmarkRecord> records;
  for (const BatchRow& row : rows) {
    BenchmarkRecord rec{row.instance, row.variant, row.objective, row.objective_text, row.dcus, row.drones,
                        row.routes,   row.iteration_found, row.wall_time, {}};
    if (table) attach_gaps(rec, *table, columns);
    records.push_back(std::move(rec));
  }
  const auto averages = average_gaps(records, columns);
  if (o.format == "json") {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      nlohmann::json j = row_json(rows[i], bo.timing_columns);
      for (const auto& [col, gap] : records[i].gaps) j["gap_" + col] = gap;
      out << j.dump() << '\n';
    }
    nlohmann::json avg = {{"instance", "average"}};
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (averages[c]) avg["gap_" + columns[c]] = *averages[c];
    }
    out << avg.dump() << '\n';
  } else {
    out << gap_table_header(columns, bo.timing_columns) << '\n';
    for (const auto& rec : records) out << gap_table_row(rec, columns, bo.timing_columns) << '\n';
    std::string avg = "average,,,,,";
    if (bo.timing_columns) avg += ",,";
    for (const auto& a : averages) avg += a ? fmt::format(",{:.2f}", *a) : std::string(",");
    out << avg << '\n';
  }
  const bool all_feasible = std::all_of(rows.begin(), rows.end(), [](const BatchRow& r) { return r.feasible; });
  return all_feasible ? kExitOk : kExitFailure;
}

int cmd_oracle(const Options& o, const fs::path& input, bool restrict_pool, std::optional<std::int64_t> max_plans,
               std::ostream& out) {
  const Prepared p = prepare(o, input);
  OracleLimits limits;
  limits.time_limit = o.time_limit;
  limits.max_plans = max_plans;
  if (restrict_pool) limits.pool = &p.graph;
  const OracleResult res = brute_force(p.dm, p.config, p.customers, limits);
  const std::string text = objective_stem(res.optimum, p.config.objective, o.scale);
  if (o.format == "json") {
    nlohmann::json j = {{"instance", p.name},
                        {"variant", std::string(to_string(p.config.variant))},
                        {"optimum", res.optimum},
                        {"optimum_text", text},
                        {"dcus", res.plan.drone_customers()},
                        {"drones", res.plan.drones_used()},
                        {"routes", res.plan.routes_used()},
                        {"enumerated", res.enumerated}};
    if (!o.no_timing) j["time_s"] = res.wall_time;
    out << j.dump() << '\n';
  } else {
    out << fmt::format("{} {} optimum {} dcus {} enumerated {}\n", p.name, to_string(p.config.variant), text,
                       res.plan.drone_customers(), res.enumerated);
    out << plan_text(res.plan);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Truck-and-drone routing solver"};
  app.name("sidekick");
  app.require_subcommand(1);
  Options o;

  fs::path input, tour, drone;
  std::optional<fs::path> out_dir, instance, output, reference;
  std::vector<fs::path> inputs;
  std::vector<std::string> columns;
  int jobs = 1;
  bool restrict_pool = false;
  std::optional<std::int64_t> max_plans;

  auto* gen = app.add_subcommand("generate", "Write the .drone graph and .par file for an instance");
  gen->add_option("instance", input, "Instance file or Murray directory")->required();
  gen->add_option("-o,--out-dir", out_dir, "Output directory");
  add_problem_flags(gen, o);
  add_search_flags(gen, o);

  auto* sol = app.add_subcommand("solve", "Solve a .par file or an instance; writes an .outtour");
  sol->add_option("input", input, ".par file, instance file or Murray directory")->required();
  sol->add_option("-o,--out-dir", out_dir, "Directory for the .outtour file");
  add_problem_flags(sol, o);
  add_search_flags(sol, o);
  add_output_flags(sol, o);

  auto* val = app.add_subcommand("validate", "Re-evaluate an .outtour against its .drone graph");
  val->add_option("tour", tour, ".outtour file")->required();
  val->add_option("drone", drone, ".drone file")->required();
  val->add_option("--instance", instance, "Instance for exact travel data");
  add_problem_flags(val, o);
  add_output_flags(val, o);

  auto* ren = app.add_subcommand("render", "Draw an .outtour as SVG");
  ren->add_option("tour", tour, ".outtour file")->required();
  ren->add_option("drone", drone, ".drone file")->required();
  ren->add_option("--instance", instance, "Instance with coordinates")->required();
  ren->add_option("-o,--output", output, "SVG path (default: tour path with .svg)");
  add_problem_flags(ren, o);

  auto* ben = app.add_subcommand("bench", "Solve a set of instances and tabulate gaps to reference values");
  ben->add_option("inputs", inputs, "Instance files or directories")->required();
  ben->add_option("--reference", reference, "Reference CSV");
  ben->add_option("--columns", columns, "Reference columns to compare against (default z_star)")->delimiter(',');
  ben->add_option("-o,--out-dir", out_dir, "Directory for .outtour files");
  ben->add_option("-j,--jobs", jobs, "Parallel solves")->check(CLI::PositiveNumber);
  add_problem_flags(ben, o);
  add_search_flags(ben, o);
  add_output_flags(ben, o);

  auto* ora = app.add_subcommand("oracle", "Exact optimum by enumeration (small instances)");
  ora->add_option("instance", input, "Instance file or Murray directory")->required();
  ora->add_flag("--restrict-pool", restrict_pool, "Only use launch/retrieval sites from the candidate pool");
  ora->add_option("--max-plans", max_plans, "Refuse after this many evaluated plans");
  ora->add_option("--time-limit", o.time_limit, "Refuse after this many seconds");
  add_problem_flags(ora, o);
  add_output_flags(ora, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(o, input, out_dir.value_or(fs::path(".")), out);
    if (*sol) return cmd_solve(o, input, out_dir, out, err);
    if (*val) return cmd_validate(o, tour, drone, instance, out);
    if (*ren) return cmd_render(o, tour, drone, *instance, output, out);
    if (*ben) return cmd_bench(o, inputs, reference, columns, out_dir, jobs, out);
    if (*ora) return cmd_oracle(o, input, restrict_pool, max_plans, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OracleRefused& e) {
    err << "oracle refused: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sidekick::cli
