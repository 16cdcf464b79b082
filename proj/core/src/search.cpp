#include "sidekick/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "sidekick/codec.hpp"
#include "sidekick/formats.hpp"

namespace sidekick {

std::string_view to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::kTwoOpt: return "two-opt";
    case MoveKind::kOrOpt: return "or-opt";
    case MoveKind::kRelocate: return "relocate";
    case MoveKind::kSwap: return "swap";
    case MoveKind::kMarkerRetarget: return "marker-retarget";
  }
  return "?";
}

void SearchSettings::validate() const {
  if (!(time_limit > 0.0)) throw ConfigError("time limit must be positive");
  if (kick_strength < 1) throw ConfigError("kick strength must be at least 1");
  if (neighbor_count < 1) throw ConfigError("neighbor count must be at least 1");
  if (max_iterations && *max_iterations < 0) throw ConfigError("max iterations must be non-negative");
  if (stall_limit < 0) throw ConfigError("stall limit must be non-negative");
  if ((move_set & kAllMoves) == 0) throw ConfigError("empty move set");
}

namespace {

void rebuild_retarget(std::vector<int>& tour, const CandidateGraph& graph, const Move& m) {
  const int self = graph.self_node(m.color);
  std::vector<int> reduced;
  reduced.reserve(tour.size());
  int r = -1;
  for (int node : tour) {
    if (node < graph.size() && graph.nodes[static_cast<std::size_t>(node)].color == m.color) {
      if (node == self) r = static_cast<int>(reduced.size());
      continue;
    }
    reduced.push_back(node);
  }
  std::vector<int> ghosts;
  for (int node : graph.members(m.color)) {
    if (node != self && node != m.launch && node != m.retrieval) ghosts.push_back(node);
  }
  tour.clear();
  auto copy_range = [&](int from, int to) {
    tour.insert(tour.end(), reduced.begin() + from, reduced.begin() + to);
  };
  const int size = static_cast<int>(reduced.size());
  if (m.launch < 0) {
    copy_range(0, r);
    tour.push_back(self);
    tour.insert(tour.end(), ghosts.begin(), ghosts.end());
    copy_range(r, size);
  } else if (m.retrieval < 0) {
    copy_range(0, r);
    tour.insert(tour.end(), ghosts.begin(), ghosts.end());
    tour.push_back(m.launch);
    tour.push_back(self);
    copy_range(r, size);
  } else {
    const int split = std::min(size, r + m.gap);
    copy_range(0, r);
    tour.push_back(m.launch);
    tour.push_back(self);
    copy_range(r, split);
    tour.push_back(m.retrieval);
    tour.insert(tour.end(), ghosts.begin(), ghosts.end());
    copy_range(split, size);
  }
}

}  // namespace

void Move::apply(std::vector<int>& tour, const CandidateGraph& graph) {
  auto b = tour.begin();
  switch (kind) {
    case MoveKind::kTwoOpt:
      std::reverse(b + i, b + j + 1);
      break;
    case MoveKind::kOrOpt:
    case MoveKind::kRelocate:
      if (j > i + len - 1) {
        std::rotate(b + i, b + i + len, b + j + 1);
        if (reversed) std::reverse(b + j + 1 - len, b + j + 1);
      } else {
        std::rotate(b + j + 1, b + i, b + i + len);
        if (reversed) std::reverse(b + j + 1, b + j + 1 + len);
      }
      break;
    case MoveKind::kSwap:
      std::swap(tour[static_cast<std::size_t>(i)], tour[static_cast<std::size_t>(j)]);
      break;
    case MoveKind::kMarkerRetarget:
      saved = tour;
      rebuild_retarget(tour, graph, *this);
      break;
  }
}

void Move::undo(std::vector<int>& tour, const CandidateGraph&) {
  auto b = tour.begin();
  switch (kind) {
    case MoveKind::kTwoOpt:
      std::reverse(b + i, b + j + 1);
      break;
    case MoveKind::kOrOpt:
    case MoveKind::kRelocate:
      if (j > i + len - 1) {
        if (reversed) std::reverse(b + j + 1 - len, b + j + 1);
        std::rotate(b + i, b + j + 1 - len, b + j + 1);
      } else {
        if (reversed) std::reverse(b + j + 1, b + j + 1 + len);
        std::rotate(b + j + 1, b + j + 1 + len, b + i + len);
      }
      break;
    case MoveKind::kSwap:
      std::swap(tour[static_cast<std::size_t>(i)], tour[static_cast<std::size_t>(j)]);
      break;
    case MoveKind::kMarkerRetarget:
      tour.swap(saved);
      break;
  }
}

GiantTour initial_tour(const CandidateGraph& graph, const VariantConfig& config, const CustomerTable& customers) {
  const int n = graph.color_count();
  const int trucks = config.multi_route() ? config.truck_count : 1;
  std::vector<char> done(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> order;
  int at = 0;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    std::int64_t best_d = 0;
    for (int c = 1; c <= n; ++c) {
      if (done[static_cast<std::size_t>(c)]) continue;
      const std::int64_t d = graph.distance(at, graph.self_node(c));
      if (best < 0 || d < best_d) {
        best = c;
        best_d = d;
      }
    }
    done[static_cast<std::size_t>(best)] = 1;
    order.push_back(best);
    at = graph.self_node(best);
  }

  StructuredSolution plan;
  plan.routes.resize(static_cast<std::size_t>(trucks));
  std::size_t r = 0;
  double load = 0.0;
  for (TruckRoute& route : plan.routes) route.stops.push_back(Stop{0, 0});
  for (int c : order) {
    const double demand = customers.demand.empty() ? 0.0 : customers.demand[static_cast<std::size_t>(c)];
    if (load + demand > config.truck_capacity && r + 1 < plan.routes.size() && load > 0.0) {
      ++r;
      load = 0.0;
    }
    load += demand;
    plan.routes[r].stops.push_back(Stop{graph.nodes[static_cast<std::size_t>(graph.self_node(c))].location, c});
  }
  for (TruckRoute& route : plan.routes) route.stops.push_back(Stop{0, 0});
  return encode(plan, graph);
}

namespace {

using Clock = std::chrono::steady_clock;

class Engine {
 public:
  Engine(const CandidateGraph& graph, const DistanceModel& dm, const VariantConfig& config,
         const CustomerTable& customers, const SearchSettings& settings)
      : graph_(graph),
        settings_(settings),
        eval_(graph, dm, config, customers),
        rng_(settings.seed),
        start_(Clock::now()) {
    deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(settings.time_limit));
    build_neighbors();
  }

  SearchResult run() {
    SearchResult result;
    tour_ = initial_tour(graph_, eval_.config(), eval_.customers());
    length_ = static_cast<int>(tour_.order.size());
    current_ = evaluate();
    best_tour_ = tour_.order;
    best_ = current_;
    if (settings_.record_trace) result.trace.push_back({0, best_});

    std::int64_t iteration = 0;
    std::int64_t found = 0;
    std::int64_t stall = 0;
    local_search();
    consider_best(0, result, found, stall);
    std::vector<int> accepted = tour_.order;
    double accepted_value = current_;
    while (!stopped()) {
      if (settings_.max_iterations && iteration >= *settings_.max_iterations) break;
      if (settings_.stall_limit > 0 && stall >= settings_.stall_limit) break;
      ++iteration;
      ++stall;
      kick(settings_.kick_strength + static_cast<int>((stall / 100) % 3));
      current_ = evaluate();
      local_search();
      if (current_ <= accepted_value) {
        accepted = tour_.order;
        accepted_value = current_;
      } else {
        tour_.order = accepted;
        current_ = accepted_value;
        refresh_positions();
      }
      consider_best(iteration, result, found, stall);
    }

    result.iterations = iteration;
    result.iteration_found = found;
    result.evaluations = evaluations_;
    result.best_tour.order = best_tour_;
    // Fresh re-evaluation of the returned tour.
    TourEvaluator check(graph_, eval_.distances(), eval_.config(), eval_.customers());
    result.best_penalty = check.evaluate(result.best_tour);
    result.best_solution = check.solution();
    if (result.best_penalty.total_penalty != best_)
      throw std::logic_error(fmt::format("search bookkeeping mismatch: {} vs {}", result.best_penalty.total_penalty, best_));
    result.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    return result;
  }

 private:
  void build_neighbors() {
    const int size = graph_.size();
    const int count = std::min(settings_.neighbor_count, size - 1);
    neighbors_.assign(static_cast<std::size_t>(size), {});
    std::vector<int> ids(static_cast<std::size_t>(size));
    for (int a = 0; a < size; ++a) {
      std::iota(ids.begin(), ids.end(), 0);
      std::partial_sort(ids.begin(), ids.begin() + count + 1, ids.end(), [&](int x, int y) {
        const std::int64_t dx = graph_.distance(a, x), dy = graph_.distance(a, y);
        return dx < dy || (dx == dy && x < y);
      });
      auto& list = neighbors_[static_cast<std::size_t>(a)];
      for (int i = 0; i <= count && static_cast<int>(list.size()) < count; ++i) {
        if (ids[static_cast<std::size_t>(i)] != a) list.push_back(ids[static_cast<std::size_t>(i)]);
      }
    }
  }

  const std::vector<int>& neighbors(int node) const {
    return neighbors_[static_cast<std::size_t>(node < graph_.size() ? node : 0)];
  }

  bool stopped() {
    if (stop_) return true;
    if ((evaluations_ & 63) == 0 && Clock::now() >= deadline_) stop_ = true;
    return stop_;
  }

  double evaluate() {
    ++evaluations_;
    return eval_.evaluate(tour_).total_penalty;
  }

  void refresh_positions() {
    pos_.resize(tour_.order.size());
    for (std::size_t p = 0; p < tour_.order.size(); ++p) pos_[static_cast<std::size_t>(tour_.order[p])] = static_cast<int>(p);
  }

  static bool better(double candidate, double incumbent) {
    return candidate < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
  }

  // Applies the move, keeps it when it improves.
  bool attempt(Move& m) {
    m.apply(tour_.order, graph_);
    const double value = evaluate();
    if (better(value, current_)) {
      current_ = value;
      refresh_positions();
      return true;
    }
    m.undo(tour_.order, graph_);
    return false;
  }

  void consider_best(std::int64_t iteration, SearchResult& result, std::int64_t& found, std::int64_t& stall) {
    if (better(current_, best_)) {
      best_ = current_;
      best_tour_ = tour_.order;
      found = iteration;
      stall = 0;
      if (settings_.record_trace) result.trace.push_back({iteration, best_});
    }
  }

  int start_offset(int span) {
    return span > 0 ? static_cast<int>(rng_() % static_cast<std::uint64_t>(span)) : 0;
  }

  void local_search() {
    refresh_positions();
    bool improved = true;
    while (improved && !stopped()) {
      improved = false;
      if (settings_.move_set & static_cast<unsigned>(MoveKind::kTwoOpt)) improved |= scan_two_opt();
      if (settings_.move_set & static_cast<unsigned>(MoveKind::kOrOpt)) improved |= scan_or_opt();
      if (settings_.move_set & static_cast<unsigned>(MoveKind::kSwap)) improved |= scan_swap();
      if (settings_.move_set & static_cast<unsigned>(MoveKind::kRelocate)) improved |= scan_relocate();
      if (settings_.move_set & static_cast<unsigned>(MoveKind::kMarkerRetarget)) improved |= scan_retarget();
    }
  }

  bool scan_two_opt() {
    bool any = false;
    const int span = length_ - 1;
    const int offset = start_offset(span);
    for (int step = 0; step < span && !stopped(); ++step) {
      const int p = 1 + (offset + step) % span;
      const int a = tour_.order[static_cast<std::size_t>(p - 1)];
      for (int nb : neighbors(a)) {
        const int q = pos_[static_cast<std::size_t>(nb)];
        Move m;
        m.kind = MoveKind::kTwoOpt;
        if (q > p) {
          m.i = p;
          m.j = q;
        } else if (q + 1 < p - 1) {
          m.i = q + 1;
          m.j = p - 1;
        } else {
          continue;
        }
        if (attempt(m)) {
          any = true;
          break;
        }
      }
    }
    return any;
  }

  bool scan_or_opt() {
    bool any = false;
    for (int len = 1; len <= 3; ++len) {
      const int span = length_ - len;
      if (span < 1) break;
      const int offset = start_offset(span);
      for (int step = 0; step < span && !stopped(); ++step) {
        const int p = 1 + (offset + step) % span;
        const int head = tour_.order[static_cast<std::size_t>(p)];
        for (int nb : neighbors(head)) {
          const int q = pos_[static_cast<std::size_t>(nb)];
          if (q >= p && q <= p + len - 1) continue;
          bool done = false;
          for (int variant = 0; variant < 2 && !done; ++variant) {
            Move m;
            m.kind = MoveKind::kOrOpt;
            m.i = p;
            m.len = len;
            m.reversed = variant == 1;
            m.j = variant == 0 ? q : q - 1;
            if (m.j < 0 || (m.j >= p - 1 && m.j <= p + len - 1)) continue;
            done = attempt(m);
          }
          if (done) {
            any = true;
            break;
          }
        }
      }
    }
    return any;
  }

  bool scan_swap() {
    bool any = false;
    const int span = length_ - 1;
    const int offset = start_offset(span);
    for (int step = 0; step < span && !stopped(); ++step) {
      const int p = 1 + (offset + step) % span;
      bool done = false;
      for (int nb : neighbors(tour_.order[static_cast<std::size_t>(p)])) {
        const int q = pos_[static_cast<std::size_t>(nb)];
        for (int other : {q - 1, q + 1}) {
          if (other < 1 || other >= length_ || other == p) continue;
          Move m;
          m.kind = MoveKind::kSwap;
          m.i = std::min(p, other);
          m.j = std::max(p, other);
          if ((done = attempt(m))) break;
        }
        if (done) break;
      }
      any |= done;
    }
    return any;
  }

  bool scan_relocate() {
    bool any = false;
    const int span = length_ - 1;
    const bool full = length_ <= 200;
    const int offset = start_offset(span);
    for (int step = 0; step < span && !stopped(); ++step) {
      const int p = 1 + (offset + step) % span;
      auto try_at = [&](int j) {
        if (j < 0 || j >= length_ || j == p || j == p - 1) return false;
        Move m;
        m.kind = MoveKind::kRelocate;
        m.i = p;
        m.len = 1;
        m.j = j;
        return attempt(m);
      };
      bool done = false;
      if (full) {
        for (int j = 0; j < length_ && !done && !stopped(); ++j) done = try_at(j);
      } else {
        for (int nb : neighbors(tour_.order[static_cast<std::size_t>(p)])) {
          const int q = pos_[static_cast<std::size_t>(nb)];
          if ((done = try_at(q)) || (done = try_at(q - 1))) break;
        }
      }
      any |= done;
    }
    return any;
  }

  // Enumerates every marker assignment of one color.
  template <typename Fn>
  void for_each_retarget(int color, Fn&& fn) {
    const auto members = graph_.members(color);
    const int self = members[0];
    // Reduced-tour index of the customer and the distance to the segment end.
    int r = 0, seg_end = 0, reduced = 0;
    bool seen_self = false, closed = false;
    for (int node : tour_.order) {
      const bool own = node < graph_.size() && graph_.nodes[static_cast<std::size_t>(node)].color == color;
      if (node == self) {
        r = reduced;
        seen_self = true;
      }
      if (own) continue;
      if (seen_self && !closed && is_depot_node(graph_, node)) {
        seg_end = reduced;
        closed = true;
      }
      ++reduced;
    }
    if (!closed) seg_end = reduced;
    Move m;
    m.kind = MoveKind::kMarkerRetarget;
    m.color = color;
    if (!fn(m)) return;
    for (std::size_t a = 1; a < members.size(); ++a) {
      m.launch = members[a];
      m.retrieval = -1;
      if (!fn(m)) return;
      for (std::size_t b = 1; b < members.size(); ++b) {
        if (b == a) continue;
        m.retrieval = members[b];
        for (int g = 0; g <= seg_end - r; ++g) {
          m.gap = g;
          if (!fn(m)) return;
        }
      }
    }
  }

  bool scan_retarget() {
    bool any = false;
    const int n = graph_.color_count();
    const int offset = start_offset(n);
    for (int step = 0; step < n && !stopped(); ++step) {
      const int c = 1 + (offset + step) % n;
      if (!graph_.eligible(c)) continue;
      bool done = false;
      for_each_retarget(c, [&](Move& m) {
        if (stopped()) return false;
        done = attempt(m);
        return !done;
      });
      any |= done;
    }
    return any;
  }

  void kick(int strength) {
    for (int s = 0; s < strength; ++s) {
      const bool drone_kick = (rng_() & 1u) != 0;
      if (drone_kick && settings_.move_set & static_cast<unsigned>(MoveKind::kMarkerRetarget)) {
        std::vector<int> eligible;
        for (int c = 1; c <= graph_.color_count(); ++c) {
          if (graph_.eligible(c)) eligible.push_back(c);
        }
        if (!eligible.empty()) {
          const int c = eligible[static_cast<std::size_t>(rng_() % eligible.size())];
          std::vector<Move> options;
          for_each_retarget(c, [&](Move& m) {
            options.push_back(m);
            return true;
          });
          Move pick = options[static_cast<std::size_t>(rng_() % options.size())];
          pick.apply(tour_.order, graph_);
          continue;
        }
      }
      double_bridge();
    }
    refresh_positions();
  }

  void double_bridge() {
    const int movable = length_ - 1;
    auto& t = tour_.order;
    if (movable < 2) return;
    if (movable < 8) {
      const int a = 1 + static_cast<int>(rng_() % static_cast<std::uint64_t>(movable));
      const int b = 1 + static_cast<int>(rng_() % static_cast<std::uint64_t>(movable));
      std::swap(t[static_cast<std::size_t>(a)], t[static_cast<std::size_t>(b)]);
      return;
    }
    int cuts[3];
    for (;;) {
      for (int& c : cuts) c = 1 + static_cast<int>(rng_() % static_cast<std::uint64_t>(movable));
      std::sort(std::begin(cuts), std::end(cuts));
      if (cuts[0] < cuts[1] && cuts[1] < cuts[2]) break;
    }
    // A B C D -> A C B D
    std::rotate(t.begin() + cuts[0], t.begin() + cuts[1], t.begin() + cuts[2]);
  }

  const CandidateGraph& graph_;
  const SearchSettings& settings_;
  TourEvaluator eval_;
  std::mt19937_64 rng_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  std::vector<std::vector<int>> neighbors_;
  GiantTour tour_;
  std::vector<int> pos_;
  std::vector<int> best_tour_;
  int length_ = 0;
  double current_ = 0.0;
  double best_ = 0.0;
  std::int64_t evaluations_ = 0;
  bool stop_ = false;
};

}  // namespace

SearchResult solve(const CandidateGraph& graph, const DistanceModel& dm, const VariantConfig& config,
                   const CustomerTable& customers, const SearchSettings& settings) {
  settings.validate();
  config.validate();
  if (graph.capacity_line && graph.drone_count != config.drone_count)
    throw ConfigError(fmt::format("graph declares {} drones, config {}", graph.drone_count, config.drone_count));
  if (graph.vehicles_line && graph.truck_count != config.truck_count)
    throw ConfigError(fmt::format("graph declares {} trucks, config {}", graph.truck_count, config.truck_count));
  if (graph.vehicles_line != config.multi_route())
    throw ConfigError("graph route structure does not match the variant");
  if (customers.count() != graph.color_count()) throw ConfigError("customer table does not match the graph");
  Engine engine(graph, dm, config, customers, settings);
  return engine.run();
}

std::string batch_csv_header(bool timing_columns) {
  return timing_columns ? "instance,variant,objective,feasible,dcus,drones,routes,iter,time_s\n"
                        : "instance,variant,objective,feasible,dcus,drones,routes\n";
}

std::string batch_csv_row(const BatchRow& row, bool timing_columns) {
  std::string line = fmt::format("{},{},{},{},{},{},{}", row.instance, to_string(row.variant), row.objective_text,
                                 row.feasible ? 1 : 0, row.dcus, row.drones, row.routes);
  if (timing_columns) line += fmt::format(",{},{:.3f}", row.iteration_found, row.wall_time);
  line += '\n';
  return line;
}

std::vector<BatchRow> run_batch(const std::vector<BatchItem>& items, const SearchSettings& settings,
                                const std::filesystem::path& out_dir, const BatchOptions& options) {
  std::vector<BatchRow> rows(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        const BatchItem& item = items[i];
        SearchSettings s = settings;
        s.seed = settings.seed + i;
        const SearchResult res = solve(item.graph, item.dm, item.config, item.customers, s);
        BatchRow& row = rows[i];
        row.instance = item.name;
        row.variant = item.config.variant;
        row.objective = res.best_solution.objective;
        row.objective_text = objective_stem(row.objective, item.config.objective, options.scale);
        row.feasible = res.best_penalty.feasible();
        row.dcus = res.best_solution.drone_customers();
        row.drones = res.best_solution.drones_used();
        row.routes = res.best_solution.routes_used();
        row.iteration_found = res.iteration_found;
        row.wall_time = res.wall_time;
        if (!out_dir.empty())
          row.tour_file = write_outtour(res.best_tour, row.objective, item.config.objective, options.scale, item.name, out_dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.parallelism, static_cast<int>(items.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace sidekick
