#include "adplan/adplanner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace adplan {

std::string to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::found: return "found";
    case PlanStatus::no_path_within_horizon: return "no_path_within_horizon";
    case PlanStatus::resource_exhausted: return "resource_exhausted";
  }
  return "unknown";
}

PlannerConfig PlannerConfig::with_epsilon(double epsilon) {
  if (!(epsilon >= 1.0)) throw std::invalid_argument("epsilon must be >= 1");
  PlannerConfig c;
  c.epsilon_plan = std::sqrt(epsilon);
  c.epsilon_track = std::sqrt(epsilon);
  return c;
}

Tunnel::Tunnel(const GridMap& map, std::span<const StateLD> path_cells, int width)
    : width_(map.width()), height_(map.height()), cells_(map.cell_count(), 0) {
  if (width < 0) throw std::invalid_argument("tunnel width must be non-negative");
  const long long w2 = static_cast<long long>(width) * width;
  for (const StateLD& c : path_cells) {
    for (int y = std::max(0, c.y - width); y <= std::min(height_ - 1, c.y + width); ++y) {
      for (int x = std::max(0, c.x - width); x <= std::min(width_ - 1, c.x + width); ++x) {
        const long long dx = x - c.x;
        const long long dy = y - c.y;
        if (dx * dx + dy * dy > w2 || map.occupied(x, y)) continue;
        std::uint8_t& slot = cells_[map.index(x, y)];
        if (slot == 0) {
          slot = 1;
          ++count_;
        }
      }
    }
  }
}

Tunnel build_tunnel(const GridMap& map, std::span<const AdState> planning_path, int width) {
  if (planning_path.empty()) throw std::invalid_argument("empty planning path");
  std::vector<StateLD> cells;
  cells.reserve(planning_path.size());
  for (const AdState& s : planning_path) cells.push_back(s.cell());
  return Tunnel(map, cells, width);
}

void TunnelSpace::successors(const StateHD& s, std::vector<Edge<StateHD>>& out) const {
  out.clear();
  thread_local std::vector<HdEdge> hd;
  lattice_->hd_successors(s, hd);
  for (const HdEdge& e : hd) {
    if (tunnel_->contains(e.to.x, e.to.y)) out.push_back({e.to, e.cost, 1});
  }
}

void FullSpace::successors(const StateHD& s, std::vector<Edge<StateHD>>& out) const {
  out.clear();
  thread_local std::vector<HdEdge> hd;
  lattice_->hd_successors(s, hd);
  for (const HdEdge& e : hd) out.push_back({e.to, e.cost, 1});
}

StateLD find_most_progress(const SearchResult<StateHD>& tracking, StateLD start, ProgressRule rule) {
  if (rule == ProgressRule::start_cell || !tracking.frontier_best) return start;
  return project(*tracking.frontier_best);
}

StateLD find_discrepancy(std::span<const CostedCell> tunnel_path, std::span<const CostedCell> planning_path,
                         DiscrepancyRule rule, bool* fallback) {
  if (fallback) *fallback = false;
  if (planning_path.empty()) throw std::invalid_argument("empty planning path");
  std::size_t cursor = 0;
  Cost prev_diff = 0;
  std::optional<StateLD> best;
  Cost best_score = 0;
  for (std::size_t i = 1; i < planning_path.size(); ++i) {
    const StateLD cell = planning_path[i].cell;
    std::size_t k = cursor;
    while (k < tunnel_path.size() && tunnel_path[k].cell != cell) ++k;
    if (k == tunnel_path.size()) continue;
    cursor = k;
    const Cost diff = tunnel_path[k].g - planning_path[i].g;
    const Cost score = rule == DiscrepancyRule::largest_increase ? diff - prev_diff : diff;
    if (!best || score > best_score) {
      best = cell;
      best_score = score;
    }
    prev_diff = diff;
  }
  if (best) return *best;
  if (fallback) *fallback = true;
  return planning_path[planning_path.size() / 2].cell;
}

namespace {

PhaseRecord record(const auto& result) {
  return {result.status, result.cost, result.path.size(), result.stats};
}

void check_start(const Lattice& lattice, const StateHD& start) {
  if (start.t != 0) throw std::invalid_argument("start time must be 0");
  if (start.heading < 0 || start.heading >= kNumHeadings) throw std::invalid_argument("start heading out of range");
  if (!lattice.map().in_bounds(start.x, start.y) || !lattice.pose_free(start.x, start.y, start.heading)) {
    throw std::invalid_argument("start blocked");
  }
}

}  // namespace

PlanOutcome plan(const Lattice& lattice, const StateHD& start, StateLD goal, const PlannerConfig& config) {
  check_start(lattice, start);
  return plan(lattice, dijkstra_heuristic(lattice, goal), start, goal, config);
}

PlanOutcome plan(const Lattice& lattice, const HeuristicMap& heuristic, const StateHD& start, StateLD goal,
                 const PlannerConfig& config) {
  check_start(lattice, start);
  if (!(config.epsilon_plan >= 1.0) || !(config.epsilon_track >= 1.0)) {
    throw std::invalid_argument("epsilon must be >= 1");
  }
  if (config.max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");

  const auto t_begin = std::chrono::steady_clock::now();
  SearchLimits limits;
  limits.deadline = t_begin + std::chrono::duration_cast<std::chrono::steady_clock::duration>(config.timeout);
  limits.max_nodes = config.max_nodes;

  PlanOutcome out;
  out.planner = "ad";
  AdaptiveGraph graph(lattice, start, goal, {config.new_region_radius, config.grow_increment});
  const StateLD start_cell = project(start);

  auto finish = [&](PlanStatus status) -> PlanOutcome& {
    out.status = status;
    out.regions = graph.actions();
    out.stats.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return out;
  };

  auto is_goal_ad = [&](const AdState& s) { return s.x == goal.x && s.y == goal.y; };
  auto h_ad = [&](const AdState& s) { return heuristic.at(s.x, s.y); };
  auto is_goal_hd = [&](const StateHD& s) { return s.x == goal.x && s.y == goal.y; };
  auto h_hd = [&](const StateHD& s) { return heuristic.at(s.x, s.y); };

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    out.iterations = iter;
    IterationRecord rec;
    rec.iteration = iter;
    rec.covered_before = graph.covered_cells();

    const auto planning = weighted_astar(graph, AdState::high(start), is_goal_ad, h_ad, config.epsilon_plan, limits);
    rec.planning = record(planning);
    out.stats += planning.stats;
    if (!planning.found()) {
      rec.covered_after = graph.covered_cells();
      out.trace.push_back(rec);
      return finish(planning.status == SearchStatus::exhausted ? PlanStatus::no_path_within_horizon
                                                               : PlanStatus::resource_exhausted);
    }
    out.planning_cells.clear();
    for (const AdState& s : planning.path) out.planning_cells.push_back(s.cell());
    out.planning_cost = planning.cost;

    const Tunnel tunnel = build_tunnel(lattice.map(), planning.path, config.tunnel_width);
    const TunnelSpace space(lattice, tunnel);
    SearchLimits track_limits = limits;
    if (config.tracking_budget > 0.0) {
      track_limits.max_expansions = static_cast<std::uint64_t>(
          std::ceil(config.tracking_budget * static_cast<double>(tunnel.size() * kNumHeadings)));
    }
    const auto tracking = weighted_astar(space, start, is_goal_hd, h_hd, config.epsilon_plan, track_limits);
    rec.tracking = record(tracking);
    out.stats += tracking.stats;
    rec.tracking_budget_hit = tracking.status == SearchStatus::resource_exhausted && track_limits.max_expansions != 0 &&
                              tracking.stats.hd_expansions >= track_limits.max_expansions;
    if (tracking.status == SearchStatus::resource_exhausted && !rec.tracking_budget_hit) {
      rec.covered_after = graph.covered_cells();
      out.trace.push_back(rec);
      return finish(PlanStatus::resource_exhausted);
    }

    RegionAction action;
    if (!tracking.found()) {
      const StateLD x_end = find_most_progress(tracking, start_cell, config.progress_rule);
      action = graph.cell_is_hd(x_end.x, x_end.y)
                   ? graph.grow_region(x_end, RegionReason::most_progress, iter, true)
                   : graph.add_region(x_end, RegionReason::most_progress, iter);
    } else if (static_cast<double>(tracking.cost) > config.epsilon_track * static_cast<double>(planning.cost)) {
      std::vector<CostedCell> tp;
      std::vector<CostedCell> pp;
      for (std::size_t i = 0; i < tracking.path.size(); ++i) tp.push_back({project(tracking.path[i]), tracking.path_g[i]});
      for (std::size_t i = 0; i < planning.path.size(); ++i) pp.push_back({planning.path[i].cell(), planning.path_g[i]});
      const StateLD x_r = find_discrepancy(tp, pp, config.discrepancy_rule, &rec.discrepancy_fallback);
      action = graph.cell_is_hd(x_r.x, x_r.y) ? graph.grow_region(x_r, RegionReason::discrepancy, iter, true)
                                              : graph.add_region(x_r, RegionReason::discrepancy, iter);
    } else {
      out.path = tracking.path;
      out.cost = tracking.cost;
      rec.covered_after = graph.covered_cells();
      out.trace.push_back(rec);
      return finish(PlanStatus::found);
    }

    rec.action = action;
    rec.covered_after = graph.covered_cells();
    out.trace.push_back(rec);
    // A region that already spans the map cannot change the graph again.
    if (rec.covered_after == rec.covered_before) return finish(PlanStatus::resource_exhausted);
    if (std::chrono::steady_clock::now() >= *limits.deadline) return finish(PlanStatus::resource_exhausted);
  }
  out.hit_iteration_cap = true;
  return finish(PlanStatus::resource_exhausted);
}

Validation validate_outcome(const Scenario& scenario, const MotionPrimitiveSet& primitives, const StateHD& start,
                            StateLD goal, const PlanOutcome& outcome) {
  auto fail = [](std::string reason) { return Validation{false, std::move(reason)}; };
  if (outcome.status != PlanStatus::found) return fail("status is not found");
  const auto& path = outcome.path;
  if (path.empty()) return fail("empty path");
  if (path.front() != start) return fail("path does not begin at the start state");
  if (path.back().x != goal.x || path.back().y != goal.y) return fail("path does not end in the goal cell");

  const GridMap& map = scenario.map();
  const double cs = map.cell_size();
  const double dt = scenario.dt();
  auto center = [&](int x, int y) { return Vec2{(x + 0.5) * cs, (y + 0.5) * cs}; };
  auto pose_clear = [&](const Pose& p, std::int64_t step) {
    return !static_collision(scenario, p) && !dynamic_collision(scenario, p, static_cast<double>(step) * dt);
  };

  {
    const Vec2 c = center(start.x, start.y);
    if (!pose_clear({c.x, c.y, heading_angle(start.heading)}, 0)) return fail("start pose collides");
  }
  Cost total = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const StateHD& a = path[i - 1];
    const StateHD& b = path[i];
    if (b.t <= a.t) return fail("time does not increase at step " + std::to_string(i));
    if (b.t > scenario.time_horizon_steps()) return fail("time exceeds horizon at step " + std::to_string(i));
    if (a.heading < 0 || a.heading >= kNumHeadings) return fail("heading out of range at step " + std::to_string(i));
    const MotionPrimitive* match = nullptr;
    for (int idx : primitives.for_heading(a.heading)) {
      const MotionPrimitive& p = primitives.all()[static_cast<std::size_t>(idx)];
      if (p.dx == b.x - a.x && p.dy == b.y - a.y && p.end_heading == b.heading && p.duration == b.t - a.t) {
        match = &p;
        break;
      }
    }
    if (!match) return fail("no primitive connects step " + std::to_string(i));
    const Vec2 c = center(a.x, a.y);
    for (std::size_t k = 0; k < match->poses.size(); ++k) {
      const Pose& q = match->poses[k];
      if (!pose_clear({c.x + q.x * cs, c.y + q.y * cs, q.theta}, a.t + static_cast<std::int64_t>(k))) {
        return fail("collision during step " + std::to_string(i));
      }
    }
    total += match->cost;
  }
  if (total != outcome.cost) return fail("reported cost differs from the replayed cost");
  return {true, {}};
}

namespace {

nlohmann::json phase_json(const PhaseRecord& r) {
  const char* status = r.status == SearchStatus::found       ? "found"
                       : r.status == SearchStatus::exhausted ? "exhausted"
                                                              : "resource_exhausted";
  return {{"status", status},
          {"cost", r.status == SearchStatus::found ? nlohmann::json(r.cost) : nlohmann::json(nullptr)},
          {"path_length", r.path_length},
          {"hd_expansions", r.stats.hd_expansions},
          {"ld_expansions", r.stats.ld_expansions}};
}

}  // namespace

std::string plan_trace_json(const PlanOutcome& outcome) {
  nlohmann::json j;
  j["planner"] = outcome.planner;
  j["status"] = to_string(outcome.status);
  j["cost"] = outcome.status == PlanStatus::found ? nlohmann::json(outcome.cost) : nlohmann::json(nullptr);
  j["iterations"] = outcome.iterations;
  j["hd_expansions"] = outcome.stats.hd_expansions;
  j["ld_expansions"] = outcome.stats.ld_expansions;
  nlohmann::json iters = nlohmann::json::array();
  for (const IterationRecord& r : outcome.trace) {
    nlohmann::json it{{"iteration", r.iteration}, {"planning", phase_json(r.planning)}};
    it["tracking"] = r.tracking ? phase_json(*r.tracking) : nlohmann::json(nullptr);
    if (r.action) {
      it["region"] = {{"action", r.action->grew ? "grow" : "add"},
                      {"region", r.action->region},
                      {"center", {r.action->center.x, r.action->center.y}},
                      {"radius", r.action->radius},
                      {"reason", to_string(r.action->reason)}};
    } else {
      it["region"] = nullptr;
    }
    it["covered_cells"] = r.covered_after;
    if (r.discrepancy_fallback) it["discrepancy_fallback"] = true;
    if (r.tracking_budget_hit) it["tracking_budget_hit"] = true;
    iters.push_back(std::move(it));
  }
  j["trace"] = std::move(iters);
  nlohmann::json regions = nlohmann::json::array();
  for (const RegionAction& a : outcome.regions) {
    regions.push_back({{"iteration", a.iteration},
                       {"action", a.grew ? "grow" : "add"},
                       {"region", a.region},
                       {"center", {a.center.x, a.center.y}},
                       {"radius", a.radius},
                       {"reason", to_string(a.reason)}});
  }
  j["regions"] = std::move(regions);
  nlohmann::json path = nlohmann::json::array();
  for (const StateHD& s : outcome.path) path.push_back({s.x, s.y, s.heading, s.t});
  j["path"] = std::move(path);
  return j.dump(1) + "\n";
}

}  // namespace adplan
