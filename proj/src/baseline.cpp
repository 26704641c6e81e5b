#include "adplan/baseline.hpp"

#include <stdexcept>

namespace adplan {

PlanOutcome plan_full(const Lattice& lattice, const StateHD& start, StateLD goal, const BaselineConfig& config) {
  return plan_full(lattice, dijkstra_heuristic(lattice, goal), start, goal, config);
}

PlanOutcome plan_full(const Lattice& lattice, const HeuristicMap& heuristic, const StateHD& start, StateLD goal,
                      const BaselineConfig& config) {
  if (start.t != 0) throw std::invalid_argument("start time must be 0");
  if (start.heading < 0 || start.heading >= kNumHeadings) throw std::invalid_argument("start heading out of range");
  if (!lattice.map().in_bounds(start.x, start.y) || !lattice.pose_free(start.x, start.y, start.heading)) {
    throw std::invalid_argument("start blocked");
  }
  if (!(config.epsilon >= 1.0)) throw std::invalid_argument("epsilon must be >= 1");

  SearchLimits limits;
  limits.deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(config.timeout);
  limits.max_nodes = config.max_nodes;

  const FullSpace space(lattice);
  const auto result = weighted_astar(
      space, start, [&](const StateHD& s) { return s.x == goal.x && s.y == goal.y; },
      [&](const StateHD& s) { return heuristic.at(s.x, s.y); }, config.epsilon, limits);

  PlanOutcome out;
  out.planner = "baseline";
  out.iterations = 1;
  out.stats = result.stats;
  IterationRecord rec;
  rec.iteration = 1;
  rec.planning = {result.status, result.cost, result.path.size(), result.stats};
  out.trace.push_back(rec);
  switch (result.status) {
    case SearchStatus::found:
      out.status = PlanStatus::found;
      out.path = result.path;
      out.cost = result.cost;
      break;
    case SearchStatus::exhausted: out.status = PlanStatus::no_path_within_horizon; break;
    case SearchStatus::resource_exhausted: out.status = PlanStatus::resource_exhausted; break;
  }
  return out;
}

}  // namespace adplan
