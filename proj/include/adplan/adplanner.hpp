#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adplan/adgraph.hpp"
#include "adplan/lattice.hpp"
#include "adplan/search.hpp"

namespace adplan {

enum class PlanStatus { found, no_path_within_horizon, resource_exhausted };
std::string to_string(PlanStatus s);

/// How the failure point of an infeasible tunnel is chosen.
enum class ProgressRule {
  min_heuristic,  // expanded state closest to the goal by heuristic
  start_cell,     // always re-center on the start
};

/// How the region for a too-expensive tunnel path is placed.
enum class DiscrepancyRule {
  largest_increase,    // shared cell where the cost gap grows the most
  largest_difference,  // shared cell with the largest cumulative cost gap
};

struct PlannerConfig {
  double epsilon_plan{1.0};
  double epsilon_track{1.0};
  int tunnel_width{10};
  double new_region_radius{20.0};
  double grow_increment{10.0};
  std::chrono::duration<double> timeout{300.0};
  int max_iterations{200};
  std::uint64_t max_nodes{0};  // per search, 0 = unlimited
  // Tracking expansions allowed per tunnel (cell, heading) pair before the
  // tunnel is treated as infeasible. 0 = unlimited.
  double tracking_budget{1.0};
  ProgressRule progress_rule{ProgressRule::min_heuristic};
  DiscrepancyRule discrepancy_rule{DiscrepancyRule::largest_increase};

  /// Splits an overall bound as sqrt(epsilon) for both phases.
  static PlannerConfig with_epsilon(double epsilon);
};

struct PhaseRecord {
  SearchStatus status{SearchStatus::exhausted};
  Cost cost{0};
  std::size_t path_length{0};
  SearchStats stats;
};

struct IterationRecord {
  int iteration{0};
  PhaseRecord planning;
  std::optional<PhaseRecord> tracking;
  std::optional<RegionAction> action;
  std::size_t covered_before{0};
  std::size_t covered_after{0};
  bool discrepancy_fallback{false};
  bool tracking_budget_hit{false};
};

struct PlanOutcome {
  std::string planner;
  PlanStatus status{PlanStatus::resource_exhausted};
  std::vector<StateHD> path;
  Cost cost{0};
  int iterations{0};
  bool hit_iteration_cap{false};
  std::vector<IterationRecord> trace;
  std::vector<RegionAction> regions;
  SearchStats stats;
  // Last planning-phase path, projected to cells; kept for inspection.
  std::vector<StateLD> planning_cells;
  Cost planning_cost{0};
};

/// Cell set around a projected path, minus occupied cells.
class Tunnel {
 public:
  Tunnel(const GridMap& map, std::span<const StateLD> path_cells, int width);

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ &&
           cells_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)] != 0;
  }
  std::size_t size() const { return count_; }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> cells_;
  std::size_t count_{0};
};

Tunnel build_tunnel(const GridMap& map, std::span<const AdState> planning_path, int width);

/// HD lattice restricted to the tunnel cells, with full collision checks.
class TunnelSpace {
 public:
  using State = StateHD;

  TunnelSpace(const Lattice& lattice, const Tunnel& tunnel) : lattice_(&lattice), tunnel_(&tunnel) {}

  std::uint64_t key(const StateHD& s) const { return pack_state_key(s.x, s.y, true, s.heading, s.t); }
  bool is_hd(const StateHD&) const { return true; }
  void successors(const StateHD& s, std::vector<Edge<StateHD>>& out) const;

 private:
  const Lattice* lattice_;
  const Tunnel* tunnel_;
};

/// Full HD lattice, every transition checked against all obstacles.
class FullSpace {
 public:
  using State = StateHD;

  explicit FullSpace(const Lattice& lattice) : lattice_(&lattice) {}

  std::uint64_t key(const StateHD& s) const { return pack_state_key(s.x, s.y, true, s.heading, s.t); }
  bool is_hd(const StateHD&) const { return true; }
  void successors(const StateHD& s, std::vector<Edge<StateHD>>& out) const;

 private:
  const Lattice* lattice_;
};

/// Cell of the failed tracking search that came closest to the goal, or
/// `start` when nothing was expanded.
StateLD find_most_progress(const SearchResult<StateHD>& tracking, StateLD start,
                           ProgressRule rule = ProgressRule::min_heuristic);

struct CostedCell {
  StateLD cell;
  Cost g{0};
};

/// Aligns both paths on shared cells in planning-path order and returns the
/// cell chosen by `rule`. Sets *fallback and returns the planning path's
/// midpoint cell when the paths share no cell beyond the start.
StateLD find_discrepancy(std::span<const CostedCell> tunnel_path, std::span<const CostedCell> planning_path,
                         DiscrepancyRule rule = DiscrepancyRule::largest_increase, bool* fallback = nullptr);

/// Adaptive-dimensionality planner. The start must have t = 0 and a free
/// footprint; throws std::invalid_argument otherwise or when the goal cell is
/// not 2D-free.
PlanOutcome plan(const Lattice& lattice, const StateHD& start, StateLD goal, const PlannerConfig& config);
/// Same, reusing a heuristic computed for `goal`.
PlanOutcome plan(const Lattice& lattice, const HeuristicMap& heuristic, const StateHD& start, StateLD goal,
                 const PlannerConfig& config);

struct Validation {
  bool ok{false};
  std::string reason;

  explicit operator bool() const { return ok; }
};

/// Replays a found path through the world predicates using the primitive
/// table alone: endpoints, time monotonicity, primitive match, horizon,
/// cost, and collisions at every swept sample.
Validation validate_outcome(const Scenario& scenario, const MotionPrimitiveSet& primitives, const StateHD& start,
                            StateLD goal, const PlanOutcome& outcome);

/// Per-iteration costs, counters and region actions as JSON.
std::string plan_trace_json(const PlanOutcome& outcome);

}  // namespace adplan
