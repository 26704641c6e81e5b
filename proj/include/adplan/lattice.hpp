#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adplan/world.hpp"

namespace adplan {

using Cost = std::int64_t;
inline constexpr Cost kInfiniteCost = std::numeric_limits<Cost>::max();
inline constexpr int kNumHeadings = 16;

double heading_angle(int heading);

/// (x, y) cell of the 2D lattice.
struct StateLD {
  int x{0};
  int y{0};

  friend auto operator<=>(const StateLD&, const StateLD&) = default;
};

/// (x, y, heading index, time step) state of the space-time lattice.
struct StateHD {
  int x{0};
  int y{0};
  int heading{0};
  std::int64_t t{0};

  friend auto operator<=>(const StateHD&, const StateHD&) = default;
};

struct CostModel {
  double max_speed{1.0};  // cells per second
  Cost cost_scale{1000};  // cost units per second

  /// 2D edge cost for a move of `cells` cell lengths at max speed.
  Cost ld_cost(double cells) const;
};

struct MotionPrimitive {
  int start_heading{0};
  int dx{0};
  int dy{0};
  int end_heading{0};
  int duration{1};          // time steps
  std::vector<Pose> poses;  // duration + 1 samples, local frame, cell units
  Cost cost{0};
  double reach{0};          // max distance of any sample from the origin, cells
};

/// Primitive table indexed by start heading. Immutable once built.
class MotionPrimitiveSet {
 public:
  /// Per heading: straight move plus arcs turning by one heading index each way.
  static MotionPrimitiveSet make_default(double dt, const CostModel& cost);
  /// JSON list of {start_heading, dx, dy, end_heading, duration_steps, poses}.
  /// Throws std::runtime_error when a primitive violates its invariants.
  static MotionPrimitiveSet from_json(const std::string& text, double dt, const CostModel& cost);
  std::string to_json() const;

  const std::vector<MotionPrimitive>& all() const { return all_; }
  /// Global indices (into all()) of the primitives starting at `heading`.
  std::span<const int> for_heading(int heading) const { return by_heading_[static_cast<std::size_t>(heading)]; }

 private:
  void index();

  std::vector<MotionPrimitive> all_;
  std::vector<std::vector<int>> by_heading_;
};

struct LdEdge {
  StateLD to;
  Cost cost{0};
};

struct HdEdge {
  StateHD to;
  Cost cost{0};
  int primitive{-1};
};

/// Successor generation for both lattices over one scenario.
///
/// Static transition validity is memoized per (cell, primitive) in relaxed
/// atomics, so a Lattice can be shared between threads.
class Lattice {
 public:
  Lattice(const Scenario& scenario, MotionPrimitiveSet primitives, CostModel cost = {});
  Lattice(const Lattice&) = delete;
  Lattice& operator=(const Lattice&) = delete;

  const Scenario& scenario() const { return *scenario_; }
  const GridMap& map() const { return scenario_->map(); }
  const MotionPrimitiveSet& primitives() const { return primitives_; }
  const CostModel& cost_model() const { return cost_; }
  std::int64_t horizon() const { return scenario_->time_horizon_steps(); }

  /// Cell is traversable in the 2D lattice: no occupied cell or map edge
  /// closer to its center than the inscribed radius.
  bool ld_free(int x, int y) const {
    return map().in_bounds(x, y) && ld_free_[map().index(x, y)] != 0;
  }
  /// Footprint at the cell center with this heading is statically free.
  bool pose_free(int x, int y, int heading) const;

  void ld_successors(StateLD s, std::vector<LdEdge>& out) const;
  /// Successors with static and dynamic collision checks on every sample.
  void hd_successors(const StateHD& s, std::vector<HdEdge>& out) const;

  bool static_transition_free(int x, int y, int primitive) const;
  bool dynamic_transition_free(int x, int y, std::int64_t t, const MotionPrimitive& p) const;

  /// World-frame swept samples of primitive p applied at (x, y, t).
  void swept_poses(int x, int y, std::int64_t t, const MotionPrimitive& p, std::vector<StampedPose>& out) const;
  Pose cell_pose(int x, int y, double theta) const;

 private:
  const Scenario* scenario_;
  MotionPrimitiveSet primitives_;
  CostModel cost_;
  std::vector<std::uint8_t> ld_free_;
  // 0 = unknown, 1 = free, 2 = blocked.
  std::unique_ptr<std::atomic<std::uint8_t>[]> static_cache_;
};

struct DominanceReport {
  bool holds{true};
  std::size_t checked{0};
  std::size_t skipped{0};  // pairs unreachable in either lattice
  std::size_t strict{0};   // pairs where the 4D cost is strictly larger
};

/// For each pair, compares the optimal 2D cost between the projected cells
/// with the optimal 4D cost from the first state to the second state's cell
/// and heading, both by exhaustive Dijkstra. The 4D search ignores dynamic
/// obstacles and the horizon; its cost lower-bounds the cost of reaching
/// the exact target time, so passing here implies the timed inequality.
DominanceReport check_cost_dominance(const Lattice& lattice, std::span<const std::pair<StateHD, StateHD>> pairs);

/// Optimal 2D cost between two cells (kInfiniteCost if unreachable).
Cost ld_optimal_cost(const Lattice& lattice, StateLD from, StateLD to);
/// Optimal static-only 4D cost from `from` to any state at (to.x, to.y, to.heading).
Cost hd_optimal_static_cost(const Lattice& lattice, const StateHD& from, const StateHD& to);

}  // namespace adplan
