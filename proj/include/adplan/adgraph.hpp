#pragma once

// The adaptive-dimensionality graph: a 2D lattice everywhere except inside
// circular regions, where states carry heading and time.

#include <cstdint>
#include <string>
#include <vector>

#include "adplan/lattice.hpp"
#include "adplan/search.hpp"

namespace adplan {

/// Mixed-dimensional state. Low-dimensional states carry no heading or time
/// (both held at 0).
struct AdState {
  int x{0};
  int y{0};
  int heading{0};
  std::int64_t t{0};
  bool hd{false};

  static AdState low(StateLD s) { return {s.x, s.y, 0, 0, false}; }
  static AdState high(const StateHD& s) { return {s.x, s.y, s.heading, s.t, true}; }
  StateLD cell() const { return {x, y}; }
  StateHD as_hd() const { return {x, y, heading, t}; }

  friend bool operator==(const AdState&, const AdState&) = default;
};

inline StateLD project(const StateHD& s) { return {s.x, s.y}; }

/// Packs (x, y, dimensionality, heading, t) so that integer order is
/// lexicographic state order. Limits: 16-bit coordinates, 24-bit time.
inline std::uint64_t pack_state_key(int x, int y, bool hd, int heading, std::int64_t t) {
  return (static_cast<std::uint64_t>(static_cast<std::uint16_t>(x)) << 45) |
         (static_cast<std::uint64_t>(static_cast<std::uint16_t>(y)) << 29) |
         (static_cast<std::uint64_t>(hd ? 1 : 0) << 28) |
         (static_cast<std::uint64_t>(heading & 0xF) << 24) |
         static_cast<std::uint64_t>(t & 0xFFFFFF);
}
inline constexpr std::int64_t kMaxHorizonSteps = 0xFFFFFF;
inline constexpr int kMaxMapSide = 0xFFFF;

struct HDRegion {
  StateLD center;
  double radius{0};

  bool contains(int x, int y) const {
    const double dx = x - center.x;
    const double dy = y - center.y;
    return dx * dx + dy * dy <= radius * radius;
  }
};

/// Per-cell lower bound on arrival time (in steps) from the start, ignoring
/// dynamic obstacles.
class TimeLowerBoundMap {
 public:
  static constexpr std::int64_t kUnreachable = -1;

  TimeLowerBoundMap() = default;
  TimeLowerBoundMap(int width, int height)
      : width_(width), steps_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kUnreachable) {}

  std::int64_t at(int x, int y) const { return steps_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)]; }
  bool reachable(int x, int y) const { return at(x, y) != kUnreachable; }
  void set(int x, int y, std::int64_t v) { steps_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)] = v; }

 private:
  int width_{0};
  std::vector<std::int64_t> steps_;
};

/// Time-optimal 2D Dijkstra from `start` at max speed, floored to whole steps.
TimeLowerBoundMap compute_time_lower_bounds(const Lattice& lattice, StateLD start);

/// Lazy pruned inverse projection of one cell: all (x, y, h, t) with
/// t_dep <= t <= horizon.
class InverseProjection {
 public:
  InverseProjection() = default;
  InverseProjection(StateLD cell, std::int64_t t_min, std::int64_t t_max)
      : cell_(cell), t_min_(t_min), t_max_(t_max) {}

  bool empty() const { return t_min_ > t_max_; }
  std::size_t size() const {
    return empty() ? 0 : static_cast<std::size_t>(kNumHeadings) * static_cast<std::size_t>(t_max_ - t_min_ + 1);
  }
  bool contains(const StateHD& s) const {
    return !empty() && s.x == cell_.x && s.y == cell_.y && s.heading >= 0 && s.heading < kNumHeadings &&
           s.t >= t_min_ && s.t <= t_max_;
  }
  std::int64_t t_min() const { return t_min_; }
  std::int64_t t_max() const { return t_max_; }

  template <class F>
  void for_each(F&& f) const {
    if (empty()) return;
    for (int h = 0; h < kNumHeadings; ++h) {
      for (std::int64_t t = t_min_; t <= t_max_; ++t) f(StateHD{cell_.x, cell_.y, h, t});
    }
  }

 private:
  StateLD cell_;
  std::int64_t t_min_{1};
  std::int64_t t_max_{0};
};

enum class RegionReason { start, most_progress, discrepancy };
std::string to_string(RegionReason r);

struct RegionAction {
  int iteration{0};
  bool grew{false};
  std::size_t region{0};  // index into AdaptiveGraph::regions()
  StateLD center;         // region center after the action
  double radius{0};       // region radius after the action
  RegionReason reason{RegionReason::start};
};

struct RegionParams {
  double new_radius{20.0};
  double grow_increment{10.0};
};

/// Search space over mixed states. Mutated only between searches.
class AdaptiveGraph {
 public:
  using State = AdState;

  /// Computes t_dep from the start cell and adds the start region.
  AdaptiveGraph(const Lattice& lattice, const StateHD& start, StateLD goal, RegionParams params = {});

  const Lattice& lattice() const { return *lattice_; }
  const StateHD& start() const { return start_; }
  StateLD goal() const { return goal_; }
  const RegionParams& params() const { return params_; }
  const TimeLowerBoundMap& tlb() const { return tlb_; }
  const std::vector<HDRegion>& regions() const { return regions_; }
  const std::vector<RegionAction>& actions() const { return actions_; }

  bool cell_is_hd(int x, int y) const {
    return lattice_->map().in_bounds(x, y) && covered_[lattice_->map().index(x, y)] != 0;
  }
  std::size_t covered_cells() const { return covered_count_; }

  /// Appends a region of radius new_radius at `center`.
  RegionAction add_region(StateLD center, RegionReason reason, int iteration = 0);
  /// Grows the containing region (nearest center on ties) by grow_increment;
  /// falls back to add_region when no region contains `center`. With
  /// `until_new_coverage`, keeps growing until at least one more cell is
  /// covered or the region spans the whole map.
  RegionAction grow_region(StateLD center, RegionReason reason, int iteration = 0, bool until_new_coverage = false);

  InverseProjection inverse_project(StateLD cell) const;
  std::string region_trace_json() const;

  /// HD state belongs to the current state set (in a region, within λ⁻¹ of its cell).
  bool contains_hd(const StateHD& s) const { return cell_is_hd(s.x, s.y) && inverse_project(project(s)).contains(s); }

  // Search-space interface.
  std::uint64_t key(const AdState& s) const { return pack_state_key(s.x, s.y, s.hd, s.heading, s.t); }
  bool is_hd(const AdState& s) const { return s.hd; }
  void successors(const AdState& s, std::vector<Edge<AdState>>& out) const;
  AdState advance(const AdState& s, std::int32_t k) const {
    AdState n = s;
    n.t += k;
    return n;
  }

 private:
  void paint(const HDRegion& region);

  const Lattice* lattice_;
  StateHD start_;
  StateLD goal_;
  RegionParams params_;
  TimeLowerBoundMap tlb_;
  std::vector<HDRegion> regions_;
  std::vector<RegionAction> actions_;
  std::vector<std::uint8_t> covered_;
  std::size_t covered_count_{0};
};

}  // namespace adplan
