#include "adplan/adgraph.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "json.hpp"

namespace adplan {

std::string to_string(RegionReason r) {
  switch (r) {
    case RegionReason::start: return "start";
    case RegionReason::most_progress: return "most_progress";
    case RegionReason::discrepancy: return "discrepancy";
  }
  return "unknown";
}

TimeLowerBoundMap compute_time_lower_bounds(const Lattice& lattice, StateLD start) {
  const GridMap& m = lattice.map();
  TimeLowerBoundMap tlb(m.width(), m.height());
  if (!lattice.ld_free(start.x, start.y)) return tlb;
  const double v = lattice.cost_model().max_speed;
  const double dt = lattice.scenario().dt();
  std::vector<double> time(m.cell_count(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  time[m.index(start.x, start.y)] = 0.0;
  open.push({0.0, m.index(start.x, start.y)});
  std::vector<LdEdge> edges;
  const auto w = static_cast<std::size_t>(m.width());
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d != time[idx]) continue;
    const StateLD s{static_cast<int>(idx % w), static_cast<int>(idx / w)};
    tlb.set(s.x, s.y, static_cast<std::int64_t>(std::floor(d / dt + 1e-9)));
    lattice.ld_successors(s, edges);
    for (const LdEdge& e : edges) {
      const bool diagonal = e.to.x != s.x && e.to.y != s.y;
      const double nd = d + (diagonal ? std::numbers::sqrt2 : 1.0) / v;
      const std::size_t j = m.index(e.to.x, e.to.y);
      if (nd < time[j]) {
        time[j] = nd;
        open.push({nd, j});
      }
    }
  }
  return tlb;
}

AdaptiveGraph::AdaptiveGraph(const Lattice& lattice, const StateHD& start, StateLD goal, RegionParams params)
    : lattice_(&lattice), start_(start), goal_(goal), params_(params) {
  const GridMap& m = lattice.map();
  if (m.width() > kMaxMapSide || m.height() > kMaxMapSide) throw std::invalid_argument("map too large for state keys");
  if (lattice.horizon() > kMaxHorizonSteps) throw std::invalid_argument("time horizon too large for state keys");
  if (!(params.new_radius > 0.0) || !(params.grow_increment > 0.0)) throw std::invalid_argument("region radii must be positive");
  tlb_ = compute_time_lower_bounds(lattice, project(start));
  covered_.assign(m.cell_count(), 0);
  add_region(project(start), RegionReason::start, 0);
}

void AdaptiveGraph::paint(const HDRegion& region) {
  const GridMap& m = lattice_->map();
  const int r = static_cast<int>(std::ceil(region.radius));
  for (int y = std::max(0, region.center.y - r); y <= std::min(m.height() - 1, region.center.y + r); ++y) {
    for (int x = std::max(0, region.center.x - r); x <= std::min(m.width() - 1, region.center.x + r); ++x) {
      if (!region.contains(x, y)) continue;
      std::uint8_t& c = covered_[m.index(x, y)];
      if (c == 0) {
        c = 1;
        ++covered_count_;
      }
    }
  }
}

RegionAction AdaptiveGraph::add_region(StateLD center, RegionReason reason, int iteration) {
  regions_.push_back({center, params_.new_radius});
  paint(regions_.back());
  RegionAction a{iteration, false, regions_.size() - 1, center, params_.new_radius, reason};
  actions_.push_back(a);
  return a;
}

RegionAction AdaptiveGraph::grow_region(StateLD center, RegionReason reason, int iteration, bool until_new_coverage) {
  std::size_t best = regions_.size();
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (!regions_[i].contains(center.x, center.y)) continue;
    const double dx = center.x - regions_[i].center.x;
    const double dy = center.y - regions_[i].center.y;
    if (dx * dx + dy * dy < best_d2) {
      best_d2 = dx * dx + dy * dy;
      best = i;
    }
  }
  if (best == regions_.size()) return add_region(center, reason, iteration);
  const GridMap& m = lattice_->map();
  const double span = std::hypot(m.width(), m.height());
  const std::size_t before = covered_count_;
  do {
    regions_[best].radius += params_.grow_increment;
    paint(regions_[best]);
  } while (until_new_coverage && covered_count_ == before && regions_[best].radius <= span);
  RegionAction a{iteration, true, best, regions_[best].center, regions_[best].radius, reason};
  actions_.push_back(a);
  return a;
}

InverseProjection AdaptiveGraph::inverse_project(StateLD cell) const {
  if (!lattice_->map().in_bounds(cell.x, cell.y) || !tlb_.reachable(cell.x, cell.y)) return {};
  return {cell, tlb_.at(cell.x, cell.y), lattice_->horizon()};
}

void AdaptiveGraph::successors(const AdState& s, std::vector<Edge<AdState>>& out) const {
  out.clear();
  const Lattice& lat = *lattice_;
  const auto& prims = lat.primitives().all();
  const std::int64_t horizon = lat.horizon();

  if (s.hd) {
    for (int idx : lat.primitives().for_heading(s.heading)) {
      const MotionPrimitive& p = prims[static_cast<std::size_t>(idx)];
      const std::int64_t t2 = s.t + p.duration;
      if (t2 > horizon) continue;
      if (!lat.static_transition_free(s.x, s.y, idx)) continue;
      const int nx = s.x + p.dx;
      const int ny = s.y + p.dy;
      if (cell_is_hd(nx, ny)) {
        // Dynamic obstacles exist only for HD-to-HD transitions.
        if (t2 < tlb_.at(nx, ny)) continue;
        if (!lat.dynamic_transition_free(s.x, s.y, s.t, p)) continue;
        out.push_back({AdState{nx, ny, p.end_heading, t2, true}, p.cost, 1});
      } else {
        out.push_back({AdState::low({nx, ny}), p.cost, 1});
      }
    }
    return;
  }

  thread_local std::vector<LdEdge> ld;
  lat.ld_successors(s.cell(), ld);
  for (const LdEdge& e : ld) {
    if (!cell_is_hd(e.to.x, e.to.y)) out.push_back({AdState::low(e.to), e.cost, 1});
  }

  // Transitions from the pruned pre-images of s into HD cells. Each
  // (heading, primitive) yields one run of states that differ only in time.
  const InverseProjection pre = inverse_project(s.cell());
  if (pre.empty()) return;
  for (int h = 0; h < kNumHeadings; ++h) {
    for (int idx : lat.primitives().for_heading(h)) {
      const MotionPrimitive& p = prims[static_cast<std::size_t>(idx)];
      const int nx = s.x + p.dx;
      const int ny = s.y + p.dy;
      if (!cell_is_hd(nx, ny)) continue;
      if (!lat.static_transition_free(s.x, s.y, idx)) continue;
      if (!tlb_.reachable(nx, ny)) continue;
      const std::int64_t first = std::max(pre.t_min() + p.duration, tlb_.at(nx, ny));
      const std::int64_t last = std::min(pre.t_max() + p.duration, horizon);
      if (first > last) continue;
      out.push_back({AdState{nx, ny, p.end_heading, first, true}, p.cost, static_cast<std::int32_t>(last - first + 1)});
    }
  }
}

std::string AdaptiveGraph::region_trace_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const RegionAction& a : actions_) {
    j.push_back({{"iteration", a.iteration},
                 {"action", a.grew ? "grow" : "add"},
                 {"region", a.region},
                 {"center", {a.center.x, a.center.y}},
                 {"radius", a.radius},
                 {"reason", to_string(a.reason)}});
  }
  return j.dump(1) + "\n";
}

}  // namespace adplan
