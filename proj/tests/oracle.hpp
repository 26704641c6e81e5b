#pragma once

// Reference implementations used only by tests. They share the scenario and
// the primitive table with the library but none of its search or caching
// code: every swept sample goes straight to the world predicates.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <unordered_map>
#include <vector>

#include "adplan/lattice.hpp"
#include "adplan/world.hpp"

namespace oracle {

using adplan::Cost;
using adplan::MotionPrimitive;
using adplan::MotionPrimitiveSet;
using adplan::Pose;
using adplan::Scenario;
using adplan::StateHD;
using adplan::StateLD;

inline constexpr Cost kNone = std::numeric_limits<Cost>::max();

class Checker {
 public:
  Checker(const Scenario& s, const MotionPrimitiveSet& prims) : s_(s), prims_(prims) {
    static_.assign(s.map().cell_count() * prims.all().size(), -1);
  }

  bool static_ok(int x, int y, int idx) {
    const std::size_t slot = s_.map().index(x, y) * prims_.all().size() + static_cast<std::size_t>(idx);
    if (static_[slot] < 0) {
      const MotionPrimitive& p = prims_.all()[static_cast<std::size_t>(idx)];
      bool ok = s_.map().in_bounds(x + p.dx, y + p.dy);
      for (const Pose& q : p.poses) {
        if (!ok) break;
        ok = !adplan::static_collision(s_, world(x, y, q));
      }
      static_[slot] = ok ? 1 : 0;
    }
    return static_[slot] == 1;
  }

  bool dynamic_ok(int x, int y, std::int64_t t, const MotionPrimitive& p) const {
    if (s_.obstacles().empty()) return true;
    for (std::size_t k = 0; k < p.poses.size(); ++k) {
      const double time = static_cast<double>(t + static_cast<std::int64_t>(k)) * s_.dt();
      if (adplan::dynamic_collision(s_, world(x, y, p.poses[k]), time)) return false;
    }
    return true;
  }

  Pose world(int x, int y, const Pose& q) const {
    const double cs = s_.map().cell_size();
    return {(x + 0.5 + q.x) * cs, (y + 0.5 + q.y) * cs, q.theta};
  }

  const Scenario& scenario() const { return s_; }
  const MotionPrimitiveSet& primitives() const { return prims_; }

 private:
  const Scenario& s_;
  const MotionPrimitiveSet& prims_;
  std::vector<std::int8_t> static_;
};

struct StateKey {
  std::uint64_t operator()(const StateHD& s) const {
    return (static_cast<std::uint64_t>(s.x) << 48) ^ (static_cast<std::uint64_t>(s.y) << 32) ^
           (static_cast<std::uint64_t>(s.heading) << 27) ^ static_cast<std::uint64_t>(s.t);
  }
};

/// Optimal 4D cost from `start` to any state in the goal cell within the
/// horizon, with every obstacle checked. kNone when unreachable.
/// With `dynamic` false, dynamic obstacles and the horizon are ignored and the
/// time coordinate is dropped.
inline Cost optimal_cost(const Scenario& s, const MotionPrimitiveSet& prims, const StateHD& start, StateLD goal,
                         bool dynamic = true) {
  Checker check(s, prims);
  if (adplan::static_collision(s, check.world(start.x, start.y, {0, 0, adplan::heading_angle(start.heading)}))) return kNone;
  if (dynamic && adplan::dynamic_collision(s, check.world(start.x, start.y, {0, 0, adplan::heading_angle(start.heading)}), 0.0)) {
    return kNone;
  }
  auto norm = [&](StateHD st) {
    if (!dynamic) st.t = 0;
    return st;
  };
  std::unordered_map<StateHD, Cost, StateKey> dist;
  using Item = std::pair<Cost, StateHD>;
  auto cmp = [](const Item& a, const Item& b) { return a.first > b.first; };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> open(cmp);
  dist[norm(start)] = 0;
  open.push({0, norm(start)});
  while (!open.empty()) {
    const auto [d, st] = open.top();
    open.pop();
    if (dist[st] != d) continue;
    if (st.x == goal.x && st.y == goal.y) return d;
    for (int idx : prims.for_heading(st.heading)) {
      const MotionPrimitive& p = prims.all()[static_cast<std::size_t>(idx)];
      if (dynamic && st.t + p.duration > s.time_horizon_steps()) continue;
      if (!check.static_ok(st.x, st.y, idx)) continue;
      if (dynamic && !check.dynamic_ok(st.x, st.y, st.t, p)) continue;
      const StateHD nx = norm({st.x + p.dx, st.y + p.dy, p.end_heading, st.t + p.duration});
      auto it = dist.find(nx);
      if (it == dist.end() || d + p.cost < it->second) {
        dist[nx] = d + p.cost;
        open.push({d + p.cost, nx});
      }
    }
  }
  return kNone;
}

/// Earliest time step at which any 4D state in each cell is reachable from
/// `start` (static obstacles only, within the horizon). -1 when never.
inline std::vector<std::int64_t> earliest_arrival(const Scenario& s, const MotionPrimitiveSet& prims,
                                                  const StateHD& start) {
  Checker check(s, prims);
  const auto& m = s.map();
  const std::int64_t T = s.time_horizon_steps();
  std::vector<std::int64_t> first(m.cell_count(), -1);
  // reached[t] holds (cell, heading) pairs present at step t.
  std::vector<std::vector<std::uint8_t>> reached(static_cast<std::size_t>(T) + 1);
  auto layer = [&](std::int64_t t) -> std::vector<std::uint8_t>& {
    auto& l = reached[static_cast<std::size_t>(t)];
    if (l.empty()) l.assign(m.cell_count() * adplan::kNumHeadings, 0);
    return l;
  };
  layer(0)[m.index(start.x, start.y) * adplan::kNumHeadings + static_cast<std::size_t>(start.heading)] = 1;
  for (std::int64_t t = 0; t <= T; ++t) {
    auto& l = reached[static_cast<std::size_t>(t)];
    if (l.empty()) continue;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!l[i]) continue;
      const std::size_t cell = i / adplan::kNumHeadings;
      const int h = static_cast<int>(i % adplan::kNumHeadings);
      const int x = static_cast<int>(cell % static_cast<std::size_t>(m.width()));
      const int y = static_cast<int>(cell / static_cast<std::size_t>(m.width()));
      if (first[cell] < 0) first[cell] = t;
      for (int idx : prims.for_heading(h)) {
        const MotionPrimitive& p = prims.all()[static_cast<std::size_t>(idx)];
        if (t + p.duration > T || !check.static_ok(x, y, idx)) continue;
        layer(t + p.duration)[m.index(x + p.dx, y + p.dy) * adplan::kNumHeadings + static_cast<std::size_t>(p.end_heading)] = 1;
      }
    }
    l.clear();
    l.shrink_to_fit();
  }
  return first;
}

/// Plain Dijkstra over an explicit weighted digraph.
inline std::vector<Cost> dijkstra(const std::vector<std::vector<std::pair<int, Cost>>>& adj, int source) {
  std::vector<Cost> dist(adj.size(), kNone);
  using Item = std::pair<Cost, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[static_cast<std::size_t>(source)] = 0;
  open.push({0, source});
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (d != dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
      if (d + w < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = d + w;
        open.push({d + w, v});
      }
    }
  }
  return dist;
}

}  // namespace oracle
