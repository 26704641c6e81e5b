#include "adplan/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "json.hpp"

namespace adplan {

namespace {

constexpr double kAngleTol = 1e-6;
constexpr double kPosTol = 1e-6;

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0) a += two_pi;
  return a;
}

bool same_angle(double a, double b) {
  const double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return d < kAngleTol || std::abs(d - 2.0 * std::numbers::pi) < kAngleTol;
}

int steps_for(double seconds, double dt) {
  return static_cast<int>(std::ceil(seconds / dt - 1e-9));
}

void finish_primitive(MotionPrimitive& p, double dt, const CostModel& cost) {
  p.cost = static_cast<Cost>(std::llround(p.duration * dt * static_cast<double>(cost.cost_scale)));
  p.reach = 0.0;
  for (const Pose& q : p.poses) p.reach = std::max(p.reach, std::hypot(q.x, q.y));
}

void validate(const MotionPrimitive& p, double dt, const CostModel& cost) {
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("invalid motion primitive (start_heading " + std::to_string(p.start_heading) +
                             ", dx " + std::to_string(p.dx) + ", dy " + std::to_string(p.dy) + "): " + why);
  };
  if (p.start_heading < 0 || p.start_heading >= kNumHeadings || p.end_heading < 0 || p.end_heading >= kNumHeadings)
    fail("heading out of range");
  if (p.duration <= 0) fail("duration must be positive");
  if (p.dx == 0 && p.dy == 0) fail("zero displacement");
  if (p.poses.size() != static_cast<std::size_t>(p.duration) + 1) fail("needs duration + 1 pose samples");
  const Pose& first = p.poses.front();
  const Pose& last = p.poses.back();
  if (std::abs(first.x) > kPosTol || std::abs(first.y) > kPosTol || !same_angle(first.theta, heading_angle(p.start_heading)))
    fail("first pose must be the origin with the start heading");
  if (std::abs(last.x - p.dx) > kPosTol || std::abs(last.y - p.dy) > kPosTol ||
      !same_angle(last.theta, heading_angle(p.end_heading)))
    fail("last pose must be (dx, dy) with the end heading");
  // The primitive may not be faster than max_speed along its chord.
  if (std::hypot(p.dx, p.dy) / cost.max_speed > p.duration * dt + 1e-9) fail("faster than max_speed");
}

}  // namespace

double heading_angle(int heading) { return heading * (2.0 * std::numbers::pi / kNumHeadings); }

Cost CostModel::ld_cost(double cells) const {
  return static_cast<Cost>(std::llround(cells / max_speed * static_cast<double>(cost_scale)));
}

// ---------------------------------------------------------------------------
// MotionPrimitiveSet

MotionPrimitiveSet MotionPrimitiveSet::make_default(double dt, const CostModel& cost) {
  MotionPrimitiveSet set;
  const double half_turn = std::numbers::pi / kNumHeadings;  // half of one heading increment
  for (int h = 0; h < kNumHeadings; ++h) {
    const double theta = heading_angle(h);
    for (int turn : {0, 1, -1}) {
      MotionPrimitive p;
      p.start_heading = h;
      p.end_heading = (h + turn + kNumHeadings) % kNumHeadings;
      // Displacement: 8-neighbor closest to the mean travel direction.
      const double travel = theta + turn * half_turn;
      p.dx = static_cast<int>(std::lround(std::cos(travel)));
      p.dy = static_cast<int>(std::lround(std::sin(travel)));
      const double chord = std::hypot(p.dx, p.dy);
      const double delta = turn * 2.0 * half_turn;
      const double length = turn == 0 ? chord : chord * (std::abs(delta) / 2.0) / std::sin(std::abs(delta) / 2.0);
      p.duration = steps_for(length / cost.max_speed, dt);
      for (int k = 0; k <= p.duration; ++k) {
        const double u = static_cast<double>(k) / p.duration;
        p.poses.push_back({u * p.dx, u * p.dy, wrap_angle(theta + u * delta)});
      }
      finish_primitive(p, dt, cost);
      validate(p, dt, cost);
      set.all_.push_back(std::move(p));
    }
  }
  set.index();
  return set;
}

MotionPrimitiveSet MotionPrimitiveSet::from_json(const std::string& text, double dt, const CostModel& cost) {
  MotionPrimitiveSet set;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_array()) throw std::runtime_error("primitive file must be a JSON list");
    for (const auto& e : j) {
      MotionPrimitive p;
      p.start_heading = e.at("start_heading").get<int>();
      p.dx = e.at("dx").get<int>();
      p.dy = e.at("dy").get<int>();
      p.end_heading = e.at("end_heading").get<int>();
      p.duration = e.at("duration_steps").get<int>();
      for (const auto& q : e.at("poses")) {
        p.poses.push_back({q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>()});
      }
      validate(p, dt, cost);
      finish_primitive(p, dt, cost);
      set.all_.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("invalid primitive file: ") + e.what());
  }
  set.index();
  return set;
}

std::string MotionPrimitiveSet::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const MotionPrimitive& p : all_) {
    nlohmann::json poses = nlohmann::json::array();
    for (const Pose& q : p.poses) poses.push_back({q.x, q.y, q.theta});
    j.push_back({{"start_heading", p.start_heading},
                 {"dx", p.dx},
                 {"dy", p.dy},
                 {"end_heading", p.end_heading},
                 {"duration_steps", p.duration},
                 {"poses", std::move(poses)}});
  }
  return j.dump(1) + "\n";
}

void MotionPrimitiveSet::index() {
  by_heading_.assign(kNumHeadings, {});
  for (std::size_t i = 0; i < all_.size(); ++i) {
    by_heading_[static_cast<std::size_t>(all_[i].start_heading)].push_back(static_cast<int>(i));
  }
}

// ---------------------------------------------------------------------------
// Lattice

Lattice::Lattice(const Scenario& scenario, MotionPrimitiveSet primitives, CostModel cost)
    : scenario_(&scenario), primitives_(std::move(primitives)), cost_(cost) {
  const GridMap& m = scenario.map();
  const double cs = m.cell_size();
  const double r = scenario.footprint().inscribed_radius();
  const int window = static_cast<int>(std::ceil(r / cs)) + 1;
  ld_free_.assign(m.cell_count(), 0);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.occupied(x, y)) continue;
      const Vec2 c = m.cell_center(x, y);
      // Inscribed disc must stay inside the map and off every occupied cell.
      bool free = c.x >= r && c.y >= r && m.width() * cs - c.x >= r && m.height() * cs - c.y >= r;
      for (int oy = y - window; free && oy <= y + window; ++oy) {
        for (int ox = x - window; ox <= x + window; ++ox) {
          if (!m.in_bounds(ox, oy) || !m.occupied(ox, oy)) continue;
          if (point_box_distance(c, {ox * cs, oy * cs}, {(ox + 1) * cs, (oy + 1) * cs}) < r) {
            free = false;
            break;
          }
        }
      }
      ld_free_[m.index(x, y)] = free ? 1 : 0;
    }
  }
  const std::size_t n = m.cell_count() * primitives_.all().size();
  static_cache_ = std::make_unique<std::atomic<std::uint8_t>[]>(n);
  for (std::size_t i = 0; i < n; ++i) static_cache_[i].store(0, std::memory_order_relaxed);
}

Pose Lattice::cell_pose(int x, int y, double theta) const {
  const Vec2 c = map().cell_center(x, y);
  return {c.x, c.y, theta};
}

bool Lattice::pose_free(int x, int y, int heading) const {
  if (!map().in_bounds(x, y)) return false;
  return !static_collision(*scenario_, cell_pose(x, y, heading_angle(heading)));
}

void Lattice::ld_successors(StateLD s, std::vector<LdEdge>& out) const {
  out.clear();
  static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  const Cost straight = cost_.ld_cost(1.0);
  const Cost diagonal = cost_.ld_cost(std::numbers::sqrt2);
  for (int i = 0; i < 8; ++i) {
    const int nx = s.x + kDx[i];
    const int ny = s.y + kDy[i];
    if (!ld_free(nx, ny)) continue;
    out.push_back({{nx, ny}, (kDx[i] != 0 && kDy[i] != 0) ? diagonal : straight});
  }
}

void Lattice::swept_poses(int x, int y, std::int64_t t, const MotionPrimitive& p, std::vector<StampedPose>& out) const {
  out.clear();
  const Vec2 c = map().cell_center(x, y);
  const double cs = map().cell_size();
  for (std::size_t k = 0; k < p.poses.size(); ++k) {
    const Pose& q = p.poses[k];
    out.push_back({{c.x + q.x * cs, c.y + q.y * cs, q.theta}, t + static_cast<std::int64_t>(k)});
  }
}

bool Lattice::static_transition_free(int x, int y, int primitive) const {
  if (!map().in_bounds(x, y)) return false;
  const std::size_t slot = map().index(x, y) * primitives_.all().size() + static_cast<std::size_t>(primitive);
  const std::uint8_t cached = static_cache_[slot].load(std::memory_order_relaxed);
  if (cached != 0) return cached == 1;
  const MotionPrimitive& p = primitives_.all()[static_cast<std::size_t>(primitive)];
  bool free = map().in_bounds(x + p.dx, y + p.dy);
  if (free) {
    const Vec2 c = map().cell_center(x, y);
    const double cs = map().cell_size();
    for (const Pose& q : p.poses) {
      if (static_collision(*scenario_, {c.x + q.x * cs, c.y + q.y * cs, q.theta})) {
        free = false;
        break;
      }
    }
  }
  static_cache_[slot].store(free ? 1 : 2, std::memory_order_relaxed);
  return free;
}

bool Lattice::dynamic_transition_free(int x, int y, std::int64_t t, const MotionPrimitive& p) const {
  const auto& obstacles = scenario_->obstacles();
  if (obstacles.empty()) return true;
  const Vec2 c = map().cell_center(x, y);
  const double cs = map().cell_size();
  const double robot = scenario_->footprint().circumscribed_radius() + p.reach * cs;
  const double span = p.duration * scenario_->dt();

  // Obstacles that can come within reach during [t, t + duration].
  std::size_t near[64];
  std::vector<std::size_t> near_overflow;
  std::size_t n_near = 0;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const double bound = robot + obstacles[i].radius() + obstacles[i].speed() * span;
    if (distance(scenario_->obstacle_at_step(i, t), c) > bound) continue;
    if (n_near < 64) {
      near[n_near++] = i;
    } else {
      near_overflow.push_back(i);
    }
  }
  if (n_near == 0) return true;

  std::vector<Vec2> poly;
  const RobotFootprint& fp = scenario_->footprint();
  for (std::size_t k = 0; k < p.poses.size(); ++k) {
    const Pose& q = p.poses[k];
    const Pose pose{c.x + q.x * cs, c.y + q.y * cs, q.theta};
    const Vec2 origin{pose.x, pose.y};
    const std::int64_t step = t + static_cast<std::int64_t>(k);
    bool transformed = false;
    auto hits = [&](std::size_t i) {
      const Vec2 oc = scenario_->obstacle_at_step(i, step);
      const double r = obstacles[i].radius();
      if (distance(oc, origin) > fp.circumscribed_radius() + r) return false;
      if (!transformed) {
        fp.transform(pose, poly);
        transformed = true;
      }
      return disc_intersects_polygon(oc, r, poly);
    };
    for (std::size_t j = 0; j < n_near; ++j) {
      if (hits(near[j])) return false;
    }
    for (std::size_t i : near_overflow) {
      if (hits(i)) return false;
    }
  }
  return true;
}

void Lattice::hd_successors(const StateHD& s, std::vector<HdEdge>& out) const {
  out.clear();
  for (int idx : primitives_.for_heading(s.heading)) {
    const MotionPrimitive& p = primitives_.all()[static_cast<std::size_t>(idx)];
    if (s.t + p.duration > horizon()) continue;
    if (!static_transition_free(s.x, s.y, idx)) continue;
    if (!dynamic_transition_free(s.x, s.y, s.t, p)) continue;
    out.push_back({{s.x + p.dx, s.y + p.dy, p.end_heading, s.t + p.duration}, p.cost, idx});
  }
}

// ---------------------------------------------------------------------------
// Dominance check

Cost ld_optimal_cost(const Lattice& lattice, StateLD from, StateLD to) {
  const GridMap& m = lattice.map();
  if (!lattice.ld_free(from.x, from.y) || !lattice.ld_free(to.x, to.y)) return kInfiniteCost;
  std::vector<Cost> dist(m.cell_count(), kInfiniteCost);
  using Item = std::pair<Cost, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[m.index(from.x, from.y)] = 0;
  open.push({0, m.index(from.x, from.y)});
  std::vector<LdEdge> edges;
  const std::size_t target = m.index(to.x, to.y);
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d != dist[idx]) continue;
    if (idx == target) return d;
    const StateLD s{static_cast<int>(idx % static_cast<std::size_t>(m.width())),
                    static_cast<int>(idx / static_cast<std::size_t>(m.width()))};
    lattice.ld_successors(s, edges);
    for (const LdEdge& e : edges) {
      const std::size_t j = m.index(e.to.x, e.to.y);
      if (d + e.cost < dist[j]) {
        dist[j] = d + e.cost;
        open.push({dist[j], j});
      }
    }
  }
  return kInfiniteCost;
}

Cost hd_optimal_static_cost(const Lattice& lattice, const StateHD& from, const StateHD& to) {
  const GridMap& m = lattice.map();
  if (!lattice.pose_free(from.x, from.y, from.heading) || !lattice.pose_free(to.x, to.y, to.heading))
    return kInfiniteCost;
  auto key = [&](int x, int y, int h) { return m.index(x, y) * kNumHeadings + static_cast<std::size_t>(h); };
  std::vector<Cost> dist(m.cell_count() * kNumHeadings, kInfiniteCost);
  using Item = std::pair<Cost, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[key(from.x, from.y, from.heading)] = 0;
  open.push({0, key(from.x, from.y, from.heading)});
  const std::size_t target = key(to.x, to.y, to.heading);
  const auto& prims = lattice.primitives();
  while (!open.empty()) {
    const auto [d, k] = open.top();
    open.pop();
    if (d != dist[k]) continue;
    if (k == target) return d;
    const int h = static_cast<int>(k % kNumHeadings);
    const std::size_t cell = k / kNumHeadings;
    const int x = static_cast<int>(cell % static_cast<std::size_t>(m.width()));
    const int y = static_cast<int>(cell / static_cast<std::size_t>(m.width()));
    for (int idx : prims.for_heading(h)) {
      if (!lattice.static_transition_free(x, y, idx)) continue;
      const MotionPrimitive& p = prims.all()[static_cast<std::size_t>(idx)];
      const std::size_t j = key(x + p.dx, y + p.dy, p.end_heading);
      if (d + p.cost < dist[j]) {
        dist[j] = d + p.cost;
        open.push({dist[j], j});
      }
    }
  }
  return kInfiniteCost;
}

DominanceReport check_cost_dominance(const Lattice& lattice, std::span<const std::pair<StateHD, StateHD>> pairs) {
  DominanceReport report;
  for (const auto& [a, b] : pairs) {
    const Cost hd = hd_optimal_static_cost(lattice, a, b);
    const Cost ld = ld_optimal_cost(lattice, {a.x, a.y}, {b.x, b.y});
    if (hd == kInfiniteCost || ld == kInfiniteCost) {
      // An HD path without an LD path would itself be a violation.
      if (hd != kInfiniteCost) report.holds = false;
      ++report.skipped;
      continue;
    }
    ++report.checked;
    if (ld > hd) report.holds = false;
    if (hd > ld) ++report.strict;
  }
  return report;
}

}  // namespace adplan
