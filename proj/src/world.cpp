#include "adplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adplan {

namespace {

// Above this many tabulated samples the scenario falls back to evaluating
// obstacle positions on demand.
constexpr std::size_t kMaxTimelineSamples = 4'000'000;

// Closed segment against closed box, slab clipping.
bool segment_intersects_box(Vec2 a, Vec2 b, Vec2 lo, Vec2 hi) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double p[2] = {a.x, a.y};
  const double l[2] = {lo.x, lo.y};
  const double h[2] = {hi.x, hi.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (p[axis] < l[axis] || p[axis] > h[axis]) return false;
      continue;
    }
    double ta = (l[axis] - p[axis]) / d[axis];
    double tb = (h[axis] - p[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double distance(Vec2 a, Vec2 b) { return norm(b - a); }

// ---------------------------------------------------------------------------
// Geometry

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

bool disc_intersects_polygon(Vec2 center, double radius, std::span<const Vec2> polygon) {
  if (polygon.empty()) return false;
  if (point_in_polygon(center, polygon)) return true;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (point_segment_distance(center, polygon[i], polygon[(i + 1) % n]) <= radius) return true;
  }
  return false;
}

bool polygon_intersects_box(std::span<const Vec2> polygon, Vec2 lo, Vec2 hi) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (segment_intersects_box(polygon[i], polygon[(i + 1) % n], lo, hi)) return true;
  }
  // No boundary contact: the box is either fully inside or fully outside.
  return point_in_polygon(0.5 * (lo + hi), polygon);
}

double point_box_distance(Vec2 p, Vec2 lo, Vec2 hi) {
  const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
  const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
  return std::hypot(dx, dy);
}

double polygon_inscribed_radius(std::span<const Vec2> polygon) {
  if (polygon.size() < 3) return 0.0;
  const Vec2 origin{0, 0};
  if (!point_in_polygon(origin, polygon)) return 0.0;
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    r = std::min(r, point_segment_distance(origin, polygon[i], polygon[(i + 1) % polygon.size()]));
  }
  return r;
}

double polygon_circumscribed_radius(std::span<const Vec2> polygon) {
  double r = 0.0;
  for (const Vec2& v : polygon) r = std::max(r, norm(v));
  return r;
}

// ---------------------------------------------------------------------------
// GridMap

GridMap::GridMap(int width, int height, double cell_size)
    : width_(width), height_(height), cell_size_(cell_size) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("map dimensions must be positive");
  if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be positive");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

void GridMap::set_occupied(int x, int y, bool value) {
  if (!in_bounds(x, y)) throw std::out_of_range("cell outside map");
  cells_[index(x, y)] = value ? 1 : 0;
}

// ---------------------------------------------------------------------------
// RobotFootprint

RobotFootprint::RobotFootprint(std::vector<Vec2> polygon, double inscribed_radius,
                               double circumscribed_radius)
    : polygon_(std::move(polygon)), inscribed_(inscribed_radius), circumscribed_(circumscribed_radius) {
  constexpr double kTol = 1e-6;
  if (polygon_.size() < 3) throw std::invalid_argument("footprint polygon needs at least 3 vertices");
  if (inscribed_ < 0.0 || circumscribed_ < 0.0) throw std::invalid_argument("footprint radii must be non-negative");
  if (inscribed_ > circumscribed_) throw std::invalid_argument("inscribed radius exceeds circumscribed radius");
  // An inscribed radius larger than the polygon allows would make the
  // inflated 2D map stricter than the footprint, breaking admissibility.
  if (inscribed_ > polygon_inscribed_radius(polygon_) + kTol)
    throw std::invalid_argument("inscribed radius inconsistent with polygon");
  if (std::abs(circumscribed_ - polygon_circumscribed_radius(polygon_)) > kTol)
    throw std::invalid_argument("circumscribed radius inconsistent with polygon");
}

RobotFootprint RobotFootprint::from_polygon(std::vector<Vec2> polygon) {
  const double inscribed = polygon_inscribed_radius(polygon);
  const double circumscribed = polygon_circumscribed_radius(polygon);
  return RobotFootprint(std::move(polygon), inscribed, circumscribed);
}

RobotFootprint RobotFootprint::square(double half_side) {
  return from_polygon({{-half_side, -half_side}, {half_side, -half_side}, {half_side, half_side}, {-half_side, half_side}});
}

void RobotFootprint::transform(const Pose& pose, std::vector<Vec2>& out) const {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  out.resize(polygon_.size());
  for (std::size_t i = 0; i < polygon_.size(); ++i) {
    const Vec2 v = polygon_[i];
    out[i] = {pose.x + c * v.x - s * v.y, pose.y + s * v.x + c * v.y};
  }
}

// ---------------------------------------------------------------------------
// DynamicObstacle

DynamicObstacle::DynamicObstacle(double radius, double speed, std::vector<Vec2> waypoints)
    : radius_(radius), speed_(speed), waypoints_(std::move(waypoints)) {
  if (!(radius_ > 0.0)) throw std::invalid_argument("obstacle radius must be positive");
  if (!(speed_ > 0.0)) throw std::invalid_argument("obstacle speed must be positive");
  if (waypoints_.empty()) throw std::invalid_argument("obstacle needs at least one waypoint");
  cumulative_.reserve(waypoints_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    if (waypoints_[i] == waypoints_[i - 1]) throw std::invalid_argument("consecutive obstacle waypoints coincide");
    cumulative_.push_back(cumulative_.back() + distance(waypoints_[i - 1], waypoints_[i]));
  }
}

Vec2 DynamicObstacle::position(double t) const {
  const double s = speed_ * std::max(t, 0.0);
  if (s >= cumulative_.back()) return waypoints_.back();
  // First segment end with cumulative length > s.
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - cumulative_.begin());
  const double seg = cumulative_[j] - cumulative_[j - 1];
  const double u = (s - cumulative_[j - 1]) / seg;
  return waypoints_[j - 1] + u * (waypoints_[j] - waypoints_[j - 1]);
}

// ---------------------------------------------------------------------------
// Scenario

Scenario::Scenario(GridMap map, RobotFootprint footprint, std::vector<DynamicObstacle> obstacles,
                   std::int64_t time_horizon_steps, double dt)
    : map_(std::move(map)),
      footprint_(std::move(footprint)),
      obstacles_(std::move(obstacles)),
      horizon_(time_horizon_steps),
      dt_(dt) {
  if (horizon_ <= 0) throw std::invalid_argument("time_horizon_steps must be positive");
  if (!(dt_ > 0.0)) throw std::invalid_argument("dt must be positive");
  const std::size_t samples = static_cast<std::size_t>(horizon_ + 1);
  if (samples * std::max<std::size_t>(obstacles_.size(), 1) <= kMaxTimelineSamples) {
    timeline_.resize(obstacles_.size());
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      timeline_[i].resize(samples);
      for (std::size_t k = 0; k < samples; ++k) {
        timeline_[i][k] = obstacles_[i].position(static_cast<double>(k) * dt_);
      }
    }
  }
}

Vec2 Scenario::obstacle_at_step(std::size_t i, std::int64_t step) const {
  step = std::clamp<std::int64_t>(step, 0, horizon_);
  if (!timeline_.empty()) return timeline_[i][static_cast<std::size_t>(step)];
  return obstacles_[i].position(static_cast<double>(step) * dt_);
}

// ---------------------------------------------------------------------------
// Predicates

namespace {

bool polygon_static_collision(const GridMap& map, std::span<const Vec2> poly) {
  const double cs = map.cell_size();
  const double max_x = map.width() * cs;
  const double max_y = map.height() * cs;
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (const Vec2& v : poly) {
    if (v.x < 0.0 || v.y < 0.0 || v.x > max_x || v.y > max_y) return true;
    lo_x = std::min(lo_x, v.x);
    lo_y = std::min(lo_y, v.y);
    hi_x = std::max(hi_x, v.x);
    hi_y = std::max(hi_y, v.y);
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(lo_x / cs)) - 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(lo_y / cs)) - 1);
  const int x1 = std::min(map.width() - 1, static_cast<int>(std::floor(hi_x / cs)) + 1);
  const int y1 = std::min(map.height() - 1, static_cast<int>(std::floor(hi_y / cs)) + 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!map.occupied(x, y)) continue;
      if (polygon_intersects_box(poly, {x * cs, y * cs}, {(x + 1) * cs, (y + 1) * cs})) return true;
    }
  }
  return false;
}

template <class PositionFn>
bool polygon_dynamic_collision(const Scenario& s, const Pose& pose, std::span<const Vec2> poly,
                               PositionFn&& position_of) {
  const Vec2 origin{pose.x, pose.y};
  const double reach = s.footprint().circumscribed_radius();
  for (std::size_t i = 0; i < s.obstacles().size(); ++i) {
    const double r = s.obstacles()[i].radius();
    const Vec2 c = position_of(i);
    if (distance(c, origin) > reach + r) continue;
    if (disc_intersects_polygon(c, r, poly)) return true;
  }
  return false;
}

}  // namespace

bool static_collision(const Scenario& s, const Pose& pose) {
  std::vector<Vec2> poly;
  s.footprint().transform(pose, poly);
  return polygon_static_collision(s.map(), poly);
}

bool dynamic_collision(const Scenario& s, const Pose& pose, double t) {
  if (s.obstacles().empty()) return false;
  std::vector<Vec2> poly;
  s.footprint().transform(pose, poly);
  return polygon_dynamic_collision(s, pose, poly, [&](std::size_t i) { return s.obstacles()[i].position(t); });
}

bool dynamic_collision_at_step(const Scenario& s, const Pose& pose, std::int64_t step) {
  if (s.obstacles().empty()) return false;
  std::vector<Vec2> poly;
  s.footprint().transform(pose, poly);
  return polygon_dynamic_collision(s, pose, poly, [&](std::size_t i) { return s.obstacle_at_step(i, step); });
}

bool transition_collision(const Scenario& s, std::span<const StampedPose> swept) {
  std::vector<Vec2> poly;
  for (const StampedPose& sample : swept) {
    s.footprint().transform(sample.pose, poly);
    if (polygon_static_collision(s.map(), poly)) return true;
    if (!s.obstacles().empty() &&
        polygon_dynamic_collision(s, sample.pose, poly,
                                  [&](std::size_t i) { return s.obstacle_at_step(i, sample.step); })) {
      return true;
    }
  }
  return false;
}

}  // namespace adplan
