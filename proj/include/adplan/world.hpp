#pragma once

// Environment model: static occupancy grid, polygonal robot footprint,
// disc-shaped dynamic obstacles and the collision predicates built on them.
//
// Coordinates: cell (i, j) covers [i*cs, (i+1)*cs) x [j*cs, (j+1)*cs) in
// meters. A lattice state at cell (i, j) places the robot origin at the
// cell center.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adplan {

struct Vec2 {
  double x{0};
  double y{0};

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

struct Pose {
  double x{0};
  double y{0};
  double theta{0};
};

/// Pose sample stamped with an absolute time step index.
struct StampedPose {
  Pose pose;
  std::int64_t step{0};
};

class GridMap {
 public:
  GridMap() = default;
  GridMap(int width, int height, double cell_size);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  /// Out-of-map cells count as occupied.
  bool occupied(int x, int y) const {
    return !in_bounds(x, y) || cells_[index(x, y)] != 0;
  }
  void set_occupied(int x, int y, bool value);

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  std::size_t cell_count() const { return cells_.size(); }

  /// Center of cell (x, y) in meters.
  Vec2 cell_center(int x, int y) const {
    return {(x + 0.5) * cell_size_, (y + 0.5) * cell_size_};
  }

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int width_{0};
  int height_{0};
  double cell_size_{1.0};
  std::vector<std::uint8_t> cells_;
};

class RobotFootprint {
 public:
  RobotFootprint() = default;
  /// Validates that the radii agree with the polygon; throws std::invalid_argument.
  RobotFootprint(std::vector<Vec2> polygon, double inscribed_radius, double circumscribed_radius);

  /// Footprint with radii derived from the polygon.
  static RobotFootprint from_polygon(std::vector<Vec2> polygon);
  /// Axis-aligned square with the given half side (= inscribed radius).
  static RobotFootprint square(double half_side);

  const std::vector<Vec2>& polygon() const { return polygon_; }
  double inscribed_radius() const { return inscribed_; }
  double circumscribed_radius() const { return circumscribed_; }

  /// Polygon vertices in the world frame.
  void transform(const Pose& pose, std::vector<Vec2>& out) const;

  friend bool operator==(const RobotFootprint&, const RobotFootprint&) = default;

 private:
  std::vector<Vec2> polygon_;
  double inscribed_{0};
  double circumscribed_{0};
};

/// Largest origin-centered disc contained in the polygon (0 if the origin is outside).
double polygon_inscribed_radius(std::span<const Vec2> polygon);
double polygon_circumscribed_radius(std::span<const Vec2> polygon);

class DynamicObstacle {
 public:
  DynamicObstacle() = default;
  /// Throws std::invalid_argument on empty waypoints, repeated consecutive
  /// waypoints or non-positive radius/speed.
  DynamicObstacle(double radius, double speed, std::vector<Vec2> waypoints);

  double radius() const { return radius_; }
  double speed() const { return speed_; }
  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  double path_length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  /// Arc-length position at distance speed * t, clamped to the last waypoint.
  Vec2 position(double t) const;

  friend bool operator==(const DynamicObstacle& a, const DynamicObstacle& b) {
    return a.radius_ == b.radius_ && a.speed_ == b.speed_ && a.waypoints_ == b.waypoints_;
  }

 private:
  double radius_{0};
  double speed_{0};
  std::vector<Vec2> waypoints_;
  std::vector<double> cumulative_;
};

inline Vec2 obstacle_position(const DynamicObstacle& o, double t) { return o.position(t); }

/// Immutable planning world. Obstacle positions are tabulated per time step
/// on construction so the per-sample queries stay O(1).
class Scenario {
 public:
  Scenario() = default;
  Scenario(GridMap map, RobotFootprint footprint, std::vector<DynamicObstacle> obstacles,
           std::int64_t time_horizon_steps, double dt);

  const GridMap& map() const { return map_; }
  const RobotFootprint& footprint() const { return footprint_; }
  const std::vector<DynamicObstacle>& obstacles() const { return obstacles_; }
  std::int64_t time_horizon_steps() const { return horizon_; }
  double dt() const { return dt_; }
  double horizon_seconds() const { return static_cast<double>(horizon_) * dt_; }

  /// Position of obstacle i at time step `step` (clamped into [0, horizon]).
  Vec2 obstacle_at_step(std::size_t i, std::int64_t step) const;

 private:
  GridMap map_;
  RobotFootprint footprint_;
  std::vector<DynamicObstacle> obstacles_;
  std::int64_t horizon_{1};
  double dt_{0.1};
  std::vector<std::vector<Vec2>> timeline_;
};

/// Footprint at pose overlaps an occupied cell or leaves the map.
bool static_collision(const Scenario& s, const Pose& pose);
/// Some obstacle disc at time t intersects the footprint at pose.
bool dynamic_collision(const Scenario& s, const Pose& pose, double t);
/// Same as dynamic_collision with t = step * dt, using the tabulated positions.
bool dynamic_collision_at_step(const Scenario& s, const Pose& pose, std::int64_t step);
/// Static or dynamic collision at any sample.
bool transition_collision(const Scenario& s, std::span<const StampedPose> swept);

// Geometry primitives shared with the lattice and tests.
bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
bool disc_intersects_polygon(Vec2 center, double radius, std::span<const Vec2> polygon);
/// Closed polygon against the closed axis-aligned box [lo, hi].
bool polygon_intersects_box(std::span<const Vec2> polygon, Vec2 lo, Vec2 hi);
/// Distance from p to the closed box [lo, hi] (0 inside).
double point_box_distance(Vec2 p, Vec2 lo, Vec2 hi);

// File formats.
GridMap parse_map(const std::string& text);
std::string format_map(const GridMap& map);
GridMap load_map(const std::string& path);
void save_map(const GridMap& map, const std::string& path);

/// Scenario file contents. `start`/`goal` are optional query hints written by
/// the generator; map_file is resolved relative to the scenario file.
struct ScenarioFile {
  std::string map_file;
  double dt{0.1};
  std::int64_t time_horizon_steps{0};
  RobotFootprint footprint;
  std::vector<DynamicObstacle> obstacles;
  bool has_query{false};
  int start_x{0}, start_y{0}, start_heading{0};
  int goal_x{0}, goal_y{0};

  friend bool operator==(const ScenarioFile&, const ScenarioFile&) = default;
};

std::string format_scenario(const ScenarioFile& file);
ScenarioFile parse_scenario(const std::string& json_text);
/// Reads the scenario JSON and the referenced map.
Scenario load_scenario(const std::string& path, ScenarioFile* file_out = nullptr);
void save_scenario(const ScenarioFile& file, const std::string& path);

}  // namespace adplan
