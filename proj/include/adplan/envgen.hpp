#pragma once

// Seeded maze and indoor environments with dynamic-obstacle trajectories.

#include <cstdint>
#include <string>
#include <vector>

#include "adplan/lattice.hpp"
#include "adplan/world.hpp"

namespace adplan {

enum class MapKind { maze, indoor };
std::string to_string(MapKind k);
MapKind parse_map_kind(const std::string& s);

struct GenSpec {
  MapKind kind{MapKind::maze};
  int size{300};  // cells per side
  std::uint64_t seed{1};
  int n_obstacles{10};
  double large_fraction{0.5};
  double cell_size{1.0};
  double dt{0.1};
  double obstacle_speed{1.0};     // cells per second
  // 0: the larger of 3.5 s per cell of map side and horizon_path_factor
  // times the 2D shortest-path time of the generated query.
  std::int64_t horizon_steps{0};
  double horizon_path_factor{2.0};
  // Maze: wall spacing and gap widths, cells.
  int wall_spacing_min{10};
  int wall_spacing_max{20};
  int gap_min{3};
  int gap_max{5};
  // Indoor: hallway width and the pitch of the hallway grid, cells.
  int hallway_width{6};
  int room_pitch{30};
  double room_probability{0.5};
  double extra_hallway_probability{0.15};
  // Each trajectory is at least this multiple of the map diagonal.
  double min_trajectory_fraction{2.0};

  std::int64_t effective_horizon(Cost ld_path_cost = 0) const;
  double large_radius() const;  // meters
  double small_radius() const;
};

/// 1.2 x 0.8 cell rectangle.
RobotFootprint default_footprint(double cell_size);

struct GeneratedScenario {
  GridMap map;
  RobotFootprint footprint;
  std::vector<DynamicObstacle> obstacles;
  std::int64_t horizon_steps{0};
  double dt{0.1};
  StateHD start;
  StateLD goal;
  int attempts{1};
};

/// Full pipeline: map, start/goal in opposite corners (statically connected in
/// 2D), then obstacles. Infeasible draws are retried with derived seeds, at
/// most 10 times; throws std::runtime_error after that.
GeneratedScenario generate_scenario(const GenSpec& spec);

GridMap generate_map(const GenSpec& spec);
/// Trajectories over `map` avoiding the discs around start and goal.
std::vector<DynamicObstacle> generate_obstacles(const GridMap& map, const GenSpec& spec, StateLD start, StateLD goal);

/// Writes `<stem>.map` and `<stem>.json` into `dir`; returns the JSON path.
std::string write_scenario(const GeneratedScenario& g, const std::string& dir, const std::string& stem);
std::string scenario_stem(const GenSpec& spec);

}  // namespace adplan
