#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adplan/envgen.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace adplan;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("adplan_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

double polyline_length(const std::vector<Vec2>& w) {
  double len = 0;
  for (std::size_t i = 1; i < w.size(); ++i) len += std::hypot(w[i].x - w[i - 1].x, w[i].y - w[i - 1].y);
  return len;
}

GenSpec spec(MapKind kind, int size, std::uint64_t seed, int n_obs = 6) {
  GenSpec s;
  s.kind = kind;
  s.size = size;
  s.seed = seed;
  s.n_obstacles = n_obs;
  return s;
}

}  // namespace

TEST_CASE("map kind names") {
  CHECK(to_string(MapKind::maze) == "maze");
  CHECK(parse_map_kind("indoor") == MapKind::indoor);
  CHECK_THROWS_AS(parse_map_kind("forest"), std::invalid_argument);
}

TEST_CASE("generation is deterministic per seed") {
  for (MapKind kind : {MapKind::maze, MapKind::indoor}) {
    const GenSpec s = spec(kind, 120, 7);
    const auto a = generate_scenario(s);
    const auto b = generate_scenario(s);
    CHECK(format_map(a.map) == format_map(b.map));
    REQUIRE(a.obstacles.size() == b.obstacles.size());
    for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
      CHECK(a.obstacles[i].radius() == b.obstacles[i].radius());
      CHECK(a.obstacles[i].waypoints().size() == b.obstacles[i].waypoints().size());
      CHECK(polyline_length(a.obstacles[i].waypoints()) == polyline_length(b.obstacles[i].waypoints()));
    }
    CHECK(a.start == b.start);
    CHECK(a.goal == b.goal);

    const auto d1 = scratch_dir("det1");
    const auto d2 = scratch_dir("det2");
    write_scenario(a, d1.string(), "env");
    write_scenario(b, d2.string(), "env");
    CHECK(slurp(d1 / "env.map") == slurp(d2 / "env.map"));
    CHECK(slurp(d1 / "env.json") == slurp(d2 / "env.json"));

    const auto c = generate_scenario(spec(kind, 120, 8));
    CHECK(format_map(a.map) != format_map(c.map));
  }
}

TEST_CASE("scenario files round-trip") {
  const auto g = generate_scenario(spec(MapKind::indoor, 100, 3));
  const auto dir = scratch_dir("roundtrip");
  const std::string path = write_scenario(g, dir.string(), scenario_stem(spec(MapKind::indoor, 100, 3)));
  CHECK(std::filesystem::path(path).filename() == "indoor_100_3.json");
  ScenarioFile file;
  const Scenario s = load_scenario(path, &file);
  CHECK(format_map(s.map()) == format_map(g.map));
  CHECK(s.time_horizon_steps() == g.horizon_steps);
  CHECK(s.dt() == g.dt);
  REQUIRE(s.obstacles().size() == g.obstacles.size());
  for (std::size_t i = 0; i < g.obstacles.size(); ++i) {
    CHECK(s.obstacles()[i].radius() == g.obstacles[i].radius());
    CHECK(s.obstacles()[i].speed() == g.obstacles[i].speed());
    const auto& wa = s.obstacles()[i].waypoints();
    const auto& wb = g.obstacles[i].waypoints();
    REQUIRE(wa.size() == wb.size());
    for (std::size_t k = 0; k < wa.size(); ++k) {
      CHECK(wa[k].x == wb[k].x);
      CHECK(wa[k].y == wb[k].y);
    }
  }
  REQUIRE(file.has_query);
  CHECK(file.start_x == g.start.x);
  CHECK(file.start_y == g.start.y);
  CHECK(file.start_heading == g.start.heading);
  CHECK(file.goal_x == g.goal.x);
  CHECK(file.goal_y == g.goal.y);
  CHECK(parse_scenario(format_scenario(file)) == file);
}

TEST_CASE("obstacle trajectories stay on free cells and are long") {
  for (MapKind kind : {MapKind::maze, MapKind::indoor}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const GenSpec s = spec(kind, 150, seed, 8);
      const auto g = generate_scenario(s);
      REQUIRE(g.obstacles.size() == 8);
      const double diameter = std::hypot(s.size, s.size) * s.cell_size;
      for (const DynamicObstacle& o : g.obstacles) {
        const bool large = o.radius() == s.large_radius();
        CHECK((large || o.radius() == s.small_radius()));
        CHECK(o.speed() == s.obstacle_speed);
        for (const Vec2& w : o.waypoints()) {
          const int x = static_cast<int>(std::floor(w.x / s.cell_size));
          const int y = static_cast<int>(std::floor(w.y / s.cell_size));
          CHECK_FALSE(g.map.occupied(x, y));
        }
        CHECK(polyline_length(o.waypoints()) >= s.min_trajectory_fraction * diameter);
      }
    }
  }
}

TEST_CASE("no obstacles requested gives none") {
  const auto g = generate_scenario(spec(MapKind::maze, 80, 2, 0));
  CHECK(g.obstacles.empty());
  CHECK(generate_obstacles(g.map, spec(MapKind::maze, 80, 2, 0), StateLD{g.start.x, g.start.y}, g.goal).empty());
}

TEST_CASE("start reaches goal on the static lattice") {
  // Heading and turning limits included: stronger than the 2D check the
  // generator performs.
  for (MapKind kind : {MapKind::maze, MapKind::indoor}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto g = generate_scenario(spec(kind, 100, seed, 0));
      const Scenario s(g.map, g.footprint, {}, g.horizon_steps, g.dt);
      const auto prims = MotionPrimitiveSet::make_default(g.dt, {});
      CHECK(oracle::optimal_cost(s, prims, g.start, g.goal, false) != oracle::kNone);
      CHECK(g.start.t == 0);
      CHECK(std::abs(g.start.x - g.goal.x) + std::abs(g.start.y - g.goal.y) > 100);
    }
  }
}

TEST_CASE("indoor hallways fit a large obstacle exactly") {
  GenSpec s = spec(MapKind::indoor, 120, 5);
  CHECK(2 * s.large_radius() == doctest::Approx(s.hallway_width * s.cell_size));
  CHECK(s.small_radius() == doctest::Approx(s.large_radius() / 2));
  GenSpec wide = s;
  wide.hallway_width = 8;
  CHECK(2 * wide.large_radius() == doctest::Approx(8 * wide.cell_size));

  // Measured on the map: free vertical runs of exactly W cells are the
  // cross-sections of horizontal hallways.
  const auto g = generate_scenario(spec(MapKind::indoor, 120, 5));
  int exact = 0;
  for (int x = 0; x < g.map.width(); ++x) {
    int run = 0;
    for (int y = 0; y <= g.map.height(); ++y) {
      if (y < g.map.height() && !g.map.occupied(x, y)) {
        ++run;
        continue;
      }
      if (run == s.hallway_width) ++exact;
      run = 0;
    }
  }
  CHECK(exact > 20);
}

TEST_CASE("maze walls are pierced by gaps no narrower than gap_min") {
  const GenSpec s = spec(MapKind::maze, 120, 4);
  const auto g = generate_scenario(s);
  int walls = 0;
  for (int x = 1; x + 1 < g.map.width(); ++x) {
    int occupied = 0;
    for (int y = 0; y < g.map.height(); ++y) occupied += g.map.occupied(x, y) ? 1 : 0;
    if (occupied < g.map.height() / 2) continue;
    ++walls;
    // Free runs along a wall column are the gaps.
    int run = 0;
    int narrowest = g.map.height();
    for (int y = 0; y <= g.map.height(); ++y) {
      if (y < g.map.height() && !g.map.occupied(x, y)) {
        ++run;
      } else if (run > 0) {
        narrowest = std::min(narrowest, run);
        run = 0;
      }
    }
    CHECK(narrowest >= s.gap_min);
  }
  CHECK(walls >= 4);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(generate_scenario(spec(MapKind::maze, 40, 1)), std::invalid_argument);
  GenSpec s = spec(MapKind::maze, 100, 1);
  s.large_fraction = 1.5;
  CHECK_THROWS_AS(generate_scenario(s), std::invalid_argument);
  s = spec(MapKind::maze, 100, 1, -1);
  CHECK_THROWS_AS(generate_scenario(s), std::invalid_argument);
}
