#include <cmath>
#include <filesystem>
#include <numbers>

#include "adplan/world.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace adplan;
using testing_support::make_map;
using testing_support::empty_map;

namespace {

// Distance from a point to a polygon boundary by dense sampling.
double sampled_distance(Vec2 p, const std::vector<Vec2>& poly) {
  double best = 1e18;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    for (int k = 0; k <= 2000; ++k) {
      const double u = k / 2000.0;
      best = std::min(best, distance(p, a + u * (b - a)));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("obstacle position follows arc length and clamps") {
  DynamicObstacle o(0.5, 2.0, {{0, 0}, {10, 0}});
  CHECK(obstacle_position(o, 2.5).x == doctest::Approx(5.0));
  CHECK(obstacle_position(o, 2.5).y == doctest::Approx(0.0));
  CHECK(obstacle_position(o, 0.0).x == doctest::Approx(0.0));
  CHECK(obstacle_position(o, 100.0).x == doctest::Approx(10.0));

  DynamicObstacle bent(0.5, 1.0, {{0, 0}, {3, 0}, {3, 4}});
  CHECK(bent.path_length() == doctest::Approx(7.0));
  CHECK(bent.position(5.0).x == doctest::Approx(3.0));
  CHECK(bent.position(5.0).y == doctest::Approx(2.0));
}

TEST_CASE("obstacle position is speed-Lipschitz") {
  DynamicObstacle o(0.5, 1.5, {{0, 0}, {3, 1}, {-2, 5}, {4, 4}});
  for (double t1 = 0; t1 < 12; t1 += 0.37) {
    for (double t2 = t1; t2 < 12; t2 += 0.53) {
      CHECK(distance(o.position(t1), o.position(t2)) <= 1.5 * (t2 - t1) + 1e-9);
    }
  }
}

TEST_CASE("obstacle validation") {
  CHECK_THROWS(DynamicObstacle(0.5, 1.0, {}));
  CHECK_THROWS(DynamicObstacle(0.5, 1.0, {{1, 1}, {1, 1}}));
  CHECK_THROWS(DynamicObstacle(0.0, 1.0, {{1, 1}}));
  CHECK_THROWS(DynamicObstacle(0.5, 0.0, {{1, 1}}));
  CHECK_NOTHROW(DynamicObstacle(0.5, 1.0, {{1, 1}}));
}

TEST_CASE("footprint radii") {
  const auto sq = RobotFootprint::square(0.4);
  CHECK(sq.inscribed_radius() == doctest::Approx(0.4));
  CHECK(sq.circumscribed_radius() == doctest::Approx(0.4 * std::numbers::sqrt2));
  CHECK_THROWS(RobotFootprint(sq.polygon(), 0.5, sq.circumscribed_radius()));
  CHECK_THROWS(RobotFootprint(sq.polygon(), 0.4, 0.4));
  CHECK_NOTHROW(RobotFootprint(sq.polygon(), 0.3, sq.circumscribed_radius()));
}

TEST_CASE("static collision") {
  const Scenario empty(empty_map(10, 10), RobotFootprint::square(0.4), {}, 100, 0.1);
  CHECK_FALSE(static_collision(empty, {5.0, 5.0, 0.0}));
  CHECK(static_collision(empty, {0.2, 5.0, 0.0}));
  CHECK(static_collision(empty, {5.0, 9.8, 0.3}));

  GridMap m = empty_map(10, 10);
  m.set_occupied(5, 5, true);
  const Scenario s(m, RobotFootprint::square(0.4), {}, 100, 0.1);
  CHECK(static_collision(s, {4.8, 5.5, 0.0}));  // straddles x = 5
  CHECK_FALSE(static_collision(s, {4.5, 5.5, 0.0}));
  CHECK(static_collision(s, {4.5, 5.5, std::numbers::pi / 4}));  // corner reaches 4.5 + 0.566
  CHECK(static_collision(s, {4.6, 5.5, 0.0}));   // touching the closed cell boundary
}

TEST_CASE("dynamic collision") {
  const auto fp = RobotFootprint::square(0.4);
  const Scenario none(empty_map(10, 10), fp, {}, 100, 0.1);
  CHECK_FALSE(dynamic_collision(none, {5, 5, 0}, 3.0));

  const Scenario s(empty_map(10, 10), fp, {DynamicObstacle(0.5, 1.0, {{1, 5}, {9, 5}})}, 100, 0.1);
  CHECK(dynamic_collision(s, {5, 5, 0}, 4.0));  // obstacle center on robot origin
  const double far = fp.circumscribed_radius() + 0.5 + 1.0;
  CHECK_FALSE(dynamic_collision(s, {5, 5 + far, 0}, 4.0));

  // Against a sampled distance oracle around the polygon.
  std::vector<Vec2> poly;
  for (double ang = 0; ang < 6.28; ang += 0.41) {
    for (double r = 0.5; r < 1.6; r += 0.07) {
      const Pose pose{5 + r * std::cos(ang), 5 + r * std::sin(ang), 0.3};
      fp.transform(pose, poly);
      const Vec2 obs = s.obstacles()[0].position(4.0);
      const bool inside = point_in_polygon(obs, poly);
      const double d = sampled_distance(obs, poly);
      if (std::abs(d - 0.5) < 1e-3) continue;
      CHECK(dynamic_collision(s, pose, 4.0) == (inside || d < 0.5));
    }
  }
}

TEST_CASE("transition collision") {
  const auto fp = RobotFootprint::square(0.4);
  const Scenario s(empty_map(20, 20), fp, {DynamicObstacle(0.5, 1.0, {{10, 2}, {10, 18}})}, 400, 0.1);
  const StampedPose free_sample{{3, 3, 0}, 0};
  CHECK_FALSE(transition_collision(s, std::span(&free_sample, 1)));

  // Robot crosses x = 10 along y = 10 between steps 60 and 100; obstacle
  // passes y = 10 at t = 8 s.
  auto sweep = [&](std::int64_t t0) {
    std::vector<StampedPose> out;
    for (int k = 0; k <= 80; ++k) out.push_back({{6.0 + 0.1 * k, 10.0, 0.0}, t0 + k});
    return out;
  };
  auto brute = [&](const std::vector<StampedPose>& sw) {
    for (const auto& p : sw) {
      if (static_collision(s, p.pose) || dynamic_collision(s, p.pose, p.step * s.dt())) return true;
    }
    return false;
  };
  const auto hit = sweep(40);
  CHECK(transition_collision(s, hit));
  CHECK(brute(hit));
  const auto late = sweep(140);  // 10 s after the obstacle crossed
  CHECK_FALSE(transition_collision(s, late));
  CHECK_FALSE(brute(late));

  // Single-sample sequences agree with the two predicates.
  for (double x = 0.5; x < 19.5; x += 0.9) {
    const StampedPose p{{x, 10.0, 0.2}, 80};
    CHECK(transition_collision(s, std::span(&p, 1)) ==
          (static_collision(s, p.pose) || dynamic_collision(s, p.pose, 8.0)));
  }
}

TEST_CASE("map text format round trip") {
  const GridMap m = make_map({"..#.", "#...", "...."}, 0.25);
  const std::string text = format_map(m);
  CHECK(text == "4 3 0.25\n..#.\n#...\n....\n");
  CHECK(parse_map(text) == m);
  CHECK(m.occupied(2, 0));
  CHECK(m.occupied(0, 1));
  CHECK(m.occupied(-1, 0));
  CHECK(m.occupied(4, 0));
  CHECK_THROWS(parse_map("2 2 1\n..\n"));
  CHECK_THROWS(parse_map("2 2 1\n.x\n..\n"));
}

TEST_CASE("scenario file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "adplan_world_test";
  std::filesystem::create_directories(dir);
  const GridMap m = make_map({".....", "..#..", "....."}, 1.0);
  save_map(m, (dir / "m.map").string());
  ScenarioFile f;
  f.map_file = "m.map";
  f.dt = 0.1;
  f.time_horizon_steps = 250;
  f.footprint = testing_support::robot();
  f.obstacles = {DynamicObstacle(0.5, 1.0, {{0.5, 0.5}, {4.5, 0.5}}), DynamicObstacle(0.25, 0.5, {{2.5, 2.5}})};
  f.has_query = true;
  f.start_x = 0;
  f.goal_x = 4;
  f.goal_y = 2;
  save_scenario(f, (dir / "s.json").string());
  ScenarioFile back;
  const Scenario s = load_scenario((dir / "s.json").string(), &back);
  CHECK(back == f);
  CHECK(format_scenario(back) == format_scenario(f));
  CHECK(s.map() == m);
  CHECK(s.time_horizon_steps() == 250);
  CHECK(s.horizon_seconds() == doctest::Approx(25.0));
  CHECK(s.obstacles().size() == 2);
  std::filesystem::remove_all(dir);
}
