#include <algorithm>
#include <set>

#include "adplan/adgraph.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "oracle.hpp"

using namespace adplan;
using testing_support::empty_map;
using testing_support::make_map;
using testing_support::robot;

namespace {

std::set<std::tuple<int, int, bool, int, std::int64_t, Cost>> expand(const AdaptiveGraph& g, const AdState& s) {
  std::vector<Edge<AdState>> out;
  g.successors(s, out);
  std::set<std::tuple<int, int, bool, int, std::int64_t, Cost>> all;
  for (const auto& e : out) {
    for (std::int32_t k = 0; k < e.run; ++k) {
      const AdState m = g.advance(e.to, k);
      all.insert({m.x, m.y, m.hd, m.heading, m.t, e.cost});
    }
  }
  return all;
}

}  // namespace

TEST_CASE("projection") {
  CHECK(project({5, 7, 3, 120}) == StateLD{5, 7});
  CHECK(project({0, 0, 0, 0}) == StateLD{0, 0});
}

TEST_CASE("inverse projection") {
  const InverseProjection pre({5, 7}, 40, 100);
  CHECK(pre.size() == 976);
  CHECK(pre.contains({5, 7, 0, 40}));
  CHECK(pre.contains({5, 7, 15, 100}));
  CHECK_FALSE(pre.contains({5, 7, 3, 39}));
  CHECK_FALSE(pre.contains({5, 7, 3, 101}));
  CHECK_FALSE(pre.contains({5, 8, 3, 50}));
  std::size_t n = 0;
  pre.for_each([&](const StateHD& s) {
    CHECK(project(s) == StateLD{5, 7});
    ++n;
  });
  CHECK(n == 976);
  const InverseProjection zero({1, 1}, 0, 30);
  CHECK(zero.contains({1, 1, 4, 30}));
  CHECK(InverseProjection().empty());
}

TEST_CASE("time lower bounds") {
  GridMap m = empty_map(12, 12);
  for (int i = 0; i < 12; ++i) m.set_occupied(9, i, true);
  const Scenario s(m, robot(), {}, 500, 0.1);
  const Lattice lat(s, MotionPrimitiveSet::make_default(0.1, {}));
  const auto tlb = compute_time_lower_bounds(lat, {2, 2});
  CHECK(tlb.at(2, 2) == 0);
  CHECK(tlb.at(7, 2) == 50);
  CHECK(tlb.at(3, 3) == 14);  // sqrt(2) s floored to steps
  CHECK_FALSE(tlb.reachable(10, 2));
}

TEST_CASE("regions") {
  const Scenario s(empty_map(80, 60), robot(), {}, 1000, 0.1);
  const Lattice lat(s, MotionPrimitiveSet::make_default(0.1, {}));
  AdaptiveGraph g(lat, {30, 30, 0, 0}, {70, 30});
  REQUIRE(g.regions().size() == 1);
  CHECK(g.cell_is_hd(45, 30));
  CHECK_FALSE(g.cell_is_hd(51, 30));
  CHECK(g.cell_is_hd(50, 30));  // boundary is inclusive
  const std::size_t before = g.covered_cells();
  const auto a = g.grow_region({40, 30}, RegionReason::discrepancy, 1);
  CHECK(a.grew);
  CHECK(a.radius == doctest::Approx(30));
  CHECK(g.cell_is_hd(55, 30));
  CHECK(g.covered_cells() > before);
  // No containing region: grow falls back to add.
  const auto b = g.grow_region({75, 5}, RegionReason::most_progress, 2);
  CHECK_FALSE(b.grew);
  CHECK(g.regions().size() == 2);
  // Nearest containing center wins.
  g.add_region({70, 30}, RegionReason::discrepancy, 3);
  const auto c = g.grow_region({66, 30}, RegionReason::discrepancy, 4);
  CHECK(c.region == 2);

  const auto trace = nlohmann::json::parse(g.region_trace_json());
  REQUIRE(trace.size() == 5);
  CHECK(trace[0]["reason"] == "start");
  CHECK(trace[1]["action"] == "grow");
  CHECK(trace[2]["reason"] == "most_progress");
  CHECK(trace[4]["radius"] == doctest::Approx(30));
}

TEST_CASE("grow until new coverage") {
  const Scenario s(empty_map(12, 12), robot(), {}, 500, 0.1);
  const Lattice lat(s, MotionPrimitiveSet::make_default(0.1, {}));
  AdaptiveGraph g(lat, {5, 5, 0, 0}, {10, 10}, {20, 1});
  CHECK(g.covered_cells() == 144);
  g.grow_region({5, 5}, RegionReason::discrepancy, 1, true);
  CHECK(g.covered_cells() == 144);  // stops once the region spans the map
}

TEST_CASE("ad successors far from any region are the 2D successors") {
  const Scenario s(empty_map(60, 60), robot(), {}, 1000, 0.1);
  const Lattice lat(s, MotionPrimitiveSet::make_default(0.1, {}));
  const AdaptiveGraph g(lat, {5, 5, 0, 0}, {50, 50}, {5, 5});
  std::vector<Edge<AdState>> out;
  g.successors(AdState::low({40, 40}), out);
  CHECK(out.size() == 8);
  for (const auto& e : out) {
    CHECK_FALSE(e.to.hd);
    CHECK(e.run == 1);
  }
}

TEST_CASE("ad successors leaving a region project to 2D") {
  const Scenario s(empty_map(40, 40), robot(), {}, 1000, 0.1);
  const Lattice lat(s, MotionPrimitiveSet::make_default(0.1, {}));
  const AdaptiveGraph g(lat, {10, 10, 0, 0}, {30, 30}, {5, 5});
  const AdState edge{15, 10, 0, 50, true};  // on the boundary, heading +x
  std::vector<Edge<AdState>> out;
  g.successors(edge, out);
  REQUIRE(!out.empty());
  for (const auto& e : out) {
    CHECK(e.to == AdState::low({16, 10}));
    CHECK(e.cost >= 1000);
  }
}

TEST_CASE("ad successors from 2D cells enter regions from pruned pre-images") {
  GridMap m = empty_map(10, 10);
  m.set_occupied(4, 3, true);
  m.set_occupied(6, 7, true);
  const Scenario s(m, robot(), {DynamicObstacle(0.5, 1.0, {{0.5, 0.5}, {9.5, 9.5}})}, 70, 0.1);
  const auto prims = MotionPrimitiveSet::make_default(0.1, {});
  const Lattice lat(s, prims);
  const AdaptiveGraph g(lat, {2, 2, 0, 0}, {8, 8}, {2.5, 1});
  oracle::Checker check(s, prims);
  int tested = 0;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      if (g.cell_is_hd(x, y) || !lat.ld_free(x, y)) continue;
      std::set<std::tuple<int, int, bool, int, std::int64_t, Cost>> want;
      std::vector<LdEdge> ld;
      lat.ld_successors({x, y}, ld);
      for (const auto& e : ld) {
        if (!g.cell_is_hd(e.to.x, e.to.y)) want.insert({e.to.x, e.to.y, false, 0, 0, e.cost});
      }
      g.inverse_project({x, y}).for_each([&](const StateHD& pre) {
        for (int idx : prims.for_heading(pre.heading)) {
          const auto& p = prims.all()[static_cast<std::size_t>(idx)];
          const int nx = x + p.dx, ny = y + p.dy;
          const std::int64_t t2 = pre.t + p.duration;
          if (!g.cell_is_hd(nx, ny) || t2 > s.time_horizon_steps()) continue;
          if (!g.inverse_project({nx, ny}).contains({nx, ny, p.end_heading, t2})) continue;
          if (!check.static_ok(x, y, idx)) continue;
          want.insert({nx, ny, true, p.end_heading, t2, p.cost});
        }
      });
      CHECK(expand(g, AdState::low({x, y})) == want);
      if (std::any_of(want.begin(), want.end(), [](const auto& w) { return std::get<2>(w); })) ++tested;
    }
  }
  CHECK(tested > 0);
}

TEST_CASE("a region covering the map degenerates to the 4D lattice") {
  GridMap m = empty_map(10, 10);
  m.set_occupied(5, 5, true);
  const Scenario s(m, robot(), {DynamicObstacle(0.5, 1.0, {{0.5, 5.5}, {9.5, 5.5}})}, 200, 0.1);
  const Lattice lat(s, MotionPrimitiveSet::make_default(0.1, {}));
  const AdaptiveGraph g(lat, {1, 1, 0, 0}, {8, 8}, {30, 10});
  std::vector<HdEdge> hd;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      for (int h = 0; h < kNumHeadings; h += 3) {
        const StateHD st{x, y, h, 60};
        lat.hd_successors(st, hd);
        std::set<std::tuple<int, int, bool, int, std::int64_t, Cost>> want;
        for (const auto& e : hd) {
          if (e.to.t >= g.tlb().at(e.to.x, e.to.y)) want.insert({e.to.x, e.to.y, true, e.to.heading, e.to.t, e.cost});
        }
        CHECK(expand(g, AdState::high(st)) == want);
      }
    }
  }
}

TEST_CASE("pruning is sound against exhaustive 4D reachability") {
  const GridMap m = make_map({
      "....................",
      "....................",
      "........#...........",
      "........#......##...",
      "........#......##...",
      "..###...#...........",
      "..###...............",
      "............#.......",
      "............#.......",
      ".....####...#.......",
      "............#.......",
      "....................",
      "....................",
      "....................",
  });
  const Scenario s(m, robot(), {}, 250, 0.1);
  const auto prims = MotionPrimitiveSet::make_default(0.1, {});
  const Lattice lat(s, prims);
  const StateHD start{2, 2, 0, 0};
  const auto tlb = compute_time_lower_bounds(lat, project(start));
  const auto first = oracle::earliest_arrival(s, prims, start);
  int reached = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const auto t = first[m.index(x, y)];
      if (t < 0) continue;
      ++reached;
      REQUIRE(tlb.reachable(x, y));
      CHECK(t >= tlb.at(x, y));
    }
  }
  CHECK(reached > 100);
}
