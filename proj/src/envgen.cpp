#include "adplan/envgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

#include "adplan/adgraph.hpp"
#include "adplan/search.hpp"

namespace adplan {

std::string to_string(MapKind k) { return k == MapKind::maze ? "maze" : "indoor"; }

MapKind parse_map_kind(const std::string& s) {
  if (s == "maze") return MapKind::maze;
  if (s == "indoor") return MapKind::indoor;
  throw std::invalid_argument("unknown map kind '" + s + "'");
}

std::int64_t GenSpec::effective_horizon(Cost ld_path_cost) const {
  if (horizon_steps > 0) return horizon_steps;
  const double path_s = static_cast<double>(ld_path_cost) / static_cast<double>(CostModel{}.cost_scale);
  return static_cast<std::int64_t>(std::ceil(std::max(3.5 * size, horizon_path_factor * path_s) / dt - 1e-9));
}

double GenSpec::large_radius() const {
  const int width = kind == MapKind::indoor ? hallway_width : gap_min;
  return width * cell_size / 2.0;
}

double GenSpec::small_radius() const { return large_radius() / 2.0; }

RobotFootprint default_footprint(double cell_size) {
  const double a = 0.6 * cell_size;
  const double b = 0.4 * cell_size;
  return RobotFootprint::from_polygon({{-a, -b}, {a, -b}, {a, b}, {-a, b}});
}

namespace {

constexpr int kMaxAttempts = 10;

using Rng = std::mt19937_64;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void validate(const GenSpec& s) {
  if (s.size < 50) throw std::invalid_argument("map size must be at least 50");
  if (s.size > 0xFFFF) throw std::invalid_argument("map size too large");
  if (s.n_obstacles < 0) throw std::invalid_argument("obstacle count must be non-negative");
  if (s.large_fraction < 0 || s.large_fraction > 1) throw std::invalid_argument("large_fraction must be in [0, 1]");
  if (!(s.cell_size > 0) || !(s.dt > 0) || !(s.obstacle_speed > 0)) {
    throw std::invalid_argument("cell_size, dt and obstacle_speed must be positive");
  }
  if (s.wall_spacing_min < 2 || s.wall_spacing_max < s.wall_spacing_min) throw std::invalid_argument("bad wall spacing");
  if (s.gap_min < 1 || s.gap_max < s.gap_min) throw std::invalid_argument("bad gap widths");
  if (!(s.horizon_path_factor >= 1)) throw std::invalid_argument("horizon_path_factor must be >= 1");
  if (s.hallway_width < 2 || s.room_pitch < s.hallway_width + 8) throw std::invalid_argument("bad hallway layout");
}

void fill_rect(GridMap& m, int x0, int y0, int x1, int y1, bool occupied) {
  for (int y = std::max(0, y0); y <= std::min(m.height() - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(m.width() - 1, x1); ++x) m.set_occupied(x, y, occupied);
  }
}

GridMap maze_map(const GenSpec& spec, Rng& rng) {
  GridMap m(spec.size, spec.size, spec.cell_size);
  const int n = spec.size;
  int x = uniform(rng, spec.wall_spacing_min, spec.wall_spacing_max);
  while (x < n - spec.wall_spacing_min) {
    fill_rect(m, x, 0, x, n - 1, true);
    const int gaps = uniform(rng, 1, 3);
    for (int g = 0; g < gaps; ++g) {
      const int w = uniform(rng, spec.gap_min, spec.gap_max);
      const int y = uniform(rng, 0, n - w);
      fill_rect(m, x, y, x, y + w - 1, false);
    }
    x += uniform(rng, spec.wall_spacing_min, spec.wall_spacing_max);
  }
  return m;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  }
};

// Hallways of width W along a grid of nodes (random spanning tree plus a few
// extra links); rooms hang off the hallways through single doors.
GridMap indoor_map(const GenSpec& spec, Rng& rng) {
  const int n = spec.size;
  const int W = spec.hallway_width;
  const int P = spec.room_pitch;
  GridMap m(n, n, spec.cell_size);
  fill_rect(m, 0, 0, n - 1, n - 1, true);
  const int k = n / P;  // nodes per side
  const int offset = (n - (k - 1) * P) / 2;
  auto node_pos = [&](int i) { return offset + i * P; };
  auto id = [&](int i, int j) { return j * k + i; };

  struct Link {
    int a_i, a_j, b_i, b_j;
  };
  std::vector<Link> links;
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      if (i + 1 < k) links.push_back({i, j, i + 1, j});
      if (j + 1 < k) links.push_back({i, j, i, j + 1});
    }
  }
  std::shuffle(links.begin(), links.end(), rng);
  DisjointSets sets(k * k);
  std::bernoulli_distribution extra(spec.extra_hallway_probability);
  auto carve_link = [&](const Link& l) {
    const int x0 = std::min(node_pos(l.a_i), node_pos(l.b_i)) - W / 2;
    const int x1 = std::max(node_pos(l.a_i), node_pos(l.b_i)) + (W - W / 2) - 1;
    const int y0 = std::min(node_pos(l.a_j), node_pos(l.b_j)) - W / 2;
    const int y1 = std::max(node_pos(l.a_j), node_pos(l.b_j)) + (W - W / 2) - 1;
    fill_rect(m, x0, y0, x1, y1, false);
  };
  for (const Link& l : links) {
    const bool tree = sets.unite(id(l.a_i, l.a_j), id(l.b_i, l.b_j));
    // Draw the extra-link coin for every link so the stream does not depend on the tree.
    const bool more = extra(rng);
    if (tree || more) carve_link(l);
  }

  // Rooms inside the blocks between hallways.
  std::bernoulli_distribution has_room(spec.room_probability);
  const int wall = 2;
  const int door = std::max(3, W - 2);
  for (int j = 0; j + 1 < k; ++j) {
    for (int i = 0; i + 1 < k; ++i) {
      if (!has_room(rng)) continue;
      const int lo_x = node_pos(i) + (W - W / 2) + wall;
      const int hi_x = node_pos(i + 1) - W / 2 - wall - 1;
      const int lo_y = node_pos(j) + (W - W / 2) + wall;
      const int hi_y = node_pos(j + 1) - W / 2 - wall - 1;
      const int span_x = hi_x - lo_x + 1;
      const int span_y = hi_y - lo_y + 1;
      if (span_x < door + 2 || span_y < door + 2) continue;
      const int w = uniform(rng, std::max(door + 2, span_x / 2), span_x);
      const int h = uniform(rng, std::max(door + 2, span_y / 2), span_y);
      const int rx = uniform(rng, lo_x, hi_x - w + 1);
      const int ry = uniform(rng, lo_y, hi_y - h + 1);
      fill_rect(m, rx, ry, rx + w - 1, ry + h - 1, false);
      // Door through the wall toward one of the four surrounding hallways.
      switch (uniform(rng, 0, 3)) {
        case 0: {
          const int dx = uniform(rng, rx, rx + w - door);
          fill_rect(m, dx, node_pos(j), dx + door - 1, ry - 1, false);
          break;
        }
        case 1: {
          const int dx = uniform(rng, rx, rx + w - door);
          fill_rect(m, dx, ry + h, dx + door - 1, node_pos(j + 1), false);
          break;
        }
        case 2: {
          const int dy = uniform(rng, ry, ry + h - door);
          fill_rect(m, node_pos(i), dy, rx - 1, dy + door - 1, false);
          break;
        }
        default: {
          const int dy = uniform(rng, ry, ry + h - door);
          fill_rect(m, rx + w, dy, node_pos(i + 1), dy + door - 1, false);
          break;
        }
      }
    }
  }
  return m;
}

GridMap draw_map(const GenSpec& spec, Rng& rng) {
  return spec.kind == MapKind::maze ? maze_map(spec, rng) : indoor_map(spec, rng);
}

// Distance from each free cell center to the nearest occupied cell or map
// edge, in cells, saturated at `cap`.
std::vector<double> clearance(const GridMap& m, int cap) {
  std::vector<double> out(m.cell_count(), 0.0);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.occupied(x, y)) continue;
      const double cx = x + 0.5;
      const double cy = y + 0.5;
      double best = std::min({cx, cy, m.width() - cx, m.height() - cy, static_cast<double>(cap)});
      for (int oy = y - cap; oy <= y + cap; ++oy) {
        for (int ox = x - cap; ox <= x + cap; ++ox) {
          if (!m.in_bounds(ox, oy) || !m.occupied(ox, oy)) continue;
          best = std::min(best, point_box_distance({cx, cy}, {static_cast<double>(ox), static_cast<double>(oy)},
                                                   {ox + 1.0, oy + 1.0}));
        }
      }
      out[m.index(x, y)] = best;
    }
  }
  return out;
}

// Nearest cell to `corner` that is 2D-free, as far from walls as the
// surroundings allow, and admits some heading; prefers the heading that points
// at `toward`.
std::optional<StateHD> place(const Lattice& lat, const std::vector<double>& clear, StateLD corner, StateLD toward) {
  const GridMap& m = lat.map();
  std::vector<StateLD> cells;
  for (double need : {2.5, 2.0, 1.5, 0.0}) {
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        if (lat.ld_free(x, y) && clear[m.index(x, y)] >= need) cells.push_back({x, y});
      }
    }
    if (!cells.empty()) break;
  }
  auto d2 = [&](StateLD c) {
    const long long dx = c.x - corner.x;
    const long long dy = c.y - corner.y;
    return dx * dx + dy * dy;
  };
  std::sort(cells.begin(), cells.end(), [&](StateLD a, StateLD b) {
    const auto da = d2(a), db = d2(b);
    if (da != db) return da < db;
    return a < b;
  });
  for (const StateLD& c : cells) {
    const double ang = std::atan2(static_cast<double>(toward.y - c.y), static_cast<double>(toward.x - c.x));
    const int pref = static_cast<int>(std::lround(ang / (2.0 * std::numbers::pi / kNumHeadings)));
    for (int k = 0; k < kNumHeadings; ++k) {
      const int h = ((pref + (k % 2 == 0 ? k / 2 : -(k + 1) / 2)) % kNumHeadings + kNumHeadings) % kNumHeadings;
      if (lat.pose_free(c.x, c.y, h)) return StateHD{c.x, c.y, h, 0};
    }
  }
  return std::nullopt;
}

// 8-connected grid restricted to a cell mask, for obstacle routes.
struct MaskSpace {
  using State = StateLD;
  const GridMap* map;
  const std::vector<std::uint8_t>* allowed;

  std::uint64_t key(StateLD s) const { return map->index(s.x, s.y); }
  bool is_hd(StateLD) const { return false; }
  void successors(StateLD s, std::vector<Edge<StateLD>>& out) const {
    static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    out.clear();
    for (int i = 0; i < 8; ++i) {
      const int nx = s.x + kDx[i];
      const int ny = s.y + kDy[i];
      if (!map->in_bounds(nx, ny) || !(*allowed)[map->index(nx, ny)]) continue;
      const bool diag = kDx[i] != 0 && kDy[i] != 0;
      if (diag && (!(*allowed)[map->index(s.x + kDx[i], s.y)] || !(*allowed)[map->index(s.x, s.y + kDy[i])])) continue;
      out.push_back({{nx, ny}, diag ? 1414 : 1000, 1});
    }
  }
};

Cost octile(StateLD a, StateLD b) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  return 1000 * std::max(dx, dy) + 414 * std::min(dx, dy);
}

std::vector<DynamicObstacle> obstacles_with(const GridMap& map, const GenSpec& spec, StateLD start, StateLD goal,
                                            Rng& rng) {
  std::vector<DynamicObstacle> result;
  if (spec.n_obstacles == 0) return result;
  const double cs = map.cell_size();
  const std::vector<double> clear = clearance(map, 4);
  const double corridor = (spec.kind == MapKind::indoor ? spec.hallway_width : spec.gap_min) - 1;
  const double robot_reach = default_footprint(1.0).circumscribed_radius();
  const double min_length = spec.min_trajectory_fraction * std::sqrt(2.0) * spec.size;
  std::bernoulli_distribution large(spec.large_fraction);

  for (int o = 0; o < spec.n_obstacles; ++o) {
    const double radius = large(rng) ? spec.large_radius() : spec.small_radius();
    const double r_cells = radius / cs;
    const double need = std::min(r_cells, corridor / 2.0);
    const double keep_out = r_cells + robot_reach + 3.0;
    std::vector<std::uint8_t> allowed(map.cell_count(), 0);
    std::vector<StateLD> pool;
    for (int y = 0; y < map.height(); ++y) {
      for (int x = 0; x < map.width(); ++x) {
        if (map.occupied(x, y) || clear[map.index(x, y)] < need) continue;
        if (std::hypot(x - start.x, y - start.y) < keep_out || std::hypot(x - goal.x, y - goal.y) < keep_out) continue;
        allowed[map.index(x, y)] = 1;
        pool.push_back({x, y});
      }
    }
    // Keep the largest 8-connected component so every goal is reachable.
    {
      std::vector<int> comp(map.cell_count(), -1);
      std::vector<std::size_t> sizes;
      std::vector<StateLD> stack;
      for (const StateLD& c : pool) {
        if (comp[map.index(c.x, c.y)] >= 0) continue;
        const int label = static_cast<int>(sizes.size());
        sizes.push_back(0);
        comp[map.index(c.x, c.y)] = label;
        stack.push_back(c);
        std::vector<Edge<StateLD>> next;
        const MaskSpace flood{&map, &allowed};
        while (!stack.empty()) {
          const StateLD u = stack.back();
          stack.pop_back();
          ++sizes.back();
          flood.successors(u, next);
          for (const auto& e : next) {
            int& slot = comp[map.index(e.to.x, e.to.y)];
            if (slot < 0) {
              slot = label;
              stack.push_back(e.to);
            }
          }
        }
      }
      const int biggest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      std::vector<StateLD> kept;
      for (const StateLD& c : pool) {
        if (comp[map.index(c.x, c.y)] == biggest) {
          kept.push_back(c);
        } else {
          allowed[map.index(c.x, c.y)] = 0;
        }
      }
      pool.swap(kept);
    }
    if (pool.size() < 2) throw std::runtime_error("no room for dynamic obstacles");
    const MaskSpace space{&map, &allowed};
    auto pick = [&]() { return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]; };

    StateLD at = pick();
    std::vector<StateLD> route{at};
    double length = 0.0;
    int failures = 0;
    while (length < min_length) {
      const StateLD target = pick();
      if (target == at) continue;
      const auto r = weighted_astar(space, at, [&](StateLD c) { return c == target; },
                                    [&](StateLD c) { return octile(c, target); }, 1.0);
      if (!r.found()) {
        if (++failures > 50) throw std::runtime_error("obstacle goals unreachable");
        continue;
      }
      for (std::size_t i = 1; i < r.path.size(); ++i) {
        route.push_back(r.path[i]);
        length += std::hypot(r.path[i].x - r.path[i - 1].x, r.path[i].y - r.path[i - 1].y);
      }
      at = target;
    }
    // Keep only the corners of the cell route.
    std::vector<Vec2> waypoints;
    for (std::size_t i = 0; i < route.size(); ++i) {
      if (i > 0 && i + 1 < route.size()) {
        const int ax = route[i].x - route[i - 1].x, ay = route[i].y - route[i - 1].y;
        const int bx = route[i + 1].x - route[i].x, by = route[i + 1].y - route[i].y;
        if (ax == bx && ay == by) continue;
      }
      waypoints.push_back(map.cell_center(route[i].x, route[i].y));
    }
    result.emplace_back(radius, spec.obstacle_speed * cs, std::move(waypoints));
  }
  return result;
}

}  // namespace

GeneratedScenario generate_scenario(const GenSpec& spec) {
  validate(spec);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
    GeneratedScenario g;
    g.map = draw_map(spec, rng);
    g.footprint = default_footprint(spec.cell_size);
    g.dt = spec.dt;
    g.attempts = attempt + 1;
    const Scenario bare(g.map, g.footprint, {}, spec.effective_horizon(), spec.dt);
    const Lattice lat(bare, MotionPrimitiveSet::make_default(spec.dt, {}));
    const int n = spec.size;
    const std::vector<double> clear = clearance(g.map, 3);
    const auto s = place(lat, clear, {3, 3}, {n - 4, n - 4});
    const auto t = place(lat, clear, {n - 4, n - 4}, {3, 3});
    if (!s || !t || project(*s) == project(*t)) continue;
    const Cost ld_cost = ld_optimal_cost(lat, project(*s), project(*t));
    if (ld_cost == kInfiniteCost) continue;
    g.start = *s;
    g.goal = project(*t);
    g.horizon_steps = spec.effective_horizon(ld_cost);
    if (g.horizon_steps > kMaxHorizonSteps) throw std::invalid_argument("time horizon too large");
    try {
      g.obstacles = obstacles_with(g.map, spec, project(g.start), g.goal, rng);
    } catch (const std::runtime_error&) {
      continue;
    }
    return g;
  }
  throw std::runtime_error("environment generation failed after 10 attempts");
}

GridMap generate_map(const GenSpec& spec) { return generate_scenario(spec).map; }

std::vector<DynamicObstacle> generate_obstacles(const GridMap& map, const GenSpec& spec, StateLD start, StateLD goal) {
  Rng rng(derive_seed(spec.seed, 1000));
  return obstacles_with(map, spec, start, goal, rng);
}

std::string scenario_stem(const GenSpec& spec) {
  return to_string(spec.kind) + "_" + std::to_string(spec.size) + "_" + std::to_string(spec.seed);
}

std::string write_scenario(const GeneratedScenario& g, const std::string& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  save_map(g.map, (base / (stem + ".map")).string());
  ScenarioFile f;
  f.map_file = stem + ".map";
  f.dt = g.dt;
  f.time_horizon_steps = g.horizon_steps;
  f.footprint = g.footprint;
  f.obstacles = g.obstacles;
  f.has_query = true;
  f.start_x = g.start.x;
  f.start_y = g.start.y;
  f.start_heading = g.start.heading;
  f.goal_x = g.goal.x;
  f.goal_y = g.goal.y;
  const std::string path = (base / (stem + ".json")).string();
  save_scenario(f, path);
  return path;
}

}  // namespace adplan
