#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "adplan/world.hpp"
#include "json.hpp"

namespace adplan {

namespace {

using nlohmann::json;

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

json points_to_json(const std::vector<Vec2>& pts) {
  json arr = json::array();
  for (const Vec2& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<Vec2> points_from_json(const json& arr) {
  std::vector<Vec2> pts;
  for (const json& p : arr) {
    if (!p.is_array() || p.size() != 2) throw std::runtime_error("point must be [x, y]");
    pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return pts;
}

}  // namespace

GridMap parse_map(const std::string& text) {
  std::istringstream in(text);
  int width = 0, height = 0;
  double cell_size = 0;
  if (!(in >> width >> height >> cell_size)) throw std::runtime_error("map header must be 'width height cell_size'");
  GridMap map(width, height, cell_size);
  std::string row;
  std::getline(in, row);
  for (int y = 0; y < height; ++y) {
    if (!std::getline(in, row)) throw std::runtime_error("map has fewer rows than its height");
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (static_cast<int>(row.size()) != width) throw std::runtime_error("map row " + std::to_string(y) + " has wrong width");
    for (int x = 0; x < width; ++x) {
      if (row[x] == '#') {
        map.set_occupied(x, y, true);
      } else if (row[x] != '.') {
        throw std::runtime_error("map rows may only contain '.' and '#'");
      }
    }
  }
  return map;
}

std::string format_map(const GridMap& map) {
  std::string out = std::to_string(map.width()) + " " + std::to_string(map.height()) + " " + shortest(map.cell_size()) + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(map.height()) * (map.width() + 1));
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) out.push_back(map.occupied(x, y) ? '#' : '.');
    out.push_back('\n');
  }
  return out;
}

GridMap load_map(const std::string& path) { return parse_map(read_file(path)); }

void save_map(const GridMap& map, const std::string& path) { write_file(path, format_map(map)); }

std::string format_scenario(const ScenarioFile& f) {
  json j;
  j["map_file"] = f.map_file;
  j["dt"] = f.dt;
  j["time_horizon_steps"] = f.time_horizon_steps;
  j["footprint"] = {{"polygon", points_to_json(f.footprint.polygon())},
                    {"inscribed_radius", f.footprint.inscribed_radius()},
                    {"circumscribed_radius", f.footprint.circumscribed_radius()}};
  json obs = json::array();
  for (const DynamicObstacle& o : f.obstacles) {
    obs.push_back({{"radius", o.radius()}, {"speed", o.speed()}, {"waypoints", points_to_json(o.waypoints())}});
  }
  j["obstacles"] = std::move(obs);
  if (f.has_query) {
    j["start"] = {f.start_x, f.start_y, f.start_heading};
    j["goal"] = {f.goal_x, f.goal_y};
  }
  return j.dump(1) + "\n";
}

ScenarioFile parse_scenario(const std::string& json_text) {
  ScenarioFile f;
  try {
    const json j = json::parse(json_text);
    f.map_file = j.at("map_file").get<std::string>();
    f.dt = j.at("dt").get<double>();
    f.time_horizon_steps = j.at("time_horizon_steps").get<std::int64_t>();
    const json& fp = j.at("footprint");
    f.footprint = RobotFootprint(points_from_json(fp.at("polygon")), fp.at("inscribed_radius").get<double>(),
                                 fp.at("circumscribed_radius").get<double>());
    for (const json& o : j.at("obstacles")) {
      f.obstacles.emplace_back(o.at("radius").get<double>(), o.at("speed").get<double>(),
                               points_from_json(o.at("waypoints")));
    }
    if (j.contains("start") && j.contains("goal")) {
      f.has_query = true;
      f.start_x = j["start"].at(0).get<int>();
      f.start_y = j["start"].at(1).get<int>();
      f.start_heading = j["start"].size() > 2 ? j["start"].at(2).get<int>() : 0;
      f.goal_x = j["goal"].at(0).get<int>();
      f.goal_y = j["goal"].at(1).get<int>();
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("invalid scenario file: ") + e.what());
  }
  return f;
}

Scenario load_scenario(const std::string& path, ScenarioFile* file_out) {
  ScenarioFile f = parse_scenario(read_file(path));
  std::filesystem::path map_path(f.map_file);
  if (map_path.is_relative()) map_path = std::filesystem::path(path).parent_path() / map_path;
  Scenario s(load_map(map_path.string()), f.footprint, f.obstacles, f.time_horizon_steps, f.dt);
  if (file_out) *file_out = std::move(f);
  return s;
}

void save_scenario(const ScenarioFile& file, const std::string& path) { write_file(path, format_scenario(file)); }

}  // namespace adplan
