#pragma once

#include <string>
#include <vector>

#include "adplan/world.hpp"

namespace testing_support {

/// rows[y][x], '#' occupied.
inline adplan::GridMap make_map(const std::vector<std::string>& rows, double cell_size = 1.0) {
  adplan::GridMap m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), cell_size);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) m.set_occupied(x, y, rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] == '#');
  }
  return m;
}

inline adplan::GridMap empty_map(int w, int h, double cell_size = 1.0) { return adplan::GridMap(w, h, cell_size); }

/// 1.2 x 0.8 cell rectangle.
inline adplan::RobotFootprint robot() {
  return adplan::RobotFootprint::from_polygon({{-0.6, -0.4}, {0.6, -0.4}, {0.6, 0.4}, {-0.6, 0.4}});
}

}  // namespace testing_support
