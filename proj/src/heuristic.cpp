#include <functional>
#include <queue>
#include <stdexcept>

#include "adplan/search.hpp"

namespace adplan {

HeuristicMap dijkstra_heuristic(const Lattice& lattice, StateLD goal) {
  const GridMap& m = lattice.map();
  if (!lattice.ld_free(goal.x, goal.y)) throw std::invalid_argument("goal blocked");
  HeuristicMap h(m.width(), m.height());
  using Item = std::pair<Cost, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  h.at_mut(goal.x, goal.y) = 0;
  open.push({0, m.index(goal.x, goal.y)});
  std::vector<LdEdge> edges;
  const auto w = static_cast<std::size_t>(m.width());
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    const StateLD s{static_cast<int>(idx % w), static_cast<int>(idx / w)};
    if (d != h.at(s.x, s.y)) continue;
    // The 2D lattice is symmetric, so forward successors serve as predecessors.
    lattice.ld_successors(s, edges);
    for (const LdEdge& e : edges) {
      Cost& slot = h.at_mut(e.to.x, e.to.y);
      if (d + e.cost < slot) {
        slot = d + e.cost;
        open.push({slot, m.index(e.to.x, e.to.y)});
      }
    }
  }
  return h;
}

}  // namespace adplan
