#pragma once

// Search kernels: the 2D Dijkstra heuristic and a weighted A* that runs over
// any successor space.
//
// A space exposes
//   using State = ...;
//   std::uint64_t key(const State&) const;       // unique, defines tie order
//   bool is_hd(const State&) const;              // expansion accounting
//   void successors(const State&, std::vector<Edge<State>>&) const;
// and, when it emits edges with run > 1,
//   State advance(const State&, std::int32_t k) const;
// An edge with run = n stands for the n states advance(to, 0..n-1), all
// reached at the same cost. The open list keeps one entry per run and
// materializes members in key order, which is equivalent to pushing them all.
// The heuristic must be equal across the members of a run.

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "adplan/lattice.hpp"

namespace adplan {

template <class State>
struct Edge {
  State to;
  Cost cost{0};
  std::int32_t run{1};
};

struct SearchStats {
  std::uint64_t hd_expansions{0};
  std::uint64_t ld_expansions{0};
  std::uint64_t generated{0};
  std::uint64_t peak_open_size{0};
  double elapsed_s{0};

  SearchStats& operator+=(const SearchStats& o) {
    hd_expansions += o.hd_expansions;
    ld_expansions += o.ld_expansions;
    generated += o.generated;
    peak_open_size = std::max(peak_open_size, o.peak_open_size);
    elapsed_s += o.elapsed_s;
    return *this;
  }
};

enum class SearchStatus {
  found,
  exhausted,           // open list emptied: no path exists in the searched graph
  resource_exhausted,  // deadline, expansion or node limit hit
};

struct SearchLimits {
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::uint64_t max_expansions{0};  // 0 = unlimited
  std::uint64_t max_nodes{0};       // 0 = unlimited
};

inline constexpr std::uint64_t kDeadlineCheckInterval = 4096;

template <class State>
struct SearchResult {
  SearchStatus status{SearchStatus::exhausted};
  std::vector<State> path;
  std::vector<Cost> path_g;  // cumulative cost at each path state
  Cost cost{0};
  SearchStats stats;
  // Expanded state with the smallest heuristic (ties: larger g, smaller key).
  std::optional<State> frontier_best;
  Cost frontier_best_h{kInfiniteCost};
  Cost frontier_best_g{0};

  bool found() const { return status == SearchStatus::found; }
};

/// Cost-to-goal over the 2D lattice (inflated static map), one entry per cell.
class HeuristicMap {
 public:
  HeuristicMap() = default;
  HeuristicMap(int width, int height) : width_(width), height_(height),
      cost_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kInfiniteCost) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Cost at(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return kInfiniteCost;
    return cost_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }
  Cost& at_mut(int x, int y) {
    return cost_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }
  bool reachable(int x, int y) const { return at(x, y) != kInfiniteCost; }

 private:
  int width_{0};
  int height_{0};
  std::vector<Cost> cost_;
};

/// Exact 2D costs-to-goal ignoring dynamic obstacles. Throws
/// std::invalid_argument("goal blocked") when the goal cell is not 2D-free.
HeuristicMap dijkstra_heuristic(const Lattice& lattice, StateLD goal);

namespace detail {

template <class State>
struct SearchNode {
  State state;
  Cost g;
  Cost h;
  std::uint32_t parent;
  bool closed;
};

template <class State>
struct OpenEntry {
  double f;
  Cost g;
  std::uint64_t key;
  std::uint32_t node;     // node index, or parent index for run entries
  std::int32_t run_left;  // 0 for plain entries
  Cost h;
  State state;            // current member for run entries
};

template <class State>
struct WorseEntry {
  bool operator()(const OpenEntry<State>& a, const OpenEntry<State>& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;  // deeper first
    return a.key > b.key;
  }
};

inline constexpr std::uint32_t kNoParent = 0xffffffffu;

}  // namespace detail

/// Weighted A* with f = g + epsilon * h. States are closed on first
/// expansion and never reopened; with a consistent h the returned cost is
/// within epsilon of optimal. The goal test is applied at expansion.
template <class Space, class GoalTest, class Heuristic>
SearchResult<typename Space::State> weighted_astar(const Space& space, const typename Space::State& start,
                                                   GoalTest&& is_goal, Heuristic&& heuristic, double epsilon,
                                                   const SearchLimits& limits = {}) {
  using State = typename Space::State;
  using Node = detail::SearchNode<State>;
  using Entry = detail::OpenEntry<State>;

  const auto t_begin = std::chrono::steady_clock::now();
  SearchResult<State> result;
  std::vector<Node> nodes;
  absl::flat_hash_map<std::uint64_t, std::uint32_t> index;
  std::priority_queue<Entry, std::vector<Entry>, detail::WorseEntry<State>> open;
  std::vector<Edge<State>> edges;

  auto finish = [&](SearchStatus status) {
    result.status = status;
    result.stats.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return result;
  };

  const Cost h0 = heuristic(start);
  if (h0 == kInfiniteCost) return finish(SearchStatus::exhausted);
  nodes.push_back({start, 0, h0, detail::kNoParent, false});
  index.emplace(space.key(start), 0u);
  open.push({epsilon * static_cast<double>(h0), 0, space.key(start), 0u, 0, h0, start});

  auto push_node = [&](const State& s, Cost g, Cost h, std::uint32_t parent) -> std::uint32_t {
    nodes.push_back({s, g, h, parent, false});
    return static_cast<std::uint32_t>(nodes.size() - 1);
  };

  std::uint64_t expansions = 0;
  while (!open.empty()) {
    result.stats.peak_open_size = std::max<std::uint64_t>(result.stats.peak_open_size, open.size());
    Entry e = open.top();
    open.pop();

    std::uint32_t current;
    if (e.run_left > 0) {
      if constexpr (requires { space.advance(e.state, 1); }) {
        if (e.run_left > 1) {
          Entry next = e;
          next.state = space.advance(e.state, 1);
          next.key = space.key(next.state);
          --next.run_left;
          open.push(next);
        }
      }
      auto it = index.find(e.key);
      if (it != index.end()) {
        Node& n = nodes[it->second];
        if (n.closed || n.g < e.g) continue;
        n.g = e.g;
        n.parent = e.node;
        current = it->second;
      } else {
        current = push_node(e.state, e.g, e.h, e.node);
        index.emplace(e.key, current);
        ++result.stats.generated;
      }
    } else {
      current = e.node;
      if (nodes[current].closed || nodes[current].g != e.g) continue;
    }

    Node& cur = nodes[current];
    const State state = cur.state;
    const Cost g = cur.g;
    if (is_goal(state)) {
      std::vector<std::uint32_t> chain;
      for (std::uint32_t i = current; i != detail::kNoParent; i = nodes[i].parent) chain.push_back(i);
      std::reverse(chain.begin(), chain.end());
      for (std::uint32_t i : chain) {
        result.path.push_back(nodes[i].state);
        result.path_g.push_back(nodes[i].g);
      }
      result.cost = g;
      if (!result.frontier_best || cur.h < result.frontier_best_h) {
        result.frontier_best = state;
        result.frontier_best_h = cur.h;
        result.frontier_best_g = g;
      }
      return finish(SearchStatus::found);
    }
    cur.closed = true;
    if (space.is_hd(state)) {
      ++result.stats.hd_expansions;
    } else {
      ++result.stats.ld_expansions;
    }
    {
      const bool better = !result.frontier_best || cur.h < result.frontier_best_h ||
                          (cur.h == result.frontier_best_h &&
                           (g > result.frontier_best_g ||
                            (g == result.frontier_best_g && e.key < space.key(*result.frontier_best))));
      if (better) {
        result.frontier_best = state;
        result.frontier_best_h = cur.h;
        result.frontier_best_g = g;
      }
    }

    ++expansions;
    if (limits.max_expansions != 0 && expansions >= limits.max_expansions) return finish(SearchStatus::resource_exhausted);
    if (limits.max_nodes != 0 && nodes.size() >= limits.max_nodes) return finish(SearchStatus::resource_exhausted);
    if (limits.deadline && expansions % kDeadlineCheckInterval == 0 &&
        std::chrono::steady_clock::now() >= *limits.deadline) {
      return finish(SearchStatus::resource_exhausted);
    }

    edges.clear();
    space.successors(state, edges);
    for (const Edge<State>& edge : edges) {
      const Cost g2 = g + edge.cost;
      const Cost h2 = heuristic(edge.to);
      if (h2 == kInfiniteCost) continue;
      const double f2 = static_cast<double>(g2) + epsilon * static_cast<double>(h2);
      if (edge.run > 1) {
        open.push({f2, g2, space.key(edge.to), current, edge.run, h2, edge.to});
        continue;
      }
      const std::uint64_t k = space.key(edge.to);
      auto it = index.find(k);
      std::uint32_t target;
      if (it != index.end()) {
        Node& n = nodes[it->second];
        if (n.closed || g2 >= n.g) continue;
        n.g = g2;
        n.parent = current;
        target = it->second;
      } else {
        target = push_node(edge.to, g2, h2, current);
        index.emplace(k, target);
        ++result.stats.generated;
      }
      open.push({f2, g2, k, target, 0, h2, edge.to});
    }
  }
  return finish(SearchStatus::exhausted);
}

}  // namespace adplan
