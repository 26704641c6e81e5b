#pragma once

#include <chrono>
#include <cstdint>

#include "adplan/adplanner.hpp"

namespace adplan {

struct BaselineConfig {
  double epsilon{1.0};
  std::chrono::duration<double> timeout{300.0};
  std::uint64_t max_nodes{0};  // 0 = unlimited
};

/// Weighted A* over the full space-time lattice with every transition
/// checked against all obstacles, under the same heuristic and primitives
/// as the adaptive planner.
PlanOutcome plan_full(const Lattice& lattice, const StateHD& start, StateLD goal, const BaselineConfig& config);
PlanOutcome plan_full(const Lattice& lattice, const HeuristicMap& heuristic, const StateHD& start, StateLD goal,
                      const BaselineConfig& config);

}  // namespace adplan
