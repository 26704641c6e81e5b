#pragma once

// Experiment suites over generated environments, CSV rows, aggregate tables
// and SVG scene export.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adplan/adplanner.hpp"
#include "adplan/envgen.hpp"

namespace adplan {

struct SuiteSpec {
  int n_environments{50};
  GenSpec gen;  // environment i uses seed gen.seed + i
  std::vector<double> epsilons{1.1, 1.5, 2.0};
  std::vector<std::string> planners{"ad", "baseline"};
  std::chrono::duration<double> timeout{300.0};
  std::uint64_t max_nodes{0};
  int workers{1};
};

/// JSON keys: n_environments, kind, size, seed, n_obstacles, large_fraction,
/// epsilons, planners, timeout_s, max_nodes, workers. Missing keys keep
/// their defaults; unknown keys are rejected.
SuiteSpec parse_suite(const std::string& json_text);
SuiteSpec load_suite(const std::string& path);

struct ResultRow {
  std::string planner;
  double epsilon{1.0};
  std::string env;
  std::string status;  // PlanStatus name, "invalid" or "error"
  double time_s{0};
  std::uint64_t hd_expansions{0};
  std::uint64_t ld_expansions{0};
  Cost cost{0};
  int iterations{0};

  bool found() const { return status == "found"; }
};

/// Runs every (environment, epsilon, planner) cell. Rows come back ordered by
/// environment, then epsilon, then planner, whatever the worker count.
std::vector<ResultRow> run_suite(const SuiteSpec& suite);

struct Stat {
  double mean{0};
  double stddev{0};  // sample (n - 1); 0 for fewer than two values
};
Stat mean_stddev(std::span<const double> values);

struct AggregateRow {
  std::string planner;
  double epsilon{1.0};
  int runs{0};
  int successes{0};
  int shared{0};  // environments where every planner of the suite succeeded
  Stat time_s, hd_expansions, ld_expansions, cost;
};

/// Success counts over all rows; means and deviations only over shared
/// successes. Rows are ordered by epsilon, then planner name.
std::vector<AggregateRow> aggregate(std::span<const ResultRow> rows);
/// Fixed-width text table. An epsilon without shared successes prints the
/// counts followed by "no shared successes".
std::string format_aggregate(std::span<const AggregateRow> table);

inline constexpr const char* kCsvHeader = "planner,epsilon,env,status,time_s,hd_expansions,ld_expansions,cost,iterations";
std::string format_csv(std::span<const ResultRow> rows);
std::string format_csv_row(const ResultRow& row);
std::vector<ResultRow> parse_csv(const std::string& text);

/// Static grid, obstacle trajectories, one circle per region action and the
/// path as a single time-shaded polyline. Throws std::runtime_error when the
/// file cannot be written.
void render_svg(const Scenario& scenario, const PlanOutcome* outcome, std::span<const RegionAction> regions,
                const std::string& path);
std::string svg_string(const Scenario& scenario, const PlanOutcome* outcome, std::span<const RegionAction> regions);

}  // namespace adplan
