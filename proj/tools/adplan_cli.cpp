// adplan: plan single queries, generate scenarios, run benchmark suites.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "adplan/baseline.hpp"
#include "adplan/bench.hpp"
#include "adplan/envgen.hpp"

namespace {

using namespace adplan;

constexpr int kExitFound = 0;
constexpr int kExitError = 1;
constexpr int kExitNoPath = 2;
constexpr int kExitExhausted = 3;

struct PlanArgs {
  std::string scenario;
  std::string start;
  std::string goal;
  std::string planner{"ad"};
  double epsilon{1.0};
  std::optional<double> epsilon_plan;
  std::optional<double> epsilon_track;
  double timeout{300.0};
  std::uint64_t max_nodes{0};
  int max_iterations{200};
  std::string primitives;
  std::string trace;
  std::string svg;
};

struct GenArgs {
  std::string kind{"maze"};
  int size{300};
  std::uint64_t seed{1};
  int obstacles{10};
  double large_fraction{0.5};
  std::string out{"."};
};

struct BenchArgs {
  std::string suite;
  std::string out;
  int workers{0};
  std::string summary;
};

std::vector<long long> parse_ints(const std::string& text, std::size_t n, const char* what) {
  std::vector<long long> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    long long x = 0;
    try {
      x = std::stoll(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw std::invalid_argument(std::string("bad ") + what + ": " + text);
    v.push_back(x);
  }
  if (v.size() != n) throw std::invalid_argument(std::string("bad ") + what + ": " + text);
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path);
}

int run_plan(const PlanArgs& a) {
  ScenarioFile file;
  const Scenario scenario = load_scenario(a.scenario, &file);
  StateHD start;
  StateLD goal;
  if (!a.start.empty()) {
    const auto v = parse_ints(a.start, 3, "--start");
    start = {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), 0};
  } else if (file.has_query) {
    start = {file.start_x, file.start_y, file.start_heading, 0};
  } else {
    throw std::invalid_argument("--start is required (scenario has no query)");
  }
  if (!a.goal.empty()) {
    const auto v = parse_ints(a.goal, 2, "--goal");
    goal = {static_cast<int>(v[0]), static_cast<int>(v[1])};
  } else if (file.has_query) {
    goal = {file.goal_x, file.goal_y};
  } else {
    throw std::invalid_argument("--goal is required (scenario has no query)");
  }

  const MotionPrimitiveSet prims = a.primitives.empty()
                                       ? MotionPrimitiveSet::make_default(scenario.dt(), {})
                                       : MotionPrimitiveSet::from_json(read_file(a.primitives), scenario.dt(), {});
  const Lattice lattice(scenario, prims);

  PlanOutcome out;
  if (a.planner == "ad") {
    PlannerConfig cfg = PlannerConfig::with_epsilon(a.epsilon);
    if (a.epsilon_plan) cfg.epsilon_plan = *a.epsilon_plan;
    if (a.epsilon_track) cfg.epsilon_track = *a.epsilon_track;
    cfg.timeout = std::chrono::duration<double>(a.timeout);
    cfg.max_nodes = a.max_nodes;
    cfg.max_iterations = a.max_iterations;
    out = plan(lattice, start, goal, cfg);
  } else {
    out = plan_full(lattice, start, goal, {a.epsilon, std::chrono::duration<double>(a.timeout), a.max_nodes});
  }

  ResultRow row;
  row.planner = a.planner;
  row.epsilon = a.epsilon;
  row.env = std::filesystem::path(a.scenario).stem().string();
  row.status = to_string(out.status);
  if (out.status == PlanStatus::found && !validate_outcome(scenario, prims, start, goal, out)) row.status = "invalid";
  row.time_s = out.stats.elapsed_s;
  row.hd_expansions = out.stats.hd_expansions;
  row.ld_expansions = out.stats.ld_expansions;
  row.cost = out.status == PlanStatus::found ? out.cost : 0;
  row.iterations = out.iterations;
  std::cout << kCsvHeader << "\n" << format_csv_row(row) << "\n";

  if (!a.trace.empty()) write_file(a.trace, plan_trace_json(out));
  if (!a.svg.empty()) render_svg(scenario, &out, out.regions, a.svg);

  if (row.status == "invalid") {
    std::cerr << "error: returned path failed validation\n";
    return kExitError;
  }
  switch (out.status) {
    case PlanStatus::found: return kExitFound;
    case PlanStatus::no_path_within_horizon: return kExitNoPath;
    case PlanStatus::resource_exhausted: return kExitExhausted;
  }
  return kExitError;
}

int run_gen(const GenArgs& a) {
  GenSpec spec;
  spec.kind = parse_map_kind(a.kind);
  spec.size = a.size;
  spec.seed = a.seed;
  spec.n_obstacles = a.obstacles;
  spec.large_fraction = a.large_fraction;
  const GeneratedScenario g = generate_scenario(spec);
  std::cout << write_scenario(g, a.out, scenario_stem(spec)) << "\n";
  return 0;
}

int run_bench(const BenchArgs& a) {
  SuiteSpec suite = load_suite(a.suite);
  if (a.workers > 0) suite.workers = a.workers;
  const auto rows = run_suite(suite);
  write_file(a.out, format_csv(rows));
  const auto table = aggregate(rows);
  const std::string text = format_aggregate(table);
  std::cout << text;
  if (!a.summary.empty()) write_file(a.summary, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-dimensionality path planning among moving obstacles"};
  app.require_subcommand(1);

  PlanArgs pa;
  auto* plan_cmd = app.add_subcommand("plan", "Plan one query on a scenario file");
  plan_cmd->add_option("--scenario", pa.scenario, "Scenario JSON")->required();
  plan_cmd->add_option("--start", pa.start, "Start x,y,heading (default: from scenario)");
  plan_cmd->add_option("--goal", pa.goal, "Goal x,y (default: from scenario)");
  plan_cmd->add_option("--planner", pa.planner)->check(CLI::IsMember({"ad", "baseline"}));
  plan_cmd->add_option("--epsilon", pa.epsilon, "Overall suboptimality bound")->check(CLI::Range(1.0, 1e9));
  plan_cmd->add_option("--epsilon-plan", pa.epsilon_plan)->check(CLI::Range(1.0, 1e9));
  plan_cmd->add_option("--epsilon-track", pa.epsilon_track)->check(CLI::Range(1.0, 1e9));
  plan_cmd->add_option("--timeout", pa.timeout, "Seconds")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--max-nodes", pa.max_nodes, "Per-search node cap, 0 = none");
  plan_cmd->add_option("--max-iterations", pa.max_iterations)->check(CLI::PositiveNumber);
  plan_cmd->add_option("--primitives", pa.primitives, "Motion primitive JSON");
  plan_cmd->add_option("--trace", pa.trace, "Write the iteration trace as JSON");
  plan_cmd->add_option("--svg", pa.svg, "Write the scene as SVG");

  GenArgs ga;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a scenario");
  gen_cmd->add_option("--kind", ga.kind)->check(CLI::IsMember({"maze", "indoor"}));
  gen_cmd->add_option("--size", ga.size)->check(CLI::Range(50, kMaxMapSide));
  gen_cmd->add_option("--seed", ga.seed);
  gen_cmd->add_option("--obstacles", ga.obstacles)->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--large-fraction", ga.large_fraction)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--out", ga.out, "Output directory");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite");
  bench_cmd->add_option("--suite", ba.suite, "Suite JSON")->required();
  bench_cmd->add_option("--out", ba.out, "Result CSV")->required();
  bench_cmd->add_option("--workers", ba.workers, "Concurrent environments (overrides the suite)")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--summary", ba.summary, "Also write the aggregate table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (plan_cmd->parsed()) return run_plan(pa);
    if (gen_cmd->parsed()) return run_gen(ga);
    if (bench_cmd->parsed()) return run_bench(ba);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
