#include "adplan/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "adplan/baseline.hpp"

namespace adplan {

namespace {

const std::set<std::string> kSuiteKeys = {"n_environments", "kind", "size", "seed", "n_obstacles", "large_fraction",
                                          "epsilons", "planners", "timeout_s", "max_nodes", "workers"};

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

// Shortest decimal that parses back to the same epsilon.
std::string format_epsilon(double v) {
  for (int p = 1; p < 17; ++p) {
    const std::string s = format_double(v, p);
    if (std::stod(s) == v) return s;
  }
  return format_double(v, 17);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

ResultRow run_one(const Lattice& lattice, const Scenario& scenario, const HeuristicMap& h, const GeneratedScenario& g,
                  const std::string& planner, double eps, const SuiteSpec& suite) {
  PlanOutcome out;
  if (planner == "ad") {
    PlannerConfig cfg = PlannerConfig::with_epsilon(eps);
    cfg.timeout = suite.timeout;
    cfg.max_nodes = suite.max_nodes;
    out = plan(lattice, h, g.start, g.goal, cfg);
  } else {
    out = plan_full(lattice, h, g.start, g.goal, {eps, suite.timeout, suite.max_nodes});
  }
  ResultRow row;
  row.planner = planner;
  row.epsilon = eps;
  row.status = to_string(out.status);
  if (out.status == PlanStatus::found && !validate_outcome(scenario, lattice.primitives(), g.start, g.goal, out)) {
    row.status = "invalid";
  }
  row.time_s = out.stats.elapsed_s;
  row.hd_expansions = out.stats.hd_expansions;
  row.ld_expansions = out.stats.ld_expansions;
  row.cost = out.status == PlanStatus::found ? out.cost : 0;
  row.iterations = out.iterations;
  return row;
}

}  // namespace

SuiteSpec parse_suite(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw std::runtime_error("suite: expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kSuiteKeys.contains(k)) throw std::runtime_error("suite: unknown key '" + k + "'");
  }
  SuiteSpec s;
  s.n_environments = j.value("n_environments", s.n_environments);
  if (j.contains("kind")) s.gen.kind = parse_map_kind(j.at("kind").get<std::string>());
  s.gen.size = j.value("size", s.gen.size);
  s.gen.seed = j.value("seed", s.gen.seed);
  s.gen.n_obstacles = j.value("n_obstacles", s.gen.n_obstacles);
  s.gen.large_fraction = j.value("large_fraction", s.gen.large_fraction);
  if (j.contains("epsilons")) s.epsilons = j.at("epsilons").get<std::vector<double>>();
  if (j.contains("planners")) s.planners = j.at("planners").get<std::vector<std::string>>();
  s.timeout = std::chrono::duration<double>(j.value("timeout_s", s.timeout.count()));
  s.max_nodes = j.value("max_nodes", s.max_nodes);
  s.workers = j.value("workers", s.workers);

  if (s.n_environments < 0) throw std::runtime_error("suite: n_environments must be >= 0");
  if (s.epsilons.empty()) throw std::runtime_error("suite: no epsilons");
  for (double e : s.epsilons) {
    if (!(e >= 1.0)) throw std::runtime_error("suite: epsilon must be >= 1");
  }
  if (s.planners.empty()) throw std::runtime_error("suite: no planners");
  for (const auto& p : s.planners) {
    if (p != "ad" && p != "baseline") throw std::runtime_error("suite: unknown planner '" + p + "'");
  }
  if (!(s.timeout.count() > 0)) throw std::runtime_error("suite: timeout_s must be positive");
  if (s.workers < 1) throw std::runtime_error("suite: workers must be >= 1");
  return s;
}

SuiteSpec load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_suite(ss.str());
}

std::vector<ResultRow> run_suite(const SuiteSpec& suite) {
  const std::size_t n_env = static_cast<std::size_t>(suite.n_environments);
  const std::size_t per_env = suite.epsilons.size() * suite.planners.size();
  std::vector<ResultRow> rows(n_env * per_env);

  auto run_env = [&](std::size_t e) {
    GenSpec gs = suite.gen;
    gs.seed = suite.gen.seed + e;
    const std::string id = scenario_stem(gs);
    auto fill_error = [&](const std::string& status) {
      for (std::size_t k = 0; k < per_env; ++k) {
        ResultRow& r = rows[e * per_env + k];
        r.planner = suite.planners[k % suite.planners.size()];
        r.epsilon = suite.epsilons[k / suite.planners.size()];
        r.env = id;
        r.status = status;
      }
    };
    try {
      const GeneratedScenario g = generate_scenario(gs);
      const Scenario scenario(g.map, g.footprint, g.obstacles, g.horizon_steps, g.dt);
      const Lattice lattice(scenario, MotionPrimitiveSet::make_default(g.dt, {}));
      const HeuristicMap h = dijkstra_heuristic(lattice, g.goal);
      for (std::size_t ei = 0; ei < suite.epsilons.size(); ++ei) {
        for (std::size_t pi = 0; pi < suite.planners.size(); ++pi) {
          ResultRow& r = rows[e * per_env + ei * suite.planners.size() + pi];
          try {
            r = run_one(lattice, scenario, h, g, suite.planners[pi], suite.epsilons[ei], suite);
          } catch (const std::exception&) {
            r = ResultRow{suite.planners[pi], suite.epsilons[ei], id, "error"};
          }
          r.env = id;
        }
      }
    } catch (const std::exception&) {
      fill_error("error");
    }
  };

  const int workers = std::max(1, std::min<int>(suite.workers, static_cast<int>(std::max<std::size_t>(n_env, 1))));
  if (workers == 1) {
    for (std::size_t e = 0; e < n_env; ++e) run_env(e);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t e = next++; e < n_env; e = next++) run_env(e);
    });
  }
  for (auto& t : pool) t.join();
  return rows;
}

Stat mean_stddev(std::span<const double> values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double sq = 0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return s;
}

std::vector<AggregateRow> aggregate(std::span<const ResultRow> rows) {
  std::set<std::string> planners;
  std::map<double, std::map<std::string, std::map<std::string, const ResultRow*>>> by_eps;  // eps -> env -> planner
  for (const ResultRow& r : rows) {
    planners.insert(r.planner);
    by_eps[r.epsilon][r.env][r.planner] = &r;
  }

  std::vector<AggregateRow> table;
  for (const auto& [eps, envs] : by_eps) {
    std::set<std::string> shared_envs;
    for (const auto& [env, runs] : envs) {
      bool all = runs.size() == planners.size();
      for (const auto& [p, r] : runs) all = all && r->found();
      if (all) shared_envs.insert(env);
    }
    for (const std::string& p : planners) {
      AggregateRow a;
      a.planner = p;
      a.epsilon = eps;
      a.shared = static_cast<int>(shared_envs.size());
      std::vector<double> t, hd, ld, c;
      for (const auto& [env, runs] : envs) {
        const auto it = runs.find(p);
        if (it == runs.end()) continue;
        ++a.runs;
        if (it->second->found()) ++a.successes;
        if (!shared_envs.contains(env)) continue;
        t.push_back(it->second->time_s);
        hd.push_back(static_cast<double>(it->second->hd_expansions));
        ld.push_back(static_cast<double>(it->second->ld_expansions));
        c.push_back(static_cast<double>(it->second->cost));
      }
      a.time_s = mean_stddev(t);
      a.hd_expansions = mean_stddev(hd);
      a.ld_expansions = mean_stddev(ld);
      a.cost = mean_stddev(c);
      table.push_back(a);
    }
  }
  return table;
}

std::string format_aggregate(std::span<const AggregateRow> table) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-9s %-7s %9s %7s %10s %10s %12s %12s %12s %12s %12s %12s\n", "planner",
                "epsilon", "successes", "shared", "time_mean", "time_sd", "hd_mean", "hd_sd", "ld_mean", "ld_sd",
                "cost_mean", "cost_sd");
  out << line;
  for (const AggregateRow& a : table) {
    const std::string head = [&] {
      char b[128];
      std::snprintf(b, sizeof b, "%-9s %-7s %4d/%-4d %7d", a.planner.c_str(), format_epsilon(a.epsilon).c_str(),
                    a.successes, a.runs, a.shared);
      return std::string(b);
    }();
    if (a.shared == 0) {
      out << head << "  no shared successes\n";
      continue;
    }
    std::snprintf(line, sizeof line, "%s %10.3f %10.3f %12.1f %12.1f %12.1f %12.1f %12.1f %12.1f\n", head.c_str(),
                  a.time_s.mean, a.time_s.stddev, a.hd_expansions.mean, a.hd_expansions.stddev, a.ld_expansions.mean,
                  a.ld_expansions.stddev, a.cost.mean, a.cost.stddev);
    out << line;
  }
  return out.str();
}

std::string format_csv_row(const ResultRow& r) {
  std::ostringstream out;
  out << r.planner << ',' << format_epsilon(r.epsilon) << ',' << r.env << ',' << r.status << ','
      << format_double(r.time_s, 6) << ',' << r.hd_expansions << ',' << r.ld_expansions << ',' << r.cost << ','
      << r.iterations;
  return out.str();
}

std::string format_csv(std::span<const ResultRow> rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const ResultRow& r : rows) out += format_csv_row(r) + "\n";
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("csv: bad header");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw std::runtime_error("csv: line " + std::to_string(lineno) + ": expected 9 fields");
    try {
      ResultRow r;
      r.planner = f[0];
      r.epsilon = std::stod(f[1]);
      r.env = f[2];
      r.status = f[3];
      r.time_s = std::stod(f[4]);
      r.hd_expansions = std::stoull(f[5]);
      r.ld_expansions = std::stoull(f[6]);
      r.cost = std::stoll(f[7]);
      r.iterations = std::stoi(f[8]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("csv: line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

}  // namespace adplan
