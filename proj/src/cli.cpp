#include "gtamp/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "gtamp/bench.hpp"
#include "gtamp/cmtg.hpp"
#include "gtamp/mcts.hpp"
#include "gtamp/plan_io.hpp"
#include "gtamp/scenario.hpp"

namespace gtamp {

namespace {

struct GlobalOptions {
  std::vector<std::string> scenarios;
  std::uint64_t seed = 0;
  double c = 1.0;
  double alpha = 1.0;
  int t_max = 8;
  int max_skeletons = 8;
  int max_iterations = 500;
  double time_limit = 60.0;
  std::string out;
  std::string trace;
  std::string dump_ilp;
};

SearchConfig search_config(const GlobalOptions& g) {
  SearchConfig cfg;
  cfg.c = g.c;
  cfg.alpha = g.alpha;
  cfg.max_iterations = g.max_iterations;
  cfg.wall_clock_limit = g.time_limit;
  cfg.skeletons.t_max = g.t_max;
  cfg.skeletons.max_skeletons = g.max_skeletons;
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot write file");
  f << text;
}

std::string describe_plan(const Plan& plan, const WorldState& world) {
  std::ostringstream os;
  os << "makespan " << plan.makespan() << ", motion cost " << plan.motion_cost() << "\n";
  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    os << "step " << j + 1 << ":";
    const auto& slots = plan.steps[j].slots;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (!slots[s] || slots[s]->action.pick_robot != world.scene().robots[s].name) continue;
      const PartialAction& a = slots[s]->action;
      os << "  " << a.object << " -> " << a.region << " by " << a.pick_robot;
      if (a.is_handover()) os << " via handover to " << a.place_robot;
    }
    os << "\n";
  }
  return os.str();
}

unsigned bench_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GTAMP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

int cmd_plan(const GlobalOptions& g, bool no_handovers, std::ostream& out, std::ostream& err) {
  if (g.scenarios.size() != 1) {
    err << "plan: exactly one --scenario is required\n";
    return kExitInputError;
  }
  WorldState world = load_scenario(g.scenarios.front());
  if (no_handovers) world = world.without_handovers();
  const SearchConfig cfg = search_config(g);
  const PredicateSet preds = compute_predicates(world);

  if (!g.dump_ilp.empty()) {
    std::set<std::string> targets;
    for (const GoalEntry& e : world.goal()) targets.insert(e.object);
    const Cmtg graph = build_cmtg(targets, preds, world, {});
    const int t0 = horizon_lower_bound(targets.size(), world.robot_count());
    // Dump the first feasible horizon, or the lower bound if none is.
    IlpModel dumped = build_model(graph, t0);
    for (int t = t0; t <= cfg.skeletons.t_max; ++t) {
      IlpModel m = build_model(graph, t);
      SolveLimits limits;
      limits.node_limit = cfg.skeletons.node_limit;
      bool feasible = false;
      try {
        feasible = solve(m, limits).has_value();
      } catch (const SolverLimitReached&) {
      }
      if (feasible) {
        dumped = std::move(m);
        break;
      }
    }
    write_file(g.dump_ilp, dumped.to_lp());
  }

  SearchResult result;
  try {
    result = run(world, preds, cfg, g.seed);
  } catch (const NoInitialSkeletons& e) {
    out << "no plan: " << e.what() << "\n";
    if (!g.trace.empty()) write_file(g.trace, "");
    return kExitNoPlan;
  }
  if (!g.trace.empty()) write_file(g.trace, trace_to_jsonl(result.trace));
  if (!result.best_plan) {
    out << "no plan after " << result.iterations_used << " iterations";
    if (result.timed_out) out << " (time limit reached)";
    if (result.tree_exhausted) out << " (all task skeletons tried)";
    out << "\n";
    return kExitNoPlan;
  }
  const std::string path = g.out.empty() ? "plan.json" : g.out;
  write_file(path, serialize_plan(*result.best_plan, world));
  out << "plan found after " << result.iterations_used << " iterations, written to " << path << "\n"
      << describe_plan(*result.best_plan, world);
  return kExitOk;
}

int cmd_validate(const GlobalOptions& g, const std::string& plan_path, std::ostream& out, std::ostream& err) {
  if (g.scenarios.size() != 1 || plan_path.empty()) {
    err << "validate: --scenario and --plan are required\n";
    return kExitInputError;
  }
  const WorldState world = load_scenario(g.scenarios.front());
  const Plan plan = load_plan(plan_path, world);
  const ValidationReport report = validate(plan, world);
  if (report.ok()) {
    out << "valid: makespan " << plan.makespan() << ", motion cost " << plan.motion_cost() << "\n";
    return kExitOk;
  }
  for (const Violation& v : report.violations) out << "step " << v.step << ": " << v.message << "\n";
  out << report.violations.size() << " violation(s)\n";
  return kExitViolations;
}

struct GenSpec {
  ScenarioFamily family = ScenarioFamily::kPack;
  GeneratorParams params;
};

// family:goals:obstacles:robots[:seed]
GenSpec parse_gen_spec(const std::string& spec, std::uint64_t default_seed) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 4 || parts.size() > 5) {
    throw std::invalid_argument("generator spec '" + spec + "' is not family:goals:obstacles:robots[:seed]");
  }
  const auto family = parse_family(parts[0]);
  if (!family) throw std::invalid_argument("unknown scenario family '" + parts[0] + "'");
  GenSpec g;
  g.family = *family;
  g.params.n_goal = std::stoi(parts[1]);
  g.params.n_obstacles = std::stoi(parts[2]);
  g.params.n_robots = std::stoi(parts[3]);
  g.params.seed = parts.size() == 5 ? std::stoull(parts[4]) : default_seed;
  return g;
}

int cmd_bench(const GlobalOptions& g, const std::vector<std::string>& gens, int trials, const std::string& plans_dir,
              std::ostream& out, std::ostream& err) {
  std::vector<BenchJob> jobs;
  for (const std::string& path : g.scenarios) {
    jobs.push_back({std::filesystem::path(path).stem().string(), load_scenario(path)});
  }
  for (const std::string& spec : gens) {
    const GenSpec gs = parse_gen_spec(spec, 1);
    jobs.push_back({spec, generate_scenario(gs.family, gs.params)});
  }
  if (jobs.empty()) {
    err << "bench: give at least one --scenario or --gen\n";
    return kExitInputError;
  }
  const std::string csv_path = g.out.empty() ? "bench.csv" : g.out;
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error(csv_path + ": cannot write file");
  csv << csv_header() << std::flush;
  if (!plans_dir.empty()) std::filesystem::create_directories(plans_dir);

  std::map<std::string, const WorldState*> worlds;
  for (const BenchJob& j : jobs) worlds[j.scenario_id] = &j.world;
  BenchOptions opts;
  opts.trials = trials;
  opts.base_seed = g.seed;
  opts.threads = bench_threads();
  // Rows are flushed as trials finish so an interrupted run keeps its results.
  run_bench(jobs, search_config(g), opts, [&](const RunArtifacts& a) {
    csv << csv_row(a.record) << std::flush;
    if (a.plan && !plans_dir.empty()) {
      std::string name = a.record.scenario;
      for (char& ch : name) {
        if (ch == ':' || ch == '/') ch = '_';
      }
      write_file(plans_dir + "/" + name + "_seed" + std::to_string(a.record.seed) + ".json",
                 serialize_plan(*a.plan, *worlds.at(a.record.scenario)));
    }
  });
  csv.close();

  std::ifstream in(csv_path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  out << format_summary(summarize(records_from_csv(buf.str())));
  out << "results written to " << csv_path << "\n";
  return kExitOk;
}

int cmd_gen(const GlobalOptions& g, const std::string& family, const GeneratorParams& base, std::ostream& out) {
  const auto fam = parse_family(family);
  if (!fam) throw std::invalid_argument("unknown scenario family '" + family + "'");
  GeneratorParams params = base;
  params.seed = g.seed;
  const std::string text = serialize_scenario(generate_scenario(*fam, params));
  if (g.out.empty()) {
    out << text;
  } else {
    write_file(g.out, text);
  }
  return kExitOk;
}

int cmd_predicates(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  if (g.scenarios.size() != 1) {
    err << "predicates: exactly one --scenario is required\n";
    return kExitInputError;
  }
  const std::string text = predicates_to_json(compute_predicates(load_scenario(g.scenarios.front())));
  if (g.out.empty()) {
    out << text;
  } else {
    write_file(g.out, text);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-robot rearrangement planner on a 2D tabletop"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--scenario", g.scenarios, "Scenario JSON file (bench accepts several)");
  app.add_option("--seed", g.seed, "Random seed (bench: first trial seed)");
  app.add_option("--c", g.c, "Exploration constant");
  app.add_option("--alpha", g.alpha, "Weight of the moved-object term in rewards");
  app.add_option("--t-max", g.t_max, "Largest skeleton horizon")->check(CLI::PositiveNumber);
  app.add_option("--max-skeletons", g.max_skeletons, "Skeletons generated per tree expansion")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-iterations", g.max_iterations, "Search iteration budget")->check(CLI::PositiveNumber);
  app.add_option("--time-limit", g.time_limit, "Wall-clock limit per planning run, seconds");
  app.add_option("--out", g.out, "Output file");
  app.add_option("--trace", g.trace, "Write the search trace (JSON lines)");
  app.add_option("--dump-ilp", g.dump_ilp, "Write the first feasible skeleton program in LP format");

  auto* plan = app.add_subcommand("plan", "Plan a scenario and write the plan file");
  bool no_handovers = false;
  plan->add_flag("--no-handovers", no_handovers, "Disable handover actions");

  auto* validate_cmd = app.add_subcommand("validate", "Check a plan file against a scenario");
  std::string plan_path;
  validate_cmd->add_option("--plan", plan_path, "Plan JSON file")->required();

  auto* bench = app.add_subcommand("bench", "Run seeded trials and summarize");
  std::vector<std::string> gens;
  int trials = 20;
  std::string plans_dir;
  bench->add_option("--gen", gens, "Generated scenario family:goals:obstacles:robots[:seed]");
  bench->add_option("--trials", trials, "Trials per scenario")->check(CLI::PositiveNumber);
  bench->add_option("--plans-dir", plans_dir, "Directory for the plans of successful trials");

  auto* gen = app.add_subcommand("gen", "Generate a scenario");
  std::string family = "pack";
  GeneratorParams params;
  gen->add_option("--family", family, "pack or boxmove");
  gen->add_option("--goals", params.n_goal, "Goal objects");
  gen->add_option("--obstacles", params.n_obstacles, "Movable obstacles");
  gen->add_option("--robots", params.n_robots, "Robots");

  auto* predicates = app.add_subcommand("predicates", "Print the predicate set of a scenario as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (plan->parsed()) return cmd_plan(g, no_handovers, out, err);
    if (validate_cmd->parsed()) return cmd_validate(g, plan_path, out, err);
    if (bench->parsed()) return cmd_bench(g, gens, trials, plans_dir, out, err);
    if (gen->parsed()) return cmd_gen(g, family, params, out);
    if (predicates->parsed()) return cmd_predicates(g, out, err);
  } catch (const ScenarioError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  } catch (const PlanError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace gtamp
