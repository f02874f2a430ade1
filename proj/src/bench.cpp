#include "gtamp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "gtamp/cmtg.hpp"

namespace gtamp {

namespace {

struct Layout {
  Rect workspace;
  RegionSpec start;
  std::vector<RegionSpec> goals;
  std::vector<RobotSpec> robots;
  Rect goal_object_area;
  Rect obstacle_area;
  bool handovers = true;
};

Layout pack_layout(int n_robots) {
  Layout l;
  l.workspace = {{0.0, 0.0}, {6.0, 6.0}};
  // The crowd occupies the middle of the start area; the margins leave room
  // for relocating obstacles. The west/east handover point (3, 3.4) stays
  // clear of the start area.
  l.start = {"start", {3.0, 1.8}, 1.8, 1.2};
  l.goals = {{"tray_nw", {0.8, 5.2}, 0.55, 0.55}, {"tray_ne", {5.2, 5.2}, 0.55, 0.55},
             {"tray_se", {5.35, 0.75}, 0.5, 0.5}};
  const std::vector<RobotSpec> all = {{"west", {0.25, 3.4}, 3.5, 0.12},
                                      {"east", {5.75, 3.4}, 3.5, 0.12},
                                      {"south", {3.0, 0.25}, 3.5, 0.12},
                                      {"north", {3.0, 5.75}, 3.5, 0.12}};
  l.robots.assign(all.begin(), all.begin() + n_robots);
  l.goal_object_area = {{2.0, 1.1}, {4.0, 2.9}};
  l.obstacle_area = l.goal_object_area;
  return l;
}

Layout boxmove_layout() {
  Layout l;
  l.workspace = {{0.0, 0.0}, {8.0, 3.0}};
  // As in pack, the crowd fills only the middle of the start area so that
  // relocated obstacles have somewhere to go.
  l.start = {"start", {2.2, 1.5}, 1.55, 1.3};
  l.goals = {{"dock", {5.9, 1.5}, 1.3, 1.0}};
  l.robots = {{"upper", {4.0, 2.85}, 3.6, 0.12}, {"lower", {4.0, 0.15}, 3.6, 0.12}};
  // Goal boxes sit at the back of the crowd, obstacles in front of them.
  l.goal_object_area = {{1.3, 0.8}, {2.1, 2.2}};
  l.obstacle_area = {{2.2, 0.6}, {3.5, 2.4}};
  l.handovers = false;
  return l;
}

bool reaches(const RobotSpec& r, Vec2 p, double margin) { return distance(p, r.base) <= r.reach_radius - margin; }

constexpr double kGap = 0.03;
constexpr int kSampleAttempts = 5000;

}  // namespace

std::optional<ScenarioFamily> parse_family(const std::string& name) {
  if (name == "pack") return ScenarioFamily::kPack;
  if (name == "boxmove") return ScenarioFamily::kBoxMove;
  return std::nullopt;
}

namespace {

WorldState draw_scenario(ScenarioFamily family, const GeneratorParams& p, Rng& rng) {
  const bool pack = family == ScenarioFamily::kPack;

  const Layout l = pack ? pack_layout(p.n_robots) : boxmove_layout();
  Scene scene;
  scene.workspace = l.workspace;
  scene.regions.push_back(l.start);
  for (const RegionSpec& g : l.goals) scene.regions.push_back(g);
  scene.robots = l.robots;
  scene.handovers = l.handovers;

  std::map<std::string, Pose> poses;
  std::vector<Body> taken;
  std::vector<GoalEntry> goal;
  auto add = [&](const std::string& name, const Rect& area, bool is_goal) {
    Shape shape;
    if (pack) {
      if (rng.uniform() < 0.5) {
        shape = Circle{rng.uniform(0.09, 0.13)};
      } else {
        shape = AxisRect{rng.uniform(0.07, 0.12), rng.uniform(0.07, 0.12)};
      }
    } else {
      const double h = rng.uniform(0.14, 0.18);
      shape = AxisRect{h, h};
    }
    // Keep a small gap between objects so the initial scene is collision-free
    // with margin.
    std::vector<Body> forbidden;
    for (const Body& b : taken) {
      const auto& ps = std::get<PlacedShape>(b);
      forbidden.push_back(Corridor{ps.center, ps.center, circumradius(ps.shape) + kGap});
    }
    const auto pose = sample_placement(shape, area, forbidden, rng, kSampleAttempts);
    if (!pose) throw GeneratorError("could not place '" + name + "'; too many objects for the start area");
    poses[name] = *pose;
    taken.push_back(PlacedShape{shape, pose->position});
    scene.objects.push_back({name, shape, ObjectKind::kMovable});
    if (!is_goal) return;

    // Prefer a tray that a robot able to pick this object can also reach, so
    // handovers are an option rather than a necessity; spread across trays.
    std::vector<std::size_t> direct;
    for (std::size_t gi = 0; gi < l.goals.size(); ++gi) {
      for (const RobotSpec& r : l.robots) {
        if (reaches(r, pose->position, 0.05) && reaches(r, l.goals[gi].center, 0.3)) {
          direct.push_back(gi);
          break;
        }
      }
    }
    const std::size_t k = goal.size();
    const std::size_t gi = direct.empty() ? k % l.goals.size() : direct[k % direct.size()];
    goal.push_back({name, l.goals[gi].name});
  };

  for (int i = 0; i < p.n_goal; ++i) add("goal_" + std::to_string(i), l.goal_object_area, true);
  for (int i = 0; i < p.n_obstacles; ++i) add("obstacle_" + std::to_string(i), l.obstacle_area, false);

  for (const ObjectSpec& o : scene.objects) {
    for (const RobotSpec& r : l.robots) {
      const Vec2 d = l.start.center - r.base;
      double angle = std::atan2(d.y, d.x);
      if (angle >= std::numbers::pi) angle -= 2.0 * std::numbers::pi;
      scene.grasps.push_back({o.name, r.name, angle, std::numbers::pi / 2.0});
    }
  }
  return WorldState(std::move(scene), std::move(poses), std::move(goal));
}

// Goal objects that block each other for every robot admit no plan that
// moves each object once; such draws are rejected.
bool admits_skeleton(const WorldState& world) {
  std::set<std::string> targets;
  for (const GoalEntry& g : world.goal()) targets.insert(g.object);
  std::vector<std::string> slots;
  for (const RobotSpec& r : world.scene().robots) slots.push_back(r.name);
  SkeletonGenConfig cfg;
  cfg.max_skeletons = 1;
  try {
    generate_skeletons(build_cmtg(targets, compute_predicates(world, false), world, {}), cfg, slots);
    return true;
  } catch (const EmptySkeletonSet&) {
    return false;
  } catch (const NoContainingRegion&) {
    return false;
  }
}

constexpr int kSceneAttempts = 50;

}  // namespace

WorldState generate_scenario(ScenarioFamily family, const GeneratorParams& p) {
  if (p.n_goal < 1 || p.n_obstacles < 0) throw GeneratorError("need at least one goal object");
  const bool pack = family == ScenarioFamily::kPack;
  if (pack && (p.n_robots < 2 || p.n_robots > 4)) throw GeneratorError("pack supports 2 to 4 robots");
  if (!pack && p.n_robots != 2) throw GeneratorError("boxmove supports exactly 2 robots");
  Rng rng(p.seed);
  std::string last_problem;
  for (int attempt = 0; attempt < kSceneAttempts; ++attempt) {
    try {
      WorldState world = draw_scenario(family, p, rng);
      if (admits_skeleton(world)) return world;
      last_problem = "no feasible task skeleton";
    } catch (const GeneratorError& e) {
      last_problem = e.what();
    }
  }
  throw GeneratorError(last_problem + " (" + std::to_string(kSceneAttempts) + " draws)");
}

RunArtifacts run_trial(const std::string& scenario_id, const WorldState& world, const SearchConfig& config,
                       std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  RunArtifacts out;
  out.record.scenario = scenario_id;
  out.record.seed = seed;
  const auto t0 = Clock::now();
  SearchResult result;
  try {
    result = run(world, config, seed);
  } catch (const NoInitialSkeletons&) {
  }
  out.record.planning_time = std::chrono::duration<double>(Clock::now() - t0).count();
  out.record.iterations = result.iterations_used;
  if (result.best_plan) {
    out.record.outcome = RunOutcome::kSuccess;
    out.record.makespan = result.best_plan->makespan();
    out.record.motion_cost = result.best_plan->motion_cost();
    out.plan = std::move(result.best_plan);
  } else {
    const bool out_of_time = config.wall_clock_limit > 0.0 && out.record.planning_time >= config.wall_clock_limit;
    out.record.outcome = result.timed_out || out_of_time ? RunOutcome::kTimeout : RunOutcome::kFailure;
  }
  return out;
}

namespace {

const char* outcome_name(RunOutcome o) {
  switch (o) {
    case RunOutcome::kSuccess: return "success";
    case RunOutcome::kFailure: return "failure";
    case RunOutcome::kTimeout: return "timeout";
  }
  return "failure";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  a.n = xs.size();
  if (xs.empty()) return a;
  double sum = 0.0;
  for (double x : xs) sum += x;
  a.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  }
  return a;
}

std::string fmt_aggregate(const Aggregate& a, int precision) {
  if (a.n == 0) return "N/A";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", precision, a.mean, precision, a.stderr_);
  return buf;
}

}  // namespace

std::string csv_header() { return "scenario,seed,outcome,time_s,makespan,motion_cost,iterations\n"; }

std::string csv_row(const RunRecord& r) {
  std::ostringstream os;
  char t[32];
  std::snprintf(t, sizeof t, "%.6f", r.planning_time);
  os << r.scenario << ',' << r.seed << ',' << outcome_name(r.outcome) << ',' << t << ',';
  if (r.makespan) os << *r.makespan;
  os << ',';
  if (r.motion_cost) os << *r.motion_cost;
  os << ',' << r.iterations << '\n';
  return os.str();
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = csv_header();
  for (const RunRecord& r : records) out += csv_row(r);
  return out;
}

std::vector<RunRecord> records_from_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  std::vector<RunRecord> out;
  if (!std::getline(is, line)) return out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw std::runtime_error("malformed results row: " + line);
    RunRecord r;
    r.scenario = f[0];
    r.seed = std::stoull(f[1]);
    if (f[2] == "success") {
      r.outcome = RunOutcome::kSuccess;
    } else if (f[2] == "timeout") {
      r.outcome = RunOutcome::kTimeout;
    } else if (f[2] == "failure") {
      r.outcome = RunOutcome::kFailure;
    } else {
      throw std::runtime_error("unknown outcome '" + f[2] + "'");
    }
    r.planning_time = std::stod(f[3]);
    if (!f[4].empty()) r.makespan = std::stoull(f[4]);
    if (!f[5].empty()) r.motion_cost = std::stoull(f[5]);
    r.iterations = std::stoi(f[6]);
    out.push_back(std::move(r));
  }
  return out;
}

BenchSummary summarize(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<const RunRecord*>> by_scenario;
  for (const RunRecord& r : records) by_scenario[r.scenario].push_back(&r);
  BenchSummary summary;
  for (const auto& [id, rs] : by_scenario) {
    ScenarioSummary s;
    s.scenario = id;
    s.trials = rs.size();
    std::vector<double> time, makespan, cost;
    for (const RunRecord* r : rs) {
      if (r->outcome != RunOutcome::kSuccess) continue;
      ++s.successes;
      time.push_back(r->planning_time);
      if (r->makespan) makespan.push_back(static_cast<double>(*r->makespan));
      if (r->motion_cost) cost.push_back(static_cast<double>(*r->motion_cost));
    }
    s.success_rate = 100.0 * static_cast<double>(s.successes) / static_cast<double>(s.trials);
    s.time = aggregate(time);
    s.makespan = aggregate(makespan);
    s.motion_cost = aggregate(cost);
    summary.scenarios.push_back(std::move(s));
  }
  return summary;
}

std::string format_summary(const BenchSummary& summary) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %7s %9s %20s %16s %16s\n", "scenario", "trials", "success%", "time_s",
                "makespan", "motion_cost");
  os << line;
  for (const ScenarioSummary& s : summary.scenarios) {
    // Column widths count bytes; the +/- sign is two bytes in UTF-8.
    std::snprintf(line, sizeof line, "%-24s %7zu %9.1f %21s %17s %17s\n", s.scenario.c_str(), s.trials,
                  s.success_rate, fmt_aggregate(s.time, 3).c_str(), fmt_aggregate(s.makespan, 2).c_str(),
                  fmt_aggregate(s.motion_cost, 2).c_str());
    os << line;
  }
  return os.str();
}

std::vector<RunArtifacts> run_bench(const std::vector<BenchJob>& jobs, const SearchConfig& config,
                                    const BenchOptions& options,
                                    const std::function<void(const RunArtifacts&)>& on_result) {
  struct Task {
    std::size_t job;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    for (int t = 0; t < options.trials; ++t) tasks.push_back({j, options.base_seed + static_cast<std::uint64_t>(t)});
  }
  std::vector<RunArtifacts> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& task = tasks[i];
      results[i] = run_trial(jobs[task.job].scenario_id, jobs[task.job].world, config, task.seed);
      if (on_result) {
        std::lock_guard lock(report);
        on_result(results[i]);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(tasks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::stable_sort(results.begin(), results.end(), [](const RunArtifacts& a, const RunArtifacts& b) {
    return std::tie(a.record.scenario, a.record.seed) < std::tie(b.record.scenario, b.record.seed);
  });
  return results;
}

}  // namespace gtamp
