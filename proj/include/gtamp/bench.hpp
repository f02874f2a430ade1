#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gtamp/mcts.hpp"
#include "gtamp/world.hpp"

namespace gtamp {

enum class ScenarioFamily { kPack, kBoxMove };

struct GeneratorParams {
  int n_goal = 3;
  int n_obstacles = 2;
  int n_robots = 2;
  std::uint64_t seed = 1;
};

class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest obstacle count for which generated scenes are expected to be
/// solvable (checked by planning them in the tests).
inline constexpr int kPackObstacleBound = 13;
inline constexpr int kBoxMoveObstacleBound = 6;

/// Desk-scale analogs of the packaging and box-moving domains.
///
/// pack: 6 x 6 m table, a 3.6 x 2.4 m start area whose middle holds the goal
/// objects and obstacles, goal trays in three corners, 2-4 robots at the table edges
/// (west, east, south, north). Robots can meet for handovers at the midpoint
/// of their bases.
///
/// boxmove: 8 x 3 m corridor, start area on the left, goal area on the right,
/// two robots facing each other across the middle; handovers disabled.
///
/// Draws where the crowd does not fit or the goal objects admit no task
/// skeleton are discarded and redrawn from the same random stream;
/// GeneratorError after 50 rejected draws.
WorldState generate_scenario(ScenarioFamily family, const GeneratorParams& params);

std::optional<ScenarioFamily> parse_family(const std::string& name);

enum class RunOutcome { kSuccess, kFailure, kTimeout };

struct RunRecord {
  std::string scenario;
  std::uint64_t seed = 0;
  RunOutcome outcome = RunOutcome::kFailure;
  double planning_time = 0.0;  // seconds
  std::optional<std::size_t> makespan;
  std::optional<std::size_t> motion_cost;
  int iterations = 0;
};

struct RunArtifacts {
  RunRecord record;
  std::optional<Plan> plan;
};

/// One planning trial. Timeout means the wall clock ran out before a plan;
/// an exhausted tree or iteration budget counts as failure.
RunArtifacts run_trial(const std::string& scenario_id, const WorldState& world, const SearchConfig& config,
                       std::uint64_t seed);

struct Aggregate {
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct ScenarioSummary {
  std::string scenario;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;  // percent
  Aggregate time;             // successful trials only
  Aggregate makespan;         // successful trials only
  Aggregate motion_cost;      // successful trials only
};

struct BenchSummary {
  std::vector<ScenarioSummary> scenarios;  // sorted by id
};

/// Header: scenario,seed,outcome,time_s,makespan,motion_cost,iterations
std::string csv_header();
std::string csv_row(const RunRecord& record);
std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& csv);

BenchSummary summarize(const std::vector<RunRecord>& records);
/// Fixed-width table; N/A where no trial succeeded.
std::string format_summary(const BenchSummary& summary);

struct BenchJob {
  std::string scenario_id;
  WorldState world;
};

struct BenchOptions {
  int trials = 20;
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
};

/// Runs `trials` seeded trials per job (seeds base_seed .. base_seed+trials-1),
/// optionally in parallel. Records come back sorted by (scenario, seed).
/// `on_result` is called once per finished trial, never concurrently.
std::vector<RunArtifacts> run_bench(const std::vector<BenchJob>& jobs, const SearchConfig& config,
                                    const BenchOptions& options,
                                    const std::function<void(const RunArtifacts&)>& on_result = {});

}  // namespace gtamp
