#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtamp/grounding.hpp"
#include "gtamp/predicates.hpp"
#include "gtamp/skeleton_ilp.hpp"

namespace gtamp {

struct SearchNode;

/// Holds an ungrounded task skeleton; its child (once expanded) holds what
/// grounding produced.
struct SearchEdge {
  int id = 0;
  TaskSkeleton skeleton;
  double value = 0.0;
  int visits = 0;
  double prior = 1.0;  // 1 / objects the skeleton moves
  bool dead = false;   // grounding failed
  bool exhausted = false;
  std::unique_ptr<SearchNode> child;
};

struct SearchNode {
  GroundedSequence grounded_suffix;
  int visits = 0;
  std::vector<SearchEdge> out_edges;
  bool terminal = false;
};

struct SearchConfig {
  double c = 1.0;
  double alpha = 1.0;
  int max_iterations = 500;
  double wall_clock_limit = 60.0;  // seconds; <= 0 disables
  bool anytime = false;            // keep searching for fewer moved objects after a plan
  SkeletonGenConfig skeletons;
  GroundingConfig grounding;
};

struct SearchTree {
  SearchNode root;
  int next_edge_id = 0;
};

enum class OutcomeKind { kSuccess, kPartial, kPartialNoSkeletons, kFailure, kInvalidPlan };

std::string to_string(OutcomeKind kind);

struct IterationOutcome {
  OutcomeKind kind = OutcomeKind::kFailure;
  double reward = 0.0;
  std::vector<int> path;  // edge ids from the root
  std::optional<Plan> plan;
};

struct TraceEntry {
  int iteration = 0;
  std::vector<int> path;
  OutcomeKind kind = OutcomeKind::kFailure;
  double reward = 0.0;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct SearchResult {
  std::optional<Plan> best_plan;
  int iterations_used = 0;
  std::vector<TraceEntry> trace;
  bool tree_exhausted = false;
  bool timed_out = false;
};

class NoInitialSkeletons : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TreeExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// value/(visits+1) + c * prior * sqrt(node visits)/(visits+1)
double ucb(const SearchNode& node, const SearchEdge& edge, double c);

double reward_failure();
/// `moved` = objects moved by the complete plan.
double reward_success(std::size_t moved, double alpha);
/// Lengths in time steps, counts in moved objects; `new_*` describe the
/// shortest freshly generated skeleton.
double reward_partial(std::size_t prefix_length, std::size_t prefix_moved, std::size_t new_length,
                      std::size_t new_moved, double alpha);

SearchTree init_tree(const WorldState& world, const PredicateSet& preds, const SearchConfig& config);

/// One selection / expansion / evaluation / backpropagation round.
/// Throws TreeExhausted when no live edge is reachable from the root.
IterationOutcome iterate(SearchTree& tree, const WorldState& world, const PredicateSet& preds,
                         const SearchConfig& config, Rng& rng);

SearchResult run(const WorldState& world, const SearchConfig& config, std::uint64_t seed);
SearchResult run(const WorldState& world, const PredicateSet& preds, const SearchConfig& config, std::uint64_t seed);

/// One JSON object per line.
std::string trace_to_jsonl(const std::vector<TraceEntry>& trace);

}  // namespace gtamp
