#include "gtamp/mcts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace gtamp {

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kSuccess: return "success";
    case OutcomeKind::kPartial: return "partial";
    case OutcomeKind::kPartialNoSkeletons: return "partial_no_skeletons";
    case OutcomeKind::kFailure: return "failure";
    case OutcomeKind::kInvalidPlan: return "invalid_plan";
  }
  return "unknown";
}

double ucb(const SearchNode& node, const SearchEdge& edge, double c) {
  const double denom = edge.visits + 1.0;
  return edge.value / denom + c * edge.prior * std::sqrt(static_cast<double>(node.visits)) / denom;
}

double reward_failure() { return 0.0; }

double reward_success(std::size_t moved, double alpha) { return 1.0 + alpha / static_cast<double>(moved); }

double reward_partial(std::size_t prefix_length, std::size_t prefix_moved, std::size_t new_length,
                      std::size_t new_moved, double alpha) {
  const double len = static_cast<double>(prefix_length);
  return len / (len + static_cast<double>(new_length)) + alpha / static_cast<double>(prefix_moved + new_moved);
}

namespace {

void add_edges(SearchNode& node, std::vector<TaskSkeleton> skeletons, SearchTree& tree) {
  for (TaskSkeleton& sk : skeletons) {
    SearchEdge e;
    e.id = tree.next_edge_id++;
    e.prior = 1.0 / static_cast<double>(std::max<std::size_t>(1, sk.moved_count()));
    e.skeleton = std::move(sk);
    node.out_edges.push_back(std::move(e));
  }
}

std::optional<std::vector<TaskSkeleton>> skeletons_for(const std::set<std::string>& targets,
                                                        const std::set<std::string>& frozen, const WorldState& world,
                                                        const PredicateSet& preds, const SearchConfig& config) {
  try {
    const Cmtg graph = build_cmtg(targets, preds, world, frozen);
    std::vector<std::string> slots;
    for (const RobotSpec& r : world.scene().robots) slots.push_back(r.name);
    SkeletonGenConfig gen = config.skeletons;
    gen.exclusive = concurrency_conflicts(graph, world);
    return generate_skeletons(graph, gen, slots);
  } catch (const EmptySkeletonSet&) {
    return std::nullopt;
  } catch (const NoContainingRegion&) {
    return std::nullopt;
  }
}

bool edge_exhausted(const SearchEdge& e) {
  if (e.dead) return true;
  if (!e.child) return false;
  if (e.child->terminal) return true;
  return std::all_of(e.child->out_edges.begin(), e.child->out_edges.end(),
                     [](const SearchEdge& c) { return c.exhausted; });
}

}  // namespace

SearchTree init_tree(const WorldState& world, const PredicateSet& preds, const SearchConfig& config) {
  if (world.goal().empty()) throw std::invalid_argument("init_tree: empty goal");
  std::set<std::string> targets;
  for (const GoalEntry& g : world.goal()) targets.insert(g.object);
  auto skeletons = skeletons_for(targets, {}, world, preds, config);
  if (!skeletons) throw NoInitialSkeletons("no task skeleton moves the goal objects");
  SearchTree tree;
  add_edges(tree.root, std::move(*skeletons), tree);
  return tree;
}

IterationOutcome iterate(SearchTree& tree, const WorldState& world, const PredicateSet& preds,
                         const SearchConfig& config, Rng& rng) {
  // Selection.
  std::vector<SearchNode*> nodes{&tree.root};
  std::vector<SearchEdge*> edges;
  while (true) {
    SearchNode& node = *nodes.back();
    SearchEdge* best = nullptr;
    double best_score = 0.0;
    for (SearchEdge& e : node.out_edges) {
      if (e.exhausted) continue;
      const double score = ucb(node, e, config.c);
      if (best == nullptr || score > best_score) {
        best = &e;
        best_score = score;
      }
    }
    if (best == nullptr) throw TreeExhausted("every reachable task skeleton has been tried");
    edges.push_back(best);
    if (!best->child) break;
    nodes.push_back(best->child.get());
  }
  SearchEdge& selected = *edges.back();
  const SearchNode& parent = *nodes.back();

  // Expansion and evaluation.
  IterationOutcome outcome;
  for (const SearchEdge* e : edges) outcome.path.push_back(e->id);
  selected.child = std::make_unique<SearchNode>();
  SearchNode& child = *selected.child;
  const GroundingResult result = ground(selected.skeleton, parent.grounded_suffix, world, config.grounding, rng);

  if (const auto* success = std::get_if<GroundingSuccess>(&result)) {
    child.grounded_suffix = success->plan.steps;
    child.terminal = true;
    if (validate(success->plan, world).ok()) {
      outcome.kind = OutcomeKind::kSuccess;
      outcome.reward = reward_success(success->plan.motion_cost(), config.alpha);
      outcome.plan = success->plan;
    } else {
      outcome.kind = OutcomeKind::kInvalidPlan;
      outcome.reward = reward_failure();
      selected.dead = true;
    }
  } else if (const auto* partial = std::get_if<GroundingPartial>(&result)) {
    child.grounded_suffix = partial->prefix;
    const std::set<std::string> frozen = moved_objects(partial->prefix);
    auto skeletons = skeletons_for(partial->must_move, frozen, world, preds, config);
    if (!skeletons) {
      outcome.kind = OutcomeKind::kPartialNoSkeletons;
      outcome.reward = reward_failure();
      child.terminal = true;
    } else {
      const auto shortest = std::min_element(
          skeletons->begin(), skeletons->end(),
          [](const TaskSkeleton& a, const TaskSkeleton& b) { return a.length() < b.length(); });
      outcome.kind = OutcomeKind::kPartial;
      outcome.reward = reward_partial(partial->prefix.size(), frozen.size(), shortest->length(),
                                      shortest->moved_count(), config.alpha);
      add_edges(child, std::move(*skeletons), tree);
    }
  } else {
    outcome.kind = OutcomeKind::kFailure;
    outcome.reward = reward_failure();
    selected.dead = true;
    child.terminal = true;
  }

  // Backpropagation.
  for (SearchNode* n : nodes) ++n->visits;
  ++child.visits;
  for (SearchEdge* e : edges) {
    e->value += outcome.reward;
    ++e->visits;
  }
  for (auto it = edges.rbegin(); it != edges.rend(); ++it) (*it)->exhausted = edge_exhausted(**it);
  return outcome;
}

SearchResult run(const WorldState& world, const SearchConfig& config, std::uint64_t seed) {
  return run(world, compute_predicates(world), config, seed);
}

SearchResult run(const WorldState& world, const PredicateSet& preds, const SearchConfig& config, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  SearchResult result;
  SearchConfig cfg = config;
  if (cfg.wall_clock_limit > 0.0) {
    cfg.skeletons.deadline = std::min(
        cfg.skeletons.deadline,
        start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.wall_clock_limit)));
  }
  SearchTree tree = init_tree(world, preds, cfg);
  Rng rng(seed);
  while (result.iterations_used < config.max_iterations) {
    if (config.wall_clock_limit > 0.0 &&
        std::chrono::duration<double>(Clock::now() - start).count() > config.wall_clock_limit) {
      result.timed_out = true;
      break;
    }
    IterationOutcome outcome;
    try {
      outcome = iterate(tree, world, preds, cfg, rng);
    } catch (const TreeExhausted&) {
      result.tree_exhausted = true;
      break;
    }
    ++result.iterations_used;
    result.trace.push_back({result.iterations_used, outcome.path, outcome.kind, outcome.reward});
    if (outcome.plan) {
      const bool better = !result.best_plan || outcome.plan->motion_cost() < result.best_plan->motion_cost() ||
                          (outcome.plan->motion_cost() == result.best_plan->motion_cost() &&
                           outcome.plan->makespan() < result.best_plan->makespan());
      if (better) result.best_plan = std::move(outcome.plan);
      if (!cfg.anytime) break;
    }
  }
  return result;
}

std::string trace_to_jsonl(const std::vector<TraceEntry>& trace) {
  std::ostringstream os;
  for (const TraceEntry& e : trace) {
    nlohmann::ordered_json j{
        {"iteration", e.iteration}, {"path", e.path}, {"outcome", to_string(e.kind)}, {"reward", e.reward}};
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace gtamp
