#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "gtamp/mcts.hpp"
#include "gtamp/scenario.hpp"
#include "support.hpp"

using namespace gtamp;
using gtamp::testing::SceneBuilder;
using gtamp::testing::scenario_path;

namespace {

/// Every movable is pickable and placeable into its goal region (others into
/// "shelf") with no blockers, whatever the geometry says.
PredicateSet blind_predicates(const WorldState& w, const std::string& robot) {
  PredicateSet p;
  for (const std::string& m : w.movable_names()) {
    p.reachable_pick.insert({m, robot, 0});
    p.occludes_pick[{m, robot, 0}] = {};
    const std::string region = w.goal_region_of(m).value_or("shelf");
    p.reachable_place.insert({m, region, robot, 0});
    if (w.goal_named(m)) p.occludes_goal_place[{m, region, robot, 0}] = {};
  }
  return p;
}

SearchConfig quick_config() {
  SearchConfig c;
  c.max_iterations = 200;
  c.wall_clock_limit = 60.0;
  return c;
}

}  // namespace

TEST_CASE("ucb score") {
  SearchNode node;
  node.visits = 4;
  SearchEdge e;
  e.value = 1.0;
  e.visits = 1;
  CHECK(ucb(node, e, 0.0) == doctest::Approx(0.5));
  node.visits = 16;
  e.value = 2.0;
  e.prior = 0.5;
  CHECK(ucb(node, e, 1.0) == doctest::Approx(2.0));

  SearchEdge fresh;
  CHECK(ucb(node, fresh, 0.0) == 0.0);
  CHECK(ucb(node, fresh, 1.0) == doctest::Approx(4.0));

  // Scaling value and c together scales the score.
  SearchEdge scaled = std::move(e);
  const double base = ucb(node, scaled, 0.7);
  scaled.value *= 3.0;
  CHECK(ucb(node, scaled, 2.1) == doctest::Approx(3.0 * base));
}

TEST_CASE("rewards") {
  CHECK(reward_failure() == 0.0);
  CHECK(reward_success(1, 1.0) == doctest::Approx(2.0));
  CHECK(reward_success(4, 1.0) == doctest::Approx(1.25));
  CHECK(reward_success(2, 0.0) == doctest::Approx(1.0));
  CHECK(reward_partial(1, 1, 1, 1, 1.0) == doctest::Approx(1.0));
  CHECK(reward_partial(2, 3, 2, 1, 1.0) == doctest::Approx(0.75));
  // Fewer moved objects always earn more, all else equal.
  CHECK(reward_success(2, 1.0) > reward_success(3, 1.0));
  CHECK(reward_partial(1, 1, 1, 1, 1.0) > reward_partial(1, 2, 1, 1, 1.0));
  // A partial result never beats a complete plan moving the same objects.
  for (std::size_t moved = 1; moved <= 6; ++moved) {
    for (std::size_t prefix = 1; prefix <= 4; ++prefix) {
      CHECK(reward_partial(prefix, moved, 1, 0, 1.0) < reward_success(moved, 1.0));
    }
  }
}

TEST_CASE("initial tree holds one edge per skeleton") {
  const WorldState w = load_scenario(scenario_path("trivial.json"));
  const SearchTree tree = init_tree(w, compute_predicates(w), quick_config());
  REQUIRE(tree.root.out_edges.size() == 1);
  const SearchEdge& e = tree.root.out_edges[0];
  CHECK(e.prior == doctest::Approx(1.0));
  CHECK(e.visits == 0);
  CHECK(e.value == 0.0);
  CHECK_FALSE(e.child);
  CHECK(e.skeleton.length() == 1);

  const WorldState pack = load_scenario(scenario_path("pack_3_7.json"));
  const SearchTree big = init_tree(pack, compute_predicates(pack), quick_config());
  CHECK_FALSE(big.root.out_edges.empty());
  std::set<int> ids;
  for (const SearchEdge& edge : big.root.out_edges) {
    CHECK(edge.prior == doctest::Approx(1.0 / static_cast<double>(edge.skeleton.moved_count())));
    ids.insert(edge.id);
  }
  CHECK(ids.size() == big.root.out_edges.size());
}

TEST_CASE("a goal nothing can reach has no initial skeletons") {
  const WorldState w = load_scenario(scenario_path("blocked_goal.json"));
  CHECK_THROWS_AS(init_tree(w, compute_predicates(w), quick_config()), NoInitialSkeletons);
  CHECK_THROWS_AS(run(w, quick_config(), 1), NoInitialSkeletons);
}

TEST_CASE("first iteration on a trivial scene succeeds") {
  const WorldState w = load_scenario(scenario_path("trivial.json"));
  const PredicateSet p = compute_predicates(w);
  SearchTree tree = init_tree(w, p, quick_config());
  Rng rng(1);
  const IterationOutcome out = iterate(tree, w, p, quick_config(), rng);
  CHECK(out.kind == OutcomeKind::kSuccess);
  CHECK(out.reward == doctest::Approx(2.0));
  CHECK(out.path == std::vector<int>{0});
  REQUIRE(out.plan.has_value());
  CHECK(validate(*out.plan, w).ok());
  CHECK(tree.root.visits == 1);
  CHECK(tree.root.out_edges[0].visits == 1);
  CHECK(tree.root.out_edges[0].exhausted);
  CHECK_THROWS_AS(iterate(tree, w, p, quick_config(), rng), TreeExhausted);
}

TEST_CASE("grounding failure marks the edge dead") {
  const WorldState w = SceneBuilder()
                           .movable("g", Circle{0.1}, {1, 2})
                           .region("slot", {3, 3}, 0.05, 0.05)
                           .robot("r", {1, 0.2}, 4)
                           .grasp_all()
                           .goal("g", "slot")
                           .build();
  const PredicateSet p = blind_predicates(w, "r");
  SearchTree tree = init_tree(w, p, quick_config());
  REQUIRE(tree.root.out_edges.size() == 1);
  Rng rng(1);
  const IterationOutcome out = iterate(tree, w, p, quick_config(), rng);
  CHECK(out.kind == OutcomeKind::kFailure);
  CHECK(out.reward == 0.0);
  CHECK(tree.root.out_edges[0].dead);
  CHECK(tree.root.out_edges[0].exhausted);
  CHECK_THROWS_AS(iterate(tree, w, p, quick_config(), rng), TreeExhausted);

  const SearchResult r = run(w, p, quick_config(), 1);
  CHECK_FALSE(r.best_plan.has_value());
  CHECK(r.tree_exhausted);
  CHECK(r.iterations_used == 1);
}

TEST_CASE("an unforeseen obstacle yields a partial result and then a plan") {
  // The predicates miss that o sits in g's pick corridor.
  const WorldState w = SceneBuilder()
                           .movable("g", Circle{0.1}, {1, 2})
                           .movable("o", Circle{0.1}, {1, 1})
                           .region("tray", {3, 2}, 0.4, 0.4)
                           .region("shelf", {1.5, 1.0}, 0.6, 0.6)
                           .robot("r", {1, 0.2}, 3)
                           .grasp_all()
                           .goal("g", "tray")
                           .build();
  const PredicateSet p = blind_predicates(w, "r");
  SearchTree tree = init_tree(w, p, quick_config());
  Rng rng(5);
  const IterationOutcome first = iterate(tree, w, p, quick_config(), rng);
  CHECK(first.kind == OutcomeKind::kPartial);
  // Prefix of one step moving g; the new skeleton is one step moving o.
  CHECK(first.reward == doctest::Approx(1.0));
  const SearchEdge& root_edge = tree.root.out_edges[0];
  REQUIRE(root_edge.child);
  CHECK_FALSE(root_edge.child->out_edges.empty());
  CHECK_FALSE(root_edge.exhausted);

  const IterationOutcome second = iterate(tree, w, p, quick_config(), rng);
  CHECK(second.kind == OutcomeKind::kSuccess);
  CHECK(second.path.size() == 2);
  REQUIRE(second.plan.has_value());
  CHECK(second.plan->makespan() == 2);
  CHECK(second.plan->moved_objects == std::set<std::string>{"g", "o"});
  CHECK(validate(*second.plan, w).ok());
  CHECK(second.reward == doctest::Approx(1.5));
}

TEST_CASE("backpropagated statistics replay from the outcomes") {
  const WorldState w = load_scenario(scenario_path("pack_3_7.json"));
  const PredicateSet p = compute_predicates(w);
  SearchConfig config = quick_config();
  SearchTree tree = init_tree(w, p, config);
  Rng rng(9);
  std::map<int, double> value;
  std::map<int, int> visits;
  int iterations = 0;
  for (; iterations < 30; ++iterations) {
    IterationOutcome out;
    try {
      out = iterate(tree, w, p, config, rng);
    } catch (const TreeExhausted&) {
      break;
    }
    for (int id : out.path) {
      value[id] += out.reward;
      ++visits[id];
    }
  }
  CHECK(tree.root.visits == iterations);
  int root_edge_visits = 0;
  for (const SearchEdge& e : tree.root.out_edges) {
    CHECK(e.value == doctest::Approx(value[e.id]));
    CHECK(e.visits == visits[e.id]);
    root_edge_visits += e.visits;
    if (e.child) {
      CHECK(e.child->visits == e.visits);
      for (const SearchEdge& c : e.child->out_edges) {
        CHECK(c.value == doctest::Approx(value[c.id]));
        CHECK(c.visits == visits[c.id]);
      }
    }
  }
  CHECK(root_edge_visits == iterations);
}

TEST_CASE("search is deterministic per seed and its plans validate") {
  for (const char* f : {"pack_3_2.json", "pack_3_7.json", "boxmove_2_6.json", "handover.json"}) {
    CAPTURE(f);
    const WorldState w = load_scenario(scenario_path(f));
    const SearchResult a = run(w, quick_config(), 3);
    const SearchResult b = run(w, quick_config(), 3);
    REQUIRE(a.best_plan.has_value());
    CHECK(a.best_plan == b.best_plan);
    CHECK(a.trace == b.trace);
    CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));
    CHECK(validate(*a.best_plan, w).ok());
    CHECK(a.trace.back().kind == OutcomeKind::kSuccess);
    CHECK(a.iterations_used == static_cast<int>(a.trace.size()));
  }
}

TEST_CASE("anytime search never reports a worse plan") {
  const WorldState w = load_scenario(scenario_path("pack_3_7.json"));
  SearchConfig first = quick_config();
  first.max_iterations = 40;
  SearchConfig anytime = first;
  anytime.anytime = true;
  const SearchResult a = run(w, first, 2);
  const SearchResult b = run(w, anytime, 2);
  REQUIRE(a.best_plan.has_value());
  REQUIRE(b.best_plan.has_value());
  CHECK(b.best_plan->motion_cost() <= a.best_plan->motion_cost());
  CHECK(validate(*b.best_plan, w).ok());
}

TEST_CASE("trace lines carry iteration, path, outcome and reward") {
  const std::string text = trace_to_jsonl({{1, {0, 3}, OutcomeKind::kPartial, 0.75}, {2, {1}, OutcomeKind::kSuccess, 2.0}});
  CHECK(text.find("\"iteration\":1") != std::string::npos);
  CHECK(text.find("\"path\":[0,3]") != std::string::npos);
  CHECK(text.find("\"outcome\":\"" + to_string(OutcomeKind::kPartial) + "\"") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
