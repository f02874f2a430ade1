#include <functional>

#include "doctest.h"
#include "gtamp/grounding.hpp"
#include "gtamp/plan_io.hpp"
#include "gtamp/scenario.hpp"
#include "support.hpp"

using namespace gtamp;
using gtamp::testing::SceneBuilder;
using gtamp::testing::scenario_path;

namespace {

PartialAction move(const std::string& object, const std::string& region, const std::string& robot,
                   const std::string& receiver = "") {
  return {object, region, robot, 0, receiver.empty() ? robot : receiver, 0};
}

/// Skeleton with one joint step per inner list, slots in scene robot order.
TaskSkeleton skeleton_of(const WorldState& w, const std::vector<std::vector<PartialAction>>& steps) {
  TaskSkeleton sk;
  for (const auto& actions : steps) {
    JointStep step{std::vector<std::optional<PartialAction>>(w.robot_count())};
    for (const PartialAction& a : actions) {
      step.slots[w.robot_slot(a.pick_robot)] = a;
      step.slots[w.robot_slot(a.place_robot)] = a;
      sk.moved_objects.insert(a.object);
    }
    sk.steps.push_back(std::move(step));
  }
  return sk;
}

GroundingResult ground_with_seed(const TaskSkeleton& sk, const WorldState& w, std::uint64_t seed) {
  Rng rng(seed);
  return ground(sk, {}, w, GroundingConfig{}, rng);
}

Plan success_plan(const GroundingResult& r) {
  REQUIRE(std::holds_alternative<GroundingSuccess>(r));
  return std::get<GroundingSuccess>(r).plan;
}

bool reports(const ValidationReport& report, const std::string& fragment) {
  for (const Violation& v : report.violations) {
    if (v.message.find(fragment) != std::string::npos) return true;
  }
  return false;
}

/// Every step's placements stay clear of what later steps sweep, and objects
/// moved later are not under earlier sweeps.
void check_reverse_consistency(const Plan& plan, const WorldState& w) {
  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    for (const GroundedAction& g : plan.steps[j].actions()) {
      const Body placed = w.placed_at(g.action.object, g.placement.position);
      for (std::size_t k = j + 1; k < plan.steps.size(); ++k) {
        for (const GroundedAction& later : plan.steps[k].actions()) {
          for (const Corridor& c : later.corridors()) CHECK_FALSE(intersects(placed, c));
          for (const Corridor& c : g.corridors()) CHECK_FALSE(intersects(c, w.placed(later.action.object)));
        }
      }
    }
  }
}

// Robot r1 sweeps from (1,1) to a at (4,4); r2 sweeps from (1,4) to b at (4,1).
WorldState crossing_world() {
  return SceneBuilder()
      .movable("a", Circle{0.1}, {4, 4})
      .movable("b", Circle{0.1}, {4, 1})
      .region("ra", {6, 6}, 0.5, 0.5)
      .region("rb", {6, 1}, 0.5, 0.5)
      .robot("r1", {1, 1}, 8)
      .robot("r2", {1, 4}, 8)
      .grasp_all()
      .goal("a", "ra")
      .goal("b", "rb")
      .build();
}

}  // namespace

TEST_CASE("one-step skeleton grounds into a valid plan") {
  const WorldState w = load_scenario(scenario_path("trivial.json"));
  const Plan plan = success_plan(ground_with_seed(skeleton_of(w, {{move("cup", "tray", "arm")}}), w, 1));
  REQUIRE(plan.makespan() == 1);
  CHECK(plan.motion_cost() == 1);
  const GroundedAction& g = *plan.steps[0].slots[0];
  CHECK(contained_in(w.placed_at("cup", g.placement.position), w.region("tray").area()));
  CHECK(validate(plan, w).ok());
}

TEST_CASE("grounding is deterministic for a seed") {
  const WorldState w = load_scenario(scenario_path("handover.json"));
  const TaskSkeleton sk = skeleton_of(w, {{move("part", "bin", "left", "right")}});
  const Plan first = success_plan(ground_with_seed(sk, w, 7));
  CHECK(first == success_plan(ground_with_seed(sk, w, 7)));
  CHECK(validate(first, w).ok());
  const GroundedAction& g = *first.steps[0].slots[0];
  CHECK(first.steps[0].slots[1] == first.steps[0].slots[0]);
  REQUIRE(g.handover_point.has_value());
  CHECK(*g.handover_point == w.handover_point("left", "right"));
}

TEST_CASE("earlier placements avoid later sweeps") {
  // b's pick corridor runs along y = 2 straight through the tray.
  const WorldState w = SceneBuilder()
                           .movable("a", Circle{0.1}, {2, 0.5})
                           .movable("b", Circle{0.1}, {4, 2})
                           .region("tray", {2, 2}, 0.8, 0.8)
                           .region("bin", {2, 4.2}, 0.4, 0.4)
                           .robot("r", {0.5, 2}, 4.5)
                           .grasp_all()
                           .goal("a", "tray")
                           .goal("b", "bin")
                           .build();
  const TaskSkeleton sk = skeleton_of(w, {{move("a", "tray", "r")}, {move("b", "bin", "r")}});
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    const Plan plan = success_plan(ground_with_seed(sk, w, seed));
    CHECK(validate(plan, w).ok());
    check_reverse_consistency(plan, w);
    const Vec2 a_at = plan.steps[0].slots[0]->placement.position;
    // Corridor half-width (body 0.1 + clearance 0.01) plus a's radius.
    CHECK(std::fabs(a_at.y - 2.0) > 0.11 + 0.1);
  }
}

TEST_CASE("untouched movable in the way gives a partial result") {
  const WorldState w = SceneBuilder()
                           .movable("g", Circle{0.1}, {1, 2})
                           .movable("o", Circle{0.1}, {1, 1})
                           .region("tray", {3, 2}, 0.4, 0.4)
                           .robot("r", {1, 0.2}, 3)
                           .grasp_all()
                           .goal("g", "tray")
                           .build();
  const GroundingResult r = ground_with_seed(skeleton_of(w, {{move("g", "tray", "r")}}), w, 3);
  REQUIRE(std::holds_alternative<GroundingPartial>(r));
  const auto& partial = std::get<GroundingPartial>(r);
  CHECK(partial.must_move == std::set<std::string>{"o"});
  REQUIRE(partial.prefix.size() == 1);
  CHECK(partial.prefix[0].slots[0]->action.object == "g");

  // Moving the obstacle first grounds the whole thing.
  const Plan plan = success_plan(ground_with_seed(skeleton_of(w, {{move("o", "tray", "r")}, {move("g", "tray", "r")}}), w, 3));
  CHECK(validate(plan, w).ok());
}

TEST_CASE("a region too small for the object fails at that step") {
  const WorldState w = SceneBuilder()
                           .movable("g", Circle{0.1}, {1, 2})
                           .movable("h", Circle{0.1}, {2, 2})
                           .region("slot", {3, 3}, 0.05, 0.05)
                           .region("tray", {3, 1}, 0.5, 0.5)
                           .robot("r", {1, 0.2}, 4)
                           .grasp_all()
                           .goal("g", "slot")
                           .goal("h", "tray")
                           .build();
  const GroundingResult r = ground_with_seed(skeleton_of(w, {{move("g", "slot", "r")}, {move("h", "tray", "r")}}), w, 1);
  REQUIRE(std::holds_alternative<GroundingFailure>(r));
  CHECK(std::get<GroundingFailure>(r).step == 1);
  Rng rng(1);
  CHECK_THROWS_AS(ground(TaskSkeleton{}, {}, w, GroundingConfig{}, rng), std::invalid_argument);
}

TEST_CASE("validation catches corrupted plans") {
  const WorldState single = load_scenario(scenario_path("trivial.json"));
  const WorldState pair = load_scenario(scenario_path("handover.json"));
  const Plan base = success_plan(ground_with_seed(skeleton_of(single, {{move("cup", "tray", "arm")}}), single, 1));
  const Plan handoff =
      success_plan(ground_with_seed(skeleton_of(pair, {{move("part", "bin", "left", "right")}}), pair, 1));
  REQUIRE(validate(base, single).ok());
  REQUIRE(validate(handoff, pair).ok());

  struct Corruption {
    const char* expect;
    bool handover;
    std::function<void(Plan&)> edit;
  };
  auto action0 = [](Plan& p) -> GroundedAction& { return *p.steps[0].slots[0]; };
  const std::vector<Corruption> cases{
      {"placement not in region", false, [&](Plan& p) { action0(p).placement.position = {1.0, 1.0}; }},
      {"place corridor", false, [&](Plan& p) { action0(p).placement.position.x -= 0.05; }},
      {"pick corridor", false, [&](Plan& p) { action0(p).pick_corridor.half_width += 0.1; }},
      {"moved_objects does not match", false, [](Plan& p) { p.moved_objects.clear(); }},
      {"goal not satisfied", false, [](Plan& p) { p.steps.clear(); p.moved_objects.clear(); }},
      {"moved twice", false, [](Plan& p) { p.steps.push_back(p.steps[0]); }},
      {"empty time step", false,
       [](Plan& p) { p.steps.insert(p.steps.begin(), GroundedJointAction{{std::nullopt}}); }},
      {"slots for", false, [](Plan& p) { p.steps[0].slots.push_back(std::nullopt); }},
      {"unknown grasp", false, [&](Plan& p) { action0(p).action.pick_grasp = 4; action0(p).action.place_grasp = 4; }},
      {"carries handover legs", false, [&](Plan& p) { action0(p).giver_leg = action0(p).pick_corridor; }},
      {"handover legs", true, [&](Plan& p) {
         action0(p).receiver_leg.reset();
         p.steps[0].slots[1] = action0(p);
       }},
      {"is not assigned", true, [](Plan& p) { p.steps[0].slots[1].reset(); }},
      {"references unknown names", false, [&](Plan& p) { action0(p).action.region = "nowhere"; }},
  };
  for (const Corruption& c : cases) {
    CAPTURE(c.expect);
    Plan p = c.handover ? handoff : base;
    c.edit(p);
    const ValidationReport report = validate(p, c.handover ? pair : single);
    CHECK_FALSE(report.ok());
    CHECK(reports(report, c.expect));
  }
}

TEST_CASE("crossing sweeps at the same step are a conflict") {
  const WorldState w = crossing_world();
  const PartialAction a = move("a", "ra", "r1");
  const PartialAction b = move("b", "rb", "r2");

  const Plan sequential = success_plan(ground_with_seed(skeleton_of(w, {{a}, {b}}), w, 2));
  CHECK(validate(sequential, w).ok());
  Plan merged = sequential;
  merged.steps[0].slots[1] = sequential.steps[1].slots[1];
  merged.steps.pop_back();
  CHECK(reports(validate(merged, w), "inter-robot sweep conflict"));

  Cmtg g;
  g.targets = {"a", "b"};
  g.object_nodes = {"a", "b"};
  g.action_nodes = {a, b};
  const auto conflicts = concurrency_conflicts(g, w);
  CHECK(conflicts.size() == 1);
  CHECK((conflicts.contains({a, b}) || conflicts.contains({b, a})));
  const GroundingResult together = ground_with_seed(skeleton_of(w, {{a, b}}), w, 2);
  CHECK(std::holds_alternative<GroundingFailure>(together));
}

TEST_CASE("reported conflicts are unavoidable and skip shared robots") {
  for (const char* f : {"pack_3_4.json", "pack_3_7.json", "boxmove_2_6.json", "handover.json"}) {
    CAPTURE(f);
    const WorldState w = load_scenario(scenario_path(f));
    std::set<std::string> targets;
    for (const GoalEntry& goal : w.goal()) targets.insert(goal.object);
    const Cmtg g = build_cmtg(targets, compute_predicates(w), w, {});
    for (const auto& [a, b] : concurrency_conflicts(g, w)) {
      CHECK(g.action_nodes.contains(a));
      CHECK(g.action_nodes.contains(b));
      CHECK(a.object != b.object);
      CHECK_FALSE(a.uses(b.pick_robot));
      CHECK_FALSE(a.uses(b.place_robot));
      // Even with other movables ignored, the pair cannot share a step.
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const GroundingResult r = ground_with_seed(skeleton_of(w, {{a, b}}), w, seed);
        CHECK(std::holds_alternative<GroundingFailure>(r));
      }
    }
  }
}

TEST_CASE("plans survive a file round trip") {
  const WorldState w = load_scenario(scenario_path("handover.json"));
  const Plan plan = success_plan(ground_with_seed(skeleton_of(w, {{move("part", "bin", "left", "right")}}), w, 4));
  const std::string text = serialize_plan(plan, w);
  const Plan again = parse_plan(text, w);
  CHECK(again == plan);
  CHECK(serialize_plan(again, w) == text);
  CHECK(validate(again, w).ok());

  CHECK_THROWS_AS(parse_plan("{", w), PlanError);
  std::string renamed = text;
  renamed.replace(renamed.find("\"left\""), 6, "\"lefty\"");
  CHECK_THROWS_AS(parse_plan(renamed, w), PlanError);
  CHECK_THROWS_AS(load_plan(scenario_path("missing_plan.json"), w), PlanError);
}
