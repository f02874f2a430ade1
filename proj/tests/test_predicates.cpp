#include <algorithm>
#include <numbers>

#include "doctest.h"
#include "gtamp/bench.hpp"
#include "gtamp/predicates.hpp"
#include "gtamp/scenario.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace gtamp;
using gtamp::testing::SceneBuilder;
using gtamp::testing::scenario_path;

namespace {

std::vector<WorldState> sample_worlds() {
  std::vector<WorldState> out;
  for (const char* f : {"trivial.json", "handover.json", "pack_3_4.json", "pack_3_7.json", "boxmove_2_6.json"}) {
    out.push_back(load_scenario(scenario_path(f)));
  }
  out.push_back(generate_scenario(ScenarioFamily::kPack, {5, 13, 4, 3}));
  return out;
}

std::size_t movable_hits(const WorldState& world, const Corridor& c, const std::string& except) {
  std::size_t n = 0;
  for (const std::string& m : world.movable_names()) n += m != except && intersects(c, world.placed(m));
  return n;
}

}  // namespace

TEST_CASE("pick on an empty table is reachable and unblocked") {
  const WorldState w = SceneBuilder().movable("cup", Circle{0.1}, {2, 1}).robot("arm", {1, 1}, 1.5).grasp_all().build();
  const PickEvaluation e = eval_reachable_pick(w, {"cup", "arm", 0});
  CHECK(e.reachable);
  CHECK(e.blockers.empty());
  REQUIRE(e.corridor.has_value());
  CHECK(*e.corridor == pick_corridor({1, 1}, 0.1, {2, 1}, 0.01));
}

TEST_CASE("pick beyond reach is unreachable") {
  const WorldState w = SceneBuilder().movable("cup", Circle{0.1}, {2.6, 1}).robot("arm", {1, 1}, 1.5).grasp_all().build();
  CHECK_FALSE(eval_reachable_pick(w, {"cup", "arm", 0}).reachable);
}

TEST_CASE("pick outside the grasp cone is unreachable") {
  const WorldState w = SceneBuilder()
                           .movable("cup", Circle{0.1}, {2, 1})
                           .robot("arm", {1, 1}, 1.5)
                           .grasp("cup", "arm", std::numbers::pi / 2, 0.5)
                           .build();
  CHECK_FALSE(eval_reachable_pick(w, {"cup", "arm", 0}).reachable);
}

TEST_CASE("movable on the reach segment blocks the pick") {
  const WorldState w = SceneBuilder()
                           .movable("cup", Circle{0.1}, {3, 1})
                           .movable("jar", Circle{0.15}, {2, 1})
                           .robot("arm", {1, 1}, 2.5)
                           .grasp_all()
                           .build();
  const PickEvaluation e = eval_reachable_pick(w, {"cup", "arm", 0});
  CHECK(e.reachable);
  CHECK(e.blockers == std::set<std::string>{"jar"});
}

TEST_CASE("fixed object on the reach segment makes the pick unreachable") {
  const WorldState w = SceneBuilder()
                           .movable("cup", Circle{0.1}, {3, 1})
                           .fixed("post", Circle{0.15}, {2, 1})
                           .robot("arm", {1, 1}, 2.5)
                           .grasp_all()
                           .build();
  CHECK_FALSE(eval_reachable_pick(w, {"cup", "arm", 0}).reachable);
}

TEST_CASE("place into a free adjacent region is unblocked") {
  const WorldState w = SceneBuilder()
                           .movable("cup", Circle{0.1}, {1, 3})
                           .region("tray", {2, 1}, 0.5, 0.5)
                           .robot("arm", {1, 1}, 2.5)
                           .grasp_all()
                           .goal("cup", "tray")
                           .build();
  const PlaceEvaluation e = eval_reachable_place(w, {"cup", "tray", "arm", 0});
  CHECK(e.reachable);
  CHECK(e.blockers.empty());
  REQUIRE(e.probe_pose.has_value());
  CHECK(contained_in(w.placed_at("cup", e.probe_pose->position), w.region("tray").area()));
}

TEST_CASE("region beyond reach is unreachable for placing") {
  const WorldState w = SceneBuilder()
                           .movable("cup", Circle{0.1}, {1, 3})
                           .region("tray", {8, 1}, 0.5, 0.5)
                           .robot("arm", {1, 1}, 2.5)
                           .grasp_all()
                           .build();
  CHECK_FALSE(eval_reachable_place(w, {"cup", "tray", "arm", 0}).reachable);
}

TEST_CASE("movable covering the only reachable strip blocks the placement") {
  const WorldState w = SceneBuilder()
                           .movable("cup", Circle{0.1}, {0.5, 3})
                           .movable("crate", Circle{0.3}, {1.3, 0.5})
                           .region("shelf", {3, 0.5}, 2.0, 0.5)
                           .robot("arm", {0, 0.5}, 1.6)
                           .grasp_all()
                           .goal("cup", "shelf")
                           .build();
  const PlaceEvaluation e = eval_reachable_place(w, {"cup", "shelf", "arm", 0});
  CHECK(e.reachable);
  CHECK(e.blockers == std::set<std::string>{"crate"});
  const PredicateSet preds = compute_predicates(w);
  CHECK(preds.place_blockers({"cup", "shelf", "arm", 0}) == std::set<std::string>{"crate"});
}

TEST_CASE("handover needs both robots to reach the midpoint") {
  auto world = [](double reach) {
    return SceneBuilder()
        .movable("part", Circle{0.1}, {1, 2})
        .region("bin", {3, 2}, 0.3, 0.3)
        .robot("a", {1, 1}, reach)
        .robot("b", {3, 1}, reach)
        .grasp_all()
        .goal("part", "bin")
        .build();
  };
  CHECK(eval_goal_handover(world(1.5), {"part", "a", 0, "b", 0}));
  CHECK_FALSE(eval_goal_handover(world(0.9), {"part", "a", 0, "b", 0}));
  CHECK(world(1.5).handover_point("a", "b") == Vec2{2, 1});
}

TEST_CASE("fixed wall at the meeting point disables the handover") {
  const WorldState w = SceneBuilder()
                           .movable("part", Circle{0.1}, {1, 2})
                           .fixed("wall", AxisRect{0.1, 0.5}, {2, 1})
                           .region("bin", {3, 2}, 0.3, 0.3)
                           .robot("a", {1, 1}, 1.5)
                           .robot("b", {3, 1}, 1.5)
                           .grasp_all()
                           .goal("part", "bin")
                           .build();
  CHECK_FALSE(eval_goal_handover(w, {"part", "a", 0, "b", 0}));
}

TEST_CASE("robots whose standoff positions overlap cannot hand over") {
  // Both bases lie below the workspace, so the meeting point is clamped onto
  // the lower edge and both robots approach it from the same side.
  auto world = [](Vec2 second_base) {
    return SceneBuilder({{0, 0}, {4, 2}})
        .movable("part", Circle{0.1}, {1, 1.5})
        .region("bin", {3, 1.5}, 0.3, 0.3)
        .robot("a", {1, -1}, 1.7, 0.3)
        .robot("b", second_base, 1.7, 0.3)
        .grasp_all()
        .goal("part", "bin")
        .build();
  };
  const WorldState clamped = world({3, -1.2});
  CHECK(clamped.handover_point("a", "b") == Vec2{2, 0});
  CHECK_FALSE(eval_goal_handover(clamped, {"part", "a", 0, "b", 0}));
  CHECK(eval_goal_handover(world({3, 1}), {"part", "a", 0, "b", 0}));
}

TEST_CASE("handovers only for goal objects and distinct robots") {
  const WorldState w = SceneBuilder()
                           .movable("part", Circle{0.1}, {1, 2})
                           .movable("junk", Circle{0.1}, {1, 3})
                           .region("bin", {3, 2}, 0.3, 0.3)
                           .robot("a", {1, 1}, 1.5)
                           .robot("b", {3, 1}, 1.5)
                           .grasp_all()
                           .goal("part", "bin")
                           .build();
  CHECK_FALSE(eval_goal_handover(w, {"junk", "a", 0, "b", 0}));
  CHECK_FALSE(eval_goal_handover(w, {"part", "a", 0, "a", 0}));
  const PredicateSet preds = compute_predicates(w);
  for (const HandoverQuery& q : preds.enable_goal_handover) CHECK(q.object == "part");
  CHECK_FALSE(compute_predicates(w.without_handovers()).enable_goal_handover.size() > 0);
}

TEST_CASE("movables on a handover leg are recorded as handover blockers") {
  const WorldState w = SceneBuilder()
                           .movable("part", Circle{0.1}, {1, 2})
                           .movable("box", Circle{0.1}, {1.5, 1})
                           .region("bin", {3, 2}, 0.3, 0.3)
                           .robot("a", {1, 1}, 1.5)
                           .robot("b", {3, 1}, 1.5)
                           .grasp_all()
                           .goal("part", "bin")
                           .build();
  const HandoverQuery q{"part", "a", 0, "b", 0};
  CHECK(eval_goal_handover(w, q));
  CHECK(eval_handover_blockers(w, q) == std::set<std::string>{"box"});
  const PredicateSet preds = compute_predicates(w);
  CHECK(preds.handover_blockers(q) == std::set<std::string>{"box"});
}

TEST_CASE("one object, one robot, one grasp evaluates one pick query") {
  const WorldState w = load_scenario(scenario_path("trivial.json"));
  const PredicateSet preds = compute_predicates(w);
  CHECK(preds.pick_queries_evaluated == 1);
}

TEST_CASE("pick queries cover the full object x robot x grasp product") {
  SceneBuilder b;
  b.robot("r1", {0.5, 0.5}, 3.0).robot("r2", {9.5, 0.5}, 3.0).robot("r3", {5, 9.5}, 3.0);
  for (int i = 0; i < 4; ++i) b.movable("m" + std::to_string(i), Circle{0.1}, {2.0 + i, 5});
  for (int i = 0; i < 4; ++i) {
    for (const char* r : {"r1", "r2", "r3"}) {
      b.grasp("m" + std::to_string(i), r, 0.0, 1.0);
      b.grasp("m" + std::to_string(i), r, std::numbers::pi / 2, 1.0);
    }
  }
  CHECK(compute_predicates(b.build()).pick_queries_evaluated == 4 * 3 * 2);
}

TEST_CASE("predicate sets satisfy their structural invariants") {
  for (const WorldState& w : sample_worlds()) {
    const PredicateSet preds = compute_predicates(w);
    for (const auto& [q, blockers] : preds.occludes_pick) {
      CHECK(preds.can_pick(q));
      for (const std::string& b : blockers) {
        CHECK(w.is_movable(b));
        CHECK(b != q.object);
      }
      // Blockers are exactly the movables touching the stored corridor.
      const Corridor& c = preds.pick_volumes.at(q);
      std::set<std::string> expect;
      for (const std::string& m : w.movable_names()) {
        if (m != q.object && intersects(c, w.placed(m))) expect.insert(m);
      }
      CHECK(blockers == expect);
    }
    for (const auto& [q, blockers] : preds.occludes_goal_place) {
      CHECK(preds.can_place(q));
      CHECK(w.goal_region_of(q.object) == q.region);
      for (const std::string& b : blockers) {
        CHECK(w.is_movable(b));
        CHECK(b != q.object);
      }
    }
    for (const auto& [q, blockers] : preds.occludes_handover) {
      CHECK(preds.can_hand_over(q));
      for (const std::string& b : blockers) {
        CHECK(w.is_movable(b));
        CHECK(b != q.object);
      }
    }
    for (const HandoverQuery& q : preds.enable_goal_handover) {
      CHECK(preds.can_hand_over({q.object, q.receiver, q.receiver_grasp, q.giver, q.giver_grasp}));
    }
  }
}

TEST_CASE("the kept placement probe has the fewest blockers") {
  for (const WorldState& w : sample_worlds()) {
    const PredicateSet preds = compute_predicates(w);
    for (const auto& [q, blockers] : preds.occludes_goal_place) {
      const RobotSpec& r = w.robot(q.robot);
      const Shape& shape = w.object(q.object).shape;
      const Rect area = w.region(q.region).area();
      const Vec2 h = half_extents(shape);
      for (int i = 1; i <= kPlaceProbes; ++i) {
        const Vec2 u = halton2(i);
        const Vec2 p{area.lo.x + h.x + u.x * (area.hi.x - area.lo.x - 2 * h.x),
                     area.lo.y + h.y + u.y * (area.hi.y - area.lo.y - 2 * h.y)};
        if (distance(p, r.base) > r.reach_radius) continue;
        const Corridor c = place_corridor(r.base, r.body_radius, p, shape, w.clearance());
        bool fixed_hit = false;
        for (const Body& f : w.fixed_bodies()) fixed_hit |= intersects(c, f);
        if (fixed_hit) continue;
        CHECK(movable_hits(w, c, q.object) >= blockers.size());
      }
    }
  }
}

TEST_CASE("parallel and sequential evaluation agree") {
  for (const WorldState& w : sample_worlds()) CHECK(compute_predicates(w, true) == compute_predicates(w, false));
}

TEST_CASE("declaration order does not change the predicates") {
  for (const char* f : {"pack_3_7.json", "boxmove_2_6.json"}) {
    const WorldState w = load_scenario(scenario_path(f));
    nlohmann::json j = nlohmann::json::parse(serialize_scenario(w));
    for (const char* key : {"movable", "robots", "regions", "grasps", "goal"}) {
      std::reverse(j[key].begin(), j[key].end());
    }
    const WorldState permuted = parse_scenario(j.dump());
    CHECK(compute_predicates(permuted) == compute_predicates(w));
  }
}
