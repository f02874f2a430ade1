#include "gtamp/plan_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gtamp {

using nlohmann::ordered_json;

namespace {

ordered_json vec_json(Vec2 v) { return ordered_json::array({v.x, v.y}); }

ordered_json corridor_json(const Corridor& c) {
  return {{"start", vec_json(c.start)}, {"end", vec_json(c.end)}, {"half_width", c.half_width}};
}

ordered_json action_json(const GroundedAction& g) {
  const PartialAction& a = g.action;
  ordered_json j{{"object", a.object},
                 {"region", a.region},
                 {"pick_robot", a.pick_robot},
                 {"pick_grasp", a.pick_grasp},
                 {"place_robot", a.place_robot},
                 {"place_grasp", a.place_grasp},
                 {"placement", vec_json(g.placement.position)},
                 {"pick_corridor", corridor_json(g.pick_corridor)},
                 {"place_corridor", corridor_json(g.place_corridor)}};
  if (g.handover_point) j["handover_point"] = vec_json(*g.handover_point);
  if (g.giver_leg) j["giver_leg"] = corridor_json(*g.giver_leg);
  if (g.receiver_leg) j["receiver_leg"] = corridor_json(*g.receiver_leg);
  return j;
}

struct PlanReader {
  std::string source;

  [[noreturn]] void fail(const std::string& what) const { throw PlanError(source + ": " + what); }

  Vec2 vec(const ordered_json& j) const {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) fail("expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
  }

  Corridor corridor(const ordered_json& j) const {
    if (!j.is_object() || !j.contains("start") || !j.contains("end") || !j.contains("half_width") ||
        !j["half_width"].is_number()) {
      fail("malformed corridor");
    }
    return {vec(j["start"]), vec(j["end"]), j["half_width"].get<double>()};
  }

  std::string name(const ordered_json& j, const char* key) const {
    if (!j.contains(key) || !j[key].is_string()) fail(std::string("missing string '") + key + "'");
    return j[key].get<std::string>();
  }

  int integer(const ordered_json& j, const char* key) const {
    if (!j.contains(key) || !j[key].is_number_integer()) fail(std::string("missing integer '") + key + "'");
    return j[key].get<int>();
  }
};

}  // namespace

std::string serialize_plan(const Plan& plan, const WorldState& world) {
  ordered_json root;
  root["makespan"] = plan.makespan();
  root["motion_cost"] = plan.motion_cost();
  root["moved_objects"] = plan.moved_objects;
  root["steps"] = ordered_json::array();
  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    ordered_json step{{"step", j + 1}, {"slots", ordered_json::array()}};
    const auto& slots = plan.steps[j].slots;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const std::string robot = s < world.robot_count() ? world.scene().robots[s].name : "?";
      step["slots"].push_back({{"robot", robot}, {"action", slots[s] ? action_json(*slots[s]) : ordered_json(nullptr)}});
    }
    root["steps"].push_back(std::move(step));
  }
  return root.dump(2) + "\n";
}

Plan parse_plan(const std::string& text, const WorldState& world, const std::string& source) {
  PlanReader rd{source};
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    rd.fail(e.what());
  }
  if (!root.is_object() || !root.contains("steps") || !root["steps"].is_array()) rd.fail("missing 'steps' array");

  Plan plan;
  for (const auto& step : root["steps"]) {
    if (!step.is_object() || !step.contains("slots") || !step["slots"].is_array()) rd.fail("step without 'slots'");
    GroundedJointAction joint;
    for (const auto& slot : step["slots"]) {
      if (!slot.is_object()) rd.fail("malformed slot");
      const std::string robot = rd.name(slot, "robot");
      if (!world.has_robot(robot)) rd.fail("unknown robot '" + robot + "'");
      if (!slot.contains("action") || slot["action"].is_null()) {
        joint.slots.emplace_back();
        continue;
      }
      const auto& a = slot["action"];
      GroundedAction g;
      g.action = {rd.name(a, "object"),     rd.name(a, "region"),      rd.name(a, "pick_robot"),
                  rd.integer(a, "pick_grasp"), rd.name(a, "place_robot"), rd.integer(a, "place_grasp")};
      if (!world.is_movable(g.action.object)) rd.fail("unknown object '" + g.action.object + "'");
      if (!world.has_region(g.action.region)) rd.fail("unknown region '" + g.action.region + "'");
      if (!world.has_robot(g.action.pick_robot) || !world.has_robot(g.action.place_robot)) {
        rd.fail("unknown robot in action for '" + g.action.object + "'");
      }
      if (!a.contains("placement") || !a.contains("pick_corridor") || !a.contains("place_corridor")) {
        rd.fail("action for '" + g.action.object + "' lacks placement or corridors");
      }
      g.placement = Pose{rd.vec(a["placement"])};
      g.pick_corridor = rd.corridor(a["pick_corridor"]);
      g.place_corridor = rd.corridor(a["place_corridor"]);
      if (a.contains("handover_point")) g.handover_point = rd.vec(a["handover_point"]);
      if (a.contains("giver_leg")) g.giver_leg = rd.corridor(a["giver_leg"]);
      if (a.contains("receiver_leg")) g.receiver_leg = rd.corridor(a["receiver_leg"]);
      joint.slots.push_back(std::move(g));
    }
    plan.steps.push_back(std::move(joint));
  }
  if (root.contains("moved_objects") && root["moved_objects"].is_array()) {
    for (const auto& m : root["moved_objects"]) {
      if (!m.is_string()) rd.fail("moved_objects must hold names");
      if (!world.is_movable(m.get<std::string>())) rd.fail("unknown object '" + m.get<std::string>() + "'");
      plan.moved_objects.insert(m.get<std::string>());
    }
  } else {
    plan.moved_objects = moved_objects(plan.steps);
  }
  return plan;
}

Plan load_plan(const std::string& path, const WorldState& world) {
  std::ifstream in(path);
  if (!in) throw PlanError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str(), world, path);
}

}  // namespace gtamp
