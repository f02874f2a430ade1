#include "gtamp/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gtamp {

using nlohmann::ordered_json;

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ScenarioError(source_ + ": " + path + ": " + what);
  }

  void check_keys(const ordered_json& obj, const std::string& path, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) const {
    if (!obj.is_object()) fail(path, "expected an object");
    std::set<std::string> allowed;
    for (const char* k : required) {
      allowed.insert(k);
      if (!obj.contains(k)) fail(path, std::string("missing key '") + k + "'");
    }
    for (const char* k : optional) allowed.insert(k);
    for (const auto& [key, _] : obj.items()) {
      if (!allowed.contains(key)) fail(path, "unknown key '" + key + "'");
    }
  }

  double number(const ordered_json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::string string(const ordered_json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  Vec2 vec2(const ordered_json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
    return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
  }

  const ordered_json& array(const ordered_json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }

  Shape shape(const ordered_json& v, const std::string& path) const {
    if (!v.is_object() || !v.contains("type")) fail(path, "expected a shape with a 'type'");
    const std::string type = string(v["type"], path + ".type");
    if (type == "circle") {
      check_keys(v, path, {"type", "radius"});
      return Circle{number(v["radius"], path + ".radius")};
    }
    if (type == "rect") {
      check_keys(v, path, {"type", "half_w", "half_h"});
      return AxisRect{number(v["half_w"], path + ".half_w"), number(v["half_h"], path + ".half_h")};
    }
    fail(path + ".type", "unknown shape type '" + type + "'");
  }

 private:
  std::string source_;
};

ordered_json vec_json(Vec2 v) { return ordered_json::array({v.x, v.y}); }

ordered_json shape_json(const Shape& s) {
  if (const auto* c = std::get_if<Circle>(&s)) return {{"type", "circle"}, {"radius", c->radius}};
  const auto& r = std::get<AxisRect>(s);
  return {{"type", "rect"}, {"half_w", r.half_w}, {"half_h", r.half_h}};
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

WorldState parse_scenario(const std::string& text, const std::string& source) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ScenarioError(source + ":" + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  Reader rd(source);
  rd.check_keys(root, "$", {"workspace", "movable", "regions", "robots", "grasps", "goal"},
                {"fixed", "clearance", "handovers"});

  Scene scene;
  std::map<std::string, Pose> poses;
  std::vector<GoalEntry> goal;

  rd.check_keys(root["workspace"], "workspace", {"min", "max"});
  scene.workspace = {rd.vec2(root["workspace"]["min"], "workspace.min"),
                     rd.vec2(root["workspace"]["max"], "workspace.max")};
  if (root.contains("clearance")) scene.clearance = rd.number(root["clearance"], "clearance");
  if (root.contains("handovers")) {
    if (!root["handovers"].is_boolean()) rd.fail("handovers", "expected a boolean");
    scene.handovers = root["handovers"].get<bool>();
  }

  auto read_objects = [&](const char* key, ObjectKind kind) {
    if (!root.contains(key)) return;
    const auto& arr = rd.array(root[key], key);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = std::string(key) + "[" + std::to_string(i) + "]";
      rd.check_keys(arr[i], path, {"name", "shape", "pose"});
      ObjectSpec obj{rd.string(arr[i]["name"], path + ".name"), rd.shape(arr[i]["shape"], path + ".shape"), kind};
      if (poses.contains(obj.name)) rd.fail(path + ".name", "duplicate object name '" + obj.name + "'");
      poses[obj.name] = Pose{rd.vec2(arr[i]["pose"], path + ".pose")};
      scene.objects.push_back(std::move(obj));
    }
  };
  read_objects("fixed", ObjectKind::kFixed);
  read_objects("movable", ObjectKind::kMovable);

  const auto& regions = rd.array(root["regions"], "regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const std::string path = "regions[" + std::to_string(i) + "]";
    rd.check_keys(regions[i], path, {"name", "center", "half_w", "half_h"});
    scene.regions.push_back({rd.string(regions[i]["name"], path + ".name"), rd.vec2(regions[i]["center"], path + ".center"),
                             rd.number(regions[i]["half_w"], path + ".half_w"),
                             rd.number(regions[i]["half_h"], path + ".half_h")});
  }

  const auto& robots = rd.array(root["robots"], "robots");
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const std::string path = "robots[" + std::to_string(i) + "]";
    rd.check_keys(robots[i], path, {"name", "base", "reach_radius", "body_radius"});
    scene.robots.push_back({rd.string(robots[i]["name"], path + ".name"), rd.vec2(robots[i]["base"], path + ".base"),
                            rd.number(robots[i]["reach_radius"], path + ".reach_radius"),
                            rd.number(robots[i]["body_radius"], path + ".body_radius")});
  }

  const auto& grasps = rd.array(root["grasps"], "grasps");
  for (std::size_t i = 0; i < grasps.size(); ++i) {
    const std::string path = "grasps[" + std::to_string(i) + "]";
    rd.check_keys(grasps[i], path, {"object", "robot", "approach_angle", "tolerance"});
    scene.grasps.push_back({rd.string(grasps[i]["object"], path + ".object"),
                            rd.string(grasps[i]["robot"], path + ".robot"),
                            rd.number(grasps[i]["approach_angle"], path + ".approach_angle"),
                            rd.number(grasps[i]["tolerance"], path + ".tolerance")});
  }

  const auto& goals = rd.array(root["goal"], "goal");
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const std::string path = "goal[" + std::to_string(i) + "]";
    rd.check_keys(goals[i], path, {"object", "region"});
    goal.push_back({rd.string(goals[i]["object"], path + ".object"), rd.string(goals[i]["region"], path + ".region")});
  }

  try {
    return WorldState(std::move(scene), std::move(poses), std::move(goal));
  } catch (const InvalidScene& e) {
    throw ScenarioError(source + ": " + e.what());
  }
}

WorldState load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

std::string serialize_scenario(const WorldState& world) {
  const Scene& s = world.scene();
  ordered_json root;
  root["workspace"] = {{"min", vec_json(s.workspace.lo)}, {"max", vec_json(s.workspace.hi)}};
  root["fixed"] = ordered_json::array();
  root["movable"] = ordered_json::array();
  for (const ObjectSpec& obj : s.objects) {
    ordered_json o = {{"name", obj.name}, {"shape", shape_json(obj.shape)}, {"pose", vec_json(world.position(obj.name))}};
    root[obj.kind == ObjectKind::kFixed ? "fixed" : "movable"].push_back(std::move(o));
  }
  root["regions"] = ordered_json::array();
  for (const RegionSpec& r : s.regions) {
    root["regions"].push_back({{"name", r.name}, {"center", vec_json(r.center)}, {"half_w", r.half_w}, {"half_h", r.half_h}});
  }
  root["robots"] = ordered_json::array();
  for (const RobotSpec& r : s.robots) {
    root["robots"].push_back({{"name", r.name},
                              {"base", vec_json(r.base)},
                              {"reach_radius", r.reach_radius},
                              {"body_radius", r.body_radius}});
  }
  root["grasps"] = ordered_json::array();
  for (const GraspSpec& g : s.grasps) {
    root["grasps"].push_back(
        {{"object", g.object}, {"robot", g.robot}, {"approach_angle", g.approach_angle}, {"tolerance", g.tolerance}});
  }
  root["goal"] = ordered_json::array();
  for (const GoalEntry& g : world.goal()) root["goal"].push_back({{"object", g.object}, {"region", g.region}});
  root["clearance"] = s.clearance;
  root["handovers"] = s.handovers;
  return root.dump(2) + "\n";
}

}  // namespace gtamp
