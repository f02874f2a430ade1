#include "gtamp/world.hpp"

#include <algorithm>
#include <numbers>

namespace gtamp {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidScene(message);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

WorldState::WorldState(Scene scene, std::map<std::string, Pose> poses, std::vector<GoalEntry> goal)
    : scene_(std::make_shared<const Scene>(std::move(scene))), poses_(std::move(poses)), goal_(std::move(goal)) {
  const Scene& s = *scene_;
  require(s.workspace.lo.finite() && s.workspace.hi.finite() && !s.workspace.empty(),
          "workspace bounds must be finite with min <= max");
  require(std::isfinite(s.clearance) && s.clearance >= 0.0, "clearance must be non-negative");

  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const ObjectSpec& obj = s.objects[i];
    require(!obj.name.empty(), "object with empty name");
    require(object_index_.emplace(obj.name, i).second, "duplicate object name '" + obj.name + "'");
    require(valid_shape(obj.shape), "object '" + obj.name + "' has a non-positive extent");
    auto it = poses_.find(obj.name);
    require(it != poses_.end(), "object '" + obj.name + "' has no pose");
    require(it->second.position.finite(), "object '" + obj.name + "' has a non-finite pose");
    require(contained_in({obj.shape, it->second.position}, s.workspace),
            "object '" + obj.name + "' lies outside the workspace");
    (obj.kind == ObjectKind::kMovable ? movable_names_ : fixed_names_).push_back(obj.name);
  }
  for (const auto& [name, pose] : poses_) {
    require(object_index_.contains(name), "pose given for unknown object '" + name + "'");
  }
  std::sort(movable_names_.begin(), movable_names_.end());
  std::sort(fixed_names_.begin(), fixed_names_.end());

  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    const RegionSpec& r = s.regions[i];
    require(!r.name.empty(), "region with empty name");
    require(region_index_.emplace(r.name, i).second, "duplicate region name '" + r.name + "'");
    require(r.center.finite() && finite_positive(r.half_w) && finite_positive(r.half_h),
            "region '" + r.name + "' has invalid extents");
    const Rect a = r.area();
    require(s.workspace.contains(a.lo) && s.workspace.contains(a.hi),
            "region '" + r.name + "' lies outside the workspace");
  }

  for (std::size_t i = 0; i < s.robots.size(); ++i) {
    const RobotSpec& r = s.robots[i];
    require(!r.name.empty(), "robot with empty name");
    require(robot_index_.emplace(r.name, i).second, "duplicate robot name '" + r.name + "'");
    require(r.base.finite(), "robot '" + r.name + "' has a non-finite base");
    require(finite_positive(r.body_radius) && std::isfinite(r.reach_radius) && r.reach_radius > r.body_radius,
            "robot '" + r.name + "' needs reach_radius > body_radius > 0");
    robot_names_.push_back(r.name);
  }
  std::sort(robot_names_.begin(), robot_names_.end());

  for (const GraspSpec& g : s.grasps) {
    require(object_index_.contains(g.object) && s.objects[object_index_.at(g.object)].kind == ObjectKind::kMovable,
            "grasp references unknown movable object '" + g.object + "'");
    require(robot_index_.contains(g.robot), "grasp references unknown robot '" + g.robot + "'");
    require(std::isfinite(g.approach_angle) && g.approach_angle >= -std::numbers::pi &&
                g.approach_angle < std::numbers::pi,
            "grasp approach_angle must lie in [-pi, pi)");
    require(g.tolerance > 0.0 && g.tolerance <= std::numbers::pi, "grasp tolerance must lie in (0, pi]");
  }

  for (const GoalEntry& g : goal_) {
    require(object_index_.contains(g.object) && is_movable(g.object),
            "goal references unknown movable object '" + g.object + "'");
    require(region_index_.contains(g.region), "goal references unknown region '" + g.region + "'");
    require(goal_index_.emplace(g.object, g.region).second, "object '" + g.object + "' named twice in goal");
  }

  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    for (std::size_t j = i + 1; j < s.objects.size(); ++j) {
      const Body a = placed(s.objects[i].name);
      const Body b = placed(s.objects[j].name);
      require(!intersects(a, b),
              "objects '" + s.objects[i].name + "' and '" + s.objects[j].name + "' overlap initially");
    }
  }

  for (const std::string& name : fixed_names_) fixed_bodies_.push_back(placed(name));
}

const ObjectSpec& WorldState::object(const std::string& name) const {
  auto it = object_index_.find(name);
  if (it == object_index_.end()) throw InvalidScene("unknown object '" + name + "'");
  return scene_->objects[it->second];
}

const RegionSpec& WorldState::region(const std::string& name) const {
  auto it = region_index_.find(name);
  if (it == region_index_.end()) throw InvalidScene("unknown region '" + name + "'");
  return scene_->regions[it->second];
}

const RobotSpec& WorldState::robot(const std::string& name) const {
  return scene_->robots[robot_slot(name)];
}

std::size_t WorldState::robot_slot(const std::string& name) const {
  auto it = robot_index_.find(name);
  if (it == robot_index_.end()) throw InvalidScene("unknown robot '" + name + "'");
  return it->second;
}

bool WorldState::is_movable(const std::string& name) const {
  auto it = object_index_.find(name);
  return it != object_index_.end() && scene_->objects[it->second].kind == ObjectKind::kMovable;
}

std::optional<std::string> WorldState::goal_region_of(const std::string& object) const {
  auto it = goal_index_.find(object);
  if (it == goal_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<const GraspSpec*> WorldState::grasps_for(const std::string& object, const std::string& robot) const {
  std::vector<const GraspSpec*> out;
  for (const GraspSpec& g : scene_->grasps) {
    if (g.object == object && g.robot == robot) out.push_back(&g);
  }
  return out;
}

PlacedShape WorldState::placed(const std::string& object) const { return placed_at(object, position(object)); }

PlacedShape WorldState::placed_at(const std::string& object, Vec2 center) const {
  return {this->object(object).shape, center};
}

Vec2 WorldState::handover_point(const std::string& robot_a, const std::string& robot_b) const {
  const Vec2 mid = 0.5 * (robot(robot_a).base + robot(robot_b).base);
  const Rect& ws = scene_->workspace;
  return {std::clamp(mid.x, ws.lo.x, ws.hi.x), std::clamp(mid.y, ws.lo.y, ws.hi.y)};
}

WorldState WorldState::without_handovers() const {
  Scene s = *scene_;
  s.handovers = false;
  return WorldState(std::move(s), poses_, goal_);
}

}  // namespace gtamp
