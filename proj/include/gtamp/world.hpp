#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtamp/geometry.hpp"

namespace gtamp {

enum class ObjectKind { kMovable, kFixed };

struct ObjectSpec {
  std::string name;
  Shape shape;
  ObjectKind kind = ObjectKind::kMovable;
};

struct RegionSpec {
  std::string name;
  Vec2 center;
  double half_w = 0.0;
  double half_h = 0.0;

  Rect area() const { return {center - Vec2{half_w, half_h}, center + Vec2{half_w, half_h}}; }
};

struct RobotSpec {
  std::string name;
  Vec2 base;
  double reach_radius = 0.0;
  double body_radius = 0.0;
};

struct GraspSpec {
  std::string object;
  std::string robot;
  double approach_angle = 0.0;  // radians, [-pi, pi)
  double tolerance = 0.0;       // radians, (0, pi]
};

struct GoalEntry {
  std::string object;
  std::string region;
  friend bool operator==(const GoalEntry&, const GoalEntry&) = default;
};

class InvalidScene : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static part of a problem: everything except movable object poses.
struct Scene {
  Rect workspace;
  std::vector<ObjectSpec> objects;  // fixed and movable
  std::vector<RegionSpec> regions;
  std::vector<RobotSpec> robots;
  std::vector<GraspSpec> grasps;
  double clearance = 0.01;
  bool handovers = true;
};

/// Immutable problem instance. Poses cover every object, fixed ones included.
class WorldState {
 public:
  /// Validates names, extents, references and initial non-overlap.
  /// Throws InvalidScene on the first problem found.
  WorldState(Scene scene, std::map<std::string, Pose> poses, std::vector<GoalEntry> goal);

  const Scene& scene() const { return *scene_; }
  const std::map<std::string, Pose>& poses() const { return poses_; }
  const std::vector<GoalEntry>& goal() const { return goal_; }

  const ObjectSpec& object(const std::string& name) const;
  const RegionSpec& region(const std::string& name) const;
  const RobotSpec& robot(const std::string& name) const;
  bool has_object(const std::string& name) const { return object_index_.contains(name); }
  bool has_region(const std::string& name) const { return region_index_.contains(name); }
  bool has_robot(const std::string& name) const { return robot_index_.contains(name); }
  bool is_movable(const std::string& name) const;

  /// Robot position in declaration order; used as the joint-action slot.
  std::size_t robot_slot(const std::string& name) const;
  std::size_t robot_count() const { return scene_->robots.size(); }

  /// Sorted by name, independent of declaration order.
  const std::vector<std::string>& movable_names() const { return movable_names_; }
  const std::vector<std::string>& fixed_names() const { return fixed_names_; }
  /// Robot names sorted by name.
  const std::vector<std::string>& robot_names() const { return robot_names_; }

  std::optional<std::string> goal_region_of(const std::string& object) const;
  bool goal_named(const std::string& object) const { return goal_region_of(object).has_value(); }

  /// Grasps of `object` usable by `robot`, in declaration order; the ordinal
  /// within this list identifies the grasp.
  std::vector<const GraspSpec*> grasps_for(const std::string& object, const std::string& robot) const;

  Vec2 position(const std::string& object) const { return poses_.at(object).position; }
  PlacedShape placed(const std::string& object) const;
  PlacedShape placed_at(const std::string& object, Vec2 center) const;
  /// Bodies of all fixed objects.
  const std::vector<Body>& fixed_bodies() const { return fixed_bodies_; }

  double clearance() const { return scene_->clearance; }

  /// Handover meeting point for two robots: midpoint of their bases clamped
  /// to the workspace.
  Vec2 handover_point(const std::string& robot_a, const std::string& robot_b) const;

  /// Copy with handover predicates switched off.
  WorldState without_handovers() const;

 private:
  std::shared_ptr<const Scene> scene_;
  std::map<std::string, Pose> poses_;
  std::vector<GoalEntry> goal_;
  std::map<std::string, std::size_t> object_index_;
  std::map<std::string, std::size_t> region_index_;
  std::map<std::string, std::size_t> robot_index_;
  std::map<std::string, std::string> goal_index_;
  std::vector<std::string> movable_names_;
  std::vector<std::string> fixed_names_;
  std::vector<std::string> robot_names_;
  std::vector<Body> fixed_bodies_;
};

}  // namespace gtamp
