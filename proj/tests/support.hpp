#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gtamp/binary_program.hpp"
#include "gtamp/world.hpp"

namespace gtamp::testing {

inline std::string scenario_path(const std::string& name) { return std::string(GTAMP_SCENARIO_DIR) + "/" + name; }

/// Builds small worlds in code. Grasps default to "any direction".
class SceneBuilder {
 public:
  explicit SceneBuilder(Rect workspace = {{0.0, 0.0}, {10.0, 10.0}}) { scene_.workspace = workspace; }

  SceneBuilder& movable(const std::string& name, Shape shape, Vec2 at) {
    scene_.objects.push_back({name, shape, ObjectKind::kMovable});
    poses_[name] = Pose{at};
    return *this;
  }
  SceneBuilder& fixed(const std::string& name, Shape shape, Vec2 at) {
    scene_.objects.push_back({name, shape, ObjectKind::kFixed});
    poses_[name] = Pose{at};
    return *this;
  }
  SceneBuilder& region(const std::string& name, Vec2 center, double half_w, double half_h) {
    scene_.regions.push_back({name, center, half_w, half_h});
    return *this;
  }
  SceneBuilder& robot(const std::string& name, Vec2 base, double reach, double body = 0.1) {
    scene_.robots.push_back({name, base, reach, body});
    return *this;
  }
  SceneBuilder& grasp(const std::string& object, const std::string& robot, double angle = 0.0,
                      double tolerance = std::numbers::pi) {
    scene_.grasps.push_back({object, robot, angle, tolerance});
    return *this;
  }
  /// One omnidirectional grasp for every (movable, robot) pair not yet covered.
  SceneBuilder& grasp_all() {
    for (const ObjectSpec& o : scene_.objects) {
      if (o.kind != ObjectKind::kMovable) continue;
      for (const RobotSpec& r : scene_.robots) {
        bool have = false;
        for (const GraspSpec& g : scene_.grasps) have |= g.object == o.name && g.robot == r.name;
        if (!have) grasp(o.name, r.name);
      }
    }
    return *this;
  }
  SceneBuilder& goal(const std::string& object, const std::string& region) {
    goal_.push_back({object, region});
    return *this;
  }
  SceneBuilder& clearance(double c) {
    scene_.clearance = c;
    return *this;
  }
  SceneBuilder& handovers(bool on) {
    scene_.handovers = on;
    return *this;
  }
  WorldState build() const { return WorldState(scene_, poses_, goal_); }

 private:
  Scene scene_;
  std::map<std::string, Pose> poses_;
  std::vector<GoalEntry> goal_;
};

/// Exhaustive 2^n check: optimal objective, or nullopt if infeasible.
inline std::optional<long> brute_force_optimum(const BinaryProgram& p) {
  const auto n = static_cast<std::size_t>(p.num_vars);
  std::vector<std::int8_t> x(n, 0);
  std::optional<long> best;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::int8_t>((mask >> i) & 1U);
    if (!p.feasible(x)) continue;
    const long obj = p.objective(x);
    if (!best || obj < *best) best = obj;
  }
  return best;
}

}  // namespace gtamp::testing
