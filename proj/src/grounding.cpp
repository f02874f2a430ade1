#include "gtamp/grounding.hpp"

#include <algorithm>
#include <cmath>

namespace gtamp {

std::vector<Corridor> GroundedAction::corridors() const {
  std::vector<Corridor> out{pick_corridor, place_corridor};
  if (giver_leg) out.push_back(*giver_leg);
  if (receiver_leg) out.push_back(*receiver_leg);
  return out;
}

std::vector<GroundedAction> GroundedJointAction::actions() const {
  std::vector<GroundedAction> out;
  for (const auto& slot : slots) {
    if (!slot) continue;
    const bool seen =
        std::any_of(out.begin(), out.end(), [&](const GroundedAction& g) { return g.action == slot->action; });
    if (!seen) out.push_back(*slot);
  }
  return out;
}

std::set<std::string> moved_objects(const GroundedSequence& steps) {
  std::set<std::string> out;
  for (const auto& step : steps) {
    for (const auto& a : step.actions()) out.insert(a.action.object);
  }
  return out;
}

namespace {

bool hits(const Body& body, const std::vector<Body>& others) {
  return std::any_of(others.begin(), others.end(), [&](const Body& o) { return intersects(body, o); });
}

bool hits_any(const std::vector<Body>& bodies, const std::vector<Body>& others) {
  return std::any_of(bodies.begin(), bodies.end(), [&](const Body& b) { return hits(b, others); });
}

std::vector<Body> sweep_bodies(const GroundedAction& g, const WorldState& world) {
  std::vector<Body> out;
  for (const Corridor& c : g.corridors()) out.push_back(c);
  out.push_back(world.placed_at(g.action.object, g.placement.position));
  return out;
}

class ReverseGrounder {
 public:
  ReverseGrounder(const TaskSkeleton& skeleton, const GroundedSequence& suffix, const WorldState& world,
                  const GroundingConfig& config, Rng& rng)
      : skeleton_(skeleton), world_(world), config_(config), rng_(rng) {
    for (auto it = suffix.rbegin(); it != suffix.rend(); ++it) push_future(*it);
    std::set<std::string> planned = skeleton.moved_objects;
    planned.insert(future_moved_.begin(), future_moved_.end());
    for (const std::string& m : world.movable_names()) {
      if (!planned.contains(m)) untouched_.push_back(m);
    }
  }

  GroundingResult run() {
    for (int t = static_cast<int>(skeleton_.steps.size()); t >= 1; --t) {
      const JointStep& step = skeleton_.steps[static_cast<std::size_t>(t - 1)];
      if (auto grounded = ground_step(step, false)) {
        push_future(std::move(*grounded));
        continue;
      }
      auto relaxed = ground_step(step, true);
      if (!relaxed) return GroundingFailure{t};
      push_future(std::move(*relaxed));
      GroundedSequence prefix = forward();
      std::set<std::string> remaining = must_move(prefix);
      // Strict sampling was unlucky but nothing is in the way: the suffix
      // already achieves the goal on its own.
      if (remaining.empty()) return GroundingSuccess{Plan{prefix, moved_objects(prefix)}};
      return GroundingPartial{prefix, std::move(remaining)};
    }
    GroundedSequence steps = forward();
    Plan plan{steps, moved_objects(steps)};
    return GroundingSuccess{std::move(plan)};
  }

 private:
  void push_future(GroundedJointAction step) {
    for (const GroundedAction& g : step.actions()) {
      future_moved_.insert(g.action.object);
      for (Body& b : sweep_bodies(g, world_)) future_volume_.push_back(std::move(b));
    }
    reversed_.push_back(std::move(step));
  }

  GroundedSequence forward() const { return {reversed_.rbegin(), reversed_.rend()}; }

  std::set<std::string> must_move(const GroundedSequence& prefix) const {
    const std::set<std::string> moved = moved_objects(prefix);
    std::set<std::string> out;
    for (const GoalEntry& g : world_.goal()) {
      if (!moved.contains(g.object)) out.insert(g.object);
    }
    std::vector<Body> volume;
    for (const auto& step : prefix) {
      for (const auto& g : step.actions()) {
        for (Body& b : sweep_bodies(g, world_)) volume.push_back(std::move(b));
      }
    }
    for (const std::string& m : world_.movable_names()) {
      if (!moved.contains(m) && hits(world_.placed(m), volume)) out.insert(m);
    }
    return out;
  }

  // Obstacles present while this step executes: fixed objects, objects moved
  // later (still at their initial poses) and, unless relaxed, untouched ones.
  std::vector<Body> step_obstacles(bool relaxed) const {
    std::vector<Body> out = world_.fixed_bodies();
    for (const std::string& m : future_moved_) out.push_back(world_.placed(m));
    if (!relaxed) {
      for (const std::string& m : untouched_) out.push_back(world_.placed(m));
    }
    return out;
  }

  std::optional<GroundedJointAction> ground_step(const JointStep& step, bool relaxed) {
    const std::vector<PartialAction> actions = step.actions();
    const std::vector<Body> obstacles = step_obstacles(relaxed);
    const int attempts = relaxed ? config_.relaxed_attempts : config_.strict_attempts;

    GroundedJointAction out{std::vector<std::optional<GroundedAction>>(world_.robot_count())};
    std::vector<Body> accepted;  // sweeps and placements of actions grounded at this step
    for (const PartialAction& action : actions) {
      // Other objects moved at this step still sit at their initial poses.
      std::vector<Body> others = obstacles;
      for (const PartialAction& other : actions) {
        if (other.object != action.object) others.push_back(world_.placed(other.object));
      }
      others.insert(others.end(), accepted.begin(), accepted.end());

      auto grounded = ground_action(action, others, attempts);
      if (!grounded) return std::nullopt;
      for (Body& b : sweep_bodies(*grounded, world_)) accepted.push_back(std::move(b));
      out.slots[world_.robot_slot(action.pick_robot)] = *grounded;
      out.slots[world_.robot_slot(action.place_robot)] = *grounded;
    }
    return out;
  }

  std::optional<GroundedAction> ground_action(const PartialAction& action, const std::vector<Body>& others,
                                              int attempts) {
    const RobotSpec& picker = world_.robot(action.pick_robot);
    const RobotSpec& placer = world_.robot(action.place_robot);
    const Shape& shape = world_.object(action.object).shape;
    const double clearance = world_.clearance();

    GroundedAction g;
    g.action = action;
    g.pick_corridor = pick_corridor(picker.base, picker.body_radius, world_.position(action.object), clearance);
    std::vector<Body> fixed_sweeps{g.pick_corridor};
    if (action.is_handover()) {
      const Vec2 point = world_.handover_point(action.pick_robot, action.place_robot);
      g.handover_point = point;
      g.giver_leg = place_corridor(picker.base, picker.body_radius, point, shape, clearance);
      g.receiver_leg = place_corridor(placer.base, placer.body_radius, point, shape, clearance);
      fixed_sweeps.push_back(*g.giver_leg);
      fixed_sweeps.push_back(*g.receiver_leg);
    }
    if (hits_any(fixed_sweeps, others)) return std::nullopt;

    std::vector<Body> placement_forbidden = others;
    placement_forbidden.insert(placement_forbidden.end(), future_volume_.begin(), future_volume_.end());
    const Rect area = world_.region(action.region).area();
    const Rect reach{placer.base - Vec2{placer.reach_radius, placer.reach_radius},
                     placer.base + Vec2{placer.reach_radius, placer.reach_radius}};
    for (int attempt = 0; attempt < attempts; ++attempt) {
      auto pose = sample_placement(shape, area, placement_forbidden, rng_, 1, reach);
      if (!pose) continue;
      if (distance(pose->position, placer.base) > placer.reach_radius) continue;
      const Corridor carry = place_corridor(placer.base, placer.body_radius, pose->position, shape, clearance);
      if (hits(carry, others)) continue;
      g.placement = *pose;
      g.place_corridor = carry;
      return g;
    }
    return std::nullopt;
  }

  const TaskSkeleton& skeleton_;
  const WorldState& world_;
  const GroundingConfig& config_;
  Rng& rng_;
  std::vector<GroundedJointAction> reversed_;
  std::set<std::string> future_moved_;
  std::vector<Body> future_volume_;
  std::vector<std::string> untouched_;
};

bool same_corridor(const Corridor& a, const Corridor& b) {
  constexpr double kTol = 1e-9;
  return distance(a.start, b.start) <= kTol && distance(a.end, b.end) <= kTol &&
         std::fabs(a.half_width - b.half_width) <= kTol;
}

}  // namespace

std::set<ActionPair> concurrency_conflicts(const Cmtg& graph, const WorldState& world) {
  struct Footprint {
    const PartialAction* action;
    std::vector<Body> sweeps;
    Body object;
  };
  std::vector<Footprint> prints;
  for (const PartialAction& a : graph.action_nodes) {
    const RobotSpec& picker = world.robot(a.pick_robot);
    const Vec2 from = world.position(a.object);
    Footprint f{&a, {pick_corridor(picker.base, picker.body_radius, from, world.clearance())}, world.placed(a.object)};
    if (a.is_handover()) {
      const RobotSpec& placer = world.robot(a.place_robot);
      const Vec2 point = world.handover_point(a.pick_robot, a.place_robot);
      const Shape& shape = world.object(a.object).shape;
      f.sweeps.push_back(place_corridor(picker.base, picker.body_radius, point, shape, world.clearance()));
      f.sweeps.push_back(place_corridor(placer.base, placer.body_radius, point, shape, world.clearance()));
    }
    prints.push_back(std::move(f));
  }
  std::set<ActionPair> out;
  for (std::size_t i = 0; i < prints.size(); ++i) {
    for (std::size_t j = i + 1; j < prints.size(); ++j) {
      const PartialAction& a = *prints[i].action;
      const PartialAction& b = *prints[j].action;
      if (a.object == b.object || a.uses(b.pick_robot) || a.uses(b.place_robot)) continue;
      std::vector<Body> b_all = prints[j].sweeps;
      b_all.push_back(prints[j].object);
      const bool clash = hits_any(prints[i].sweeps, b_all) || hits_any(prints[j].sweeps, {prints[i].object});
      if (clash) out.insert({a, b});
    }
  }
  return out;
}

GroundingResult ground(const TaskSkeleton& skeleton, const GroundedSequence& suffix, const WorldState& world,
                       const GroundingConfig& config, Rng& rng) {
  if (skeleton.steps.empty()) throw std::invalid_argument("ground: empty skeleton");
  ReverseGrounder grounder(skeleton, suffix, world, config, rng);
  return grounder.run();
}

ValidationReport validate(const Plan& plan, const WorldState& world) {
  ValidationReport report;
  auto flag = [&](int step, std::string msg) { report.violations.push_back({step, std::move(msg)}); };

  std::map<std::string, Vec2> current;
  for (const std::string& m : world.movable_names()) current[m] = world.position(m);
  std::set<std::string> moved;
  const double clearance = world.clearance();

  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    const int step = static_cast<int>(j) + 1;
    const GroundedJointAction& joint = plan.steps[j];
    if (joint.slots.size() != world.robot_count()) {
      flag(step, "joint action has " + std::to_string(joint.slots.size()) + " slots for " +
                     std::to_string(world.robot_count()) + " robots");
      continue;
    }
    const std::vector<GroundedAction> actions = joint.actions();
    if (actions.empty()) flag(step, "empty time step");

    for (std::size_t s = 0; s < joint.slots.size(); ++s) {
      const auto& slot = joint.slots[s];
      if (slot && !slot->action.uses(world.scene().robots[s].name)) {
        flag(step, "slot of robot '" + world.scene().robots[s].name + "' holds an action it does not take part in");
      }
    }

    std::vector<std::vector<Body>> sweeps;
    for (const GroundedAction& g : actions) {
      const PartialAction& a = g.action;
      std::vector<Body> own;
      if (!world.is_movable(a.object) || !world.has_region(a.region) || !world.has_robot(a.pick_robot) ||
          !world.has_robot(a.place_robot)) {
        flag(step, "action " + to_string(a) + " references unknown names");
        sweeps.push_back(own);
        continue;
      }
      for (const std::string& r : {a.pick_robot, a.place_robot}) {
        const auto& slot = joint.slots[world.robot_slot(r)];
        if (!slot || slot->action != a) flag(step, "robot '" + r + "' is not assigned " + to_string(a));
      }
      if (moved.contains(a.object)) flag(step, "object '" + a.object + "' moved twice");

      const RobotSpec& picker = world.robot(a.pick_robot);
      const RobotSpec& placer = world.robot(a.place_robot);
      const Shape& shape = world.object(a.object).shape;
      const Vec2 from = current.at(a.object);
      const auto pick_grasps = world.grasps_for(a.object, a.pick_robot);
      const auto place_grasps = world.grasps_for(a.object, a.place_robot);
      if (a.pick_grasp < 0 || a.pick_grasp >= static_cast<int>(pick_grasps.size()) || a.place_grasp < 0 ||
          a.place_grasp >= static_cast<int>(place_grasps.size())) {
        flag(step, "unknown grasp in " + to_string(a));
      } else {
        const Vec2 d = from - picker.base;
        if (d.norm() > picker.reach_radius) flag(step, "object '" + a.object + "' out of reach for pick");
        if (angle_difference(std::atan2(d.y, d.x), pick_grasps[static_cast<std::size_t>(a.pick_grasp)]->approach_angle) >
            pick_grasps[static_cast<std::size_t>(a.pick_grasp)]->tolerance) {
          flag(step, "grasp direction mismatch picking '" + a.object + "'");
        }
      }
      if (!same_corridor(g.pick_corridor, pick_corridor(picker.base, picker.body_radius, from, clearance))) {
        flag(step, "pick corridor of '" + a.object + "' inconsistent with robot and object pose");
      }
      if (!contained_in(world.placed_at(a.object, g.placement.position), world.region(a.region).area())) {
        flag(step, "placement not in region for '" + a.object + "'");
      }
      if (distance(g.placement.position, placer.base) > placer.reach_radius) {
        flag(step, "placement of '" + a.object + "' out of reach");
      }
      if (!same_corridor(g.place_corridor,
                         place_corridor(placer.base, placer.body_radius, g.placement.position, shape, clearance))) {
        flag(step, "place corridor of '" + a.object + "' inconsistent with robot and placement");
      }
      if (a.is_handover()) {
        const Vec2 point = world.handover_point(a.pick_robot, a.place_robot);
        if (!g.handover_point || distance(*g.handover_point, point) > 1e-9 || !g.giver_leg || !g.receiver_leg ||
            !same_corridor(*g.giver_leg, place_corridor(picker.base, picker.body_radius, point, shape, clearance)) ||
            !same_corridor(*g.receiver_leg, place_corridor(placer.base, placer.body_radius, point, shape, clearance))) {
          flag(step, "handover legs of '" + a.object + "' inconsistent");
        } else if (distance(point, picker.base) > picker.reach_radius ||
                   distance(point, placer.base) > placer.reach_radius) {
          flag(step, "handover point out of reach for '" + a.object + "'");
        }
      } else if (g.handover_point || g.giver_leg || g.receiver_leg) {
        flag(step, "single-robot action of '" + a.object + "' carries handover legs");
      }

      for (const Corridor& c : g.corridors()) own.push_back(c);
      const Body placed = world.placed_at(a.object, g.placement.position);
      for (const std::string& f : world.fixed_names()) {
        const Body fb = world.placed(f);
        for (const Body& b : own) {
          if (intersects(b, fb)) {
            flag(step, "sweep for '" + a.object + "' hits fixed object '" + f + "'");
            break;
          }
        }
        if (intersects(placed, fb)) flag(step, "placement of '" + a.object + "' collides with fixed '" + f + "'");
      }
      for (const auto& [name, pos] : current) {
        if (name == a.object) continue;
        const Body mb = world.placed_at(name, pos);
        for (const Body& b : own) {
          if (intersects(b, mb)) {
            flag(step, "sweep for '" + a.object + "' hits object '" + name + "'");
            break;
          }
        }
        if (intersects(placed, mb)) flag(step, "placement of '" + a.object + "' collides with '" + name + "'");
      }
      own.push_back(placed);
      sweeps.push_back(std::move(own));
    }

    for (std::size_t p = 0; p < sweeps.size(); ++p) {
      for (std::size_t q = p + 1; q < sweeps.size(); ++q) {
        if (hits_any(sweeps[p], sweeps[q])) {
          flag(step, "inter-robot sweep conflict between '" + actions[p].action.object + "' and '" +
                         actions[q].action.object + "'");
        }
      }
    }

    for (const GroundedAction& g : actions) {
      if (!world.is_movable(g.action.object)) continue;
      current[g.action.object] = g.placement.position;
      moved.insert(g.action.object);
    }
  }

  for (const GoalEntry& goal : world.goal()) {
    if (!contained_in(world.placed_at(goal.object, current.at(goal.object)), world.region(goal.region).area())) {
      flag(0, "goal not satisfied: '" + goal.object + "' not in '" + goal.region + "'");
    }
  }
  if (moved != plan.moved_objects) flag(0, "moved_objects does not match the actions");
  return report;
}

}  // namespace gtamp
