#include "gtamp/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "json.hpp"

namespace gtamp {

namespace {

const std::set<std::string> kNoBlockers;

bool hits_any(const Body& body, const std::vector<Body>& others) {
  return std::any_of(others.begin(), others.end(), [&](const Body& o) { return intersects(body, o); });
}

std::set<std::string> movable_blockers(const WorldState& world, const Corridor& corridor, const std::string& except) {
  std::set<std::string> out;
  for (const std::string& name : world.movable_names()) {
    if (name != except && intersects(corridor, world.placed(name))) out.insert(name);
  }
  return out;
}

const GraspSpec* grasp_of(const WorldState& world, const std::string& object, const std::string& robot, int ordinal) {
  const auto grasps = world.grasps_for(object, robot);
  if (ordinal < 0 || static_cast<std::size_t>(ordinal) >= grasps.size()) return nullptr;
  return grasps[static_cast<std::size_t>(ordinal)];
}

}  // namespace

const std::set<std::string>& PredicateSet::pick_blockers(const PickQuery& q) const {
  auto it = occludes_pick.find(q);
  return it == occludes_pick.end() ? kNoBlockers : it->second;
}

const std::set<std::string>& PredicateSet::place_blockers(const PlaceQuery& q) const {
  auto it = occludes_goal_place.find(q);
  return it == occludes_goal_place.end() ? kNoBlockers : it->second;
}

const std::set<std::string>& PredicateSet::handover_blockers(const HandoverQuery& q) const {
  auto it = occludes_handover.find(q);
  return it == occludes_handover.end() ? kNoBlockers : it->second;
}

PickEvaluation eval_reachable_pick(const WorldState& world, const PickQuery& q) {
  PickEvaluation out;
  const GraspSpec* grasp = grasp_of(world, q.object, q.robot, q.grasp);
  if (grasp == nullptr) return out;
  const RobotSpec& robot = world.robot(q.robot);
  const Vec2 target = world.position(q.object);
  const Vec2 dir = target - robot.base;
  if (dir.norm() > robot.reach_radius) return out;
  if (angle_difference(std::atan2(dir.y, dir.x), grasp->approach_angle) > grasp->tolerance) return out;
  const Corridor corridor = pick_corridor(robot.base, robot.body_radius, target, world.clearance());
  if (hits_any(corridor, world.fixed_bodies())) return out;
  out.reachable = true;
  out.corridor = corridor;
  out.blockers = movable_blockers(world, corridor, q.object);
  return out;
}

PlaceEvaluation eval_reachable_place(const WorldState& world, const PlaceQuery& q) {
  PlaceEvaluation out;
  if (grasp_of(world, q.object, q.robot, q.grasp) == nullptr) return out;
  const RobotSpec& robot = world.robot(q.robot);
  const Shape& shape = world.object(q.object).shape;
  const Rect area = world.region(q.region).area();
  const Vec2 h = half_extents(shape);
  const Rect centers{area.lo + h, area.hi - h};
  if (centers.empty()) return out;

  std::size_t best_count = std::numeric_limits<std::size_t>::max();
  for (int i = 1; i <= kPlaceProbes; ++i) {
    const Vec2 u = halton2(i);
    const Vec2 p{centers.lo.x + u.x * (centers.hi.x - centers.lo.x), centers.lo.y + u.y * (centers.hi.y - centers.lo.y)};
    if (distance(p, robot.base) > robot.reach_radius) continue;
    const Corridor corridor = place_corridor(robot.base, robot.body_radius, p, shape, world.clearance());
    if (hits_any(corridor, world.fixed_bodies())) continue;
    auto blockers = movable_blockers(world, corridor, q.object);
    if (blockers.size() < best_count) {
      best_count = blockers.size();
      out.reachable = true;
      out.corridor = corridor;
      out.probe_pose = Pose{p};
      out.blockers = std::move(blockers);
      if (best_count == 0) break;
    }
  }
  return out;
}

bool eval_goal_handover(const WorldState& world, const HandoverQuery& q) {
  if (q.giver == q.receiver || !world.goal_named(q.object)) return false;
  if (grasp_of(world, q.object, q.giver, q.giver_grasp) == nullptr ||
      grasp_of(world, q.object, q.receiver, q.receiver_grasp) == nullptr) {
    return false;
  }
  const RobotSpec& a = world.robot(q.giver);
  const RobotSpec& b = world.robot(q.receiver);
  const Vec2 point = world.handover_point(q.giver, q.receiver);
  if (distance(a.base, point) > a.reach_radius || distance(b.base, point) > b.reach_radius) return false;
  const Shape& shape = world.object(q.object).shape;
  for (const RobotSpec* r : {&a, &b}) {
    if (hits_any(place_corridor(r->base, r->body_radius, point, shape, world.clearance()), world.fixed_bodies())) {
      return false;
    }
  }
  // Each robot stands just short of the point, on the side of its own base.
  auto standoff = [&](const RobotSpec& r) {
    const Vec2 d = r.base - point;
    const double len = d.norm();
    const Vec2 unit = len > 0.0 ? (1.0 / len) * d : Vec2{0.0, 0.0};
    return point + (r.body_radius + world.clearance()) * unit;
  };
  const Body body_a = PlacedShape{Circle{a.body_radius}, standoff(a)};
  const Body body_b = PlacedShape{Circle{b.body_radius}, standoff(b)};
  return !intersects(body_a, body_b);
}

std::set<std::string> eval_handover_blockers(const WorldState& world, const HandoverQuery& q) {
  const Vec2 point = world.handover_point(q.giver, q.receiver);
  const Shape& shape = world.object(q.object).shape;
  std::set<std::string> out;
  for (const std::string& name : {q.giver, q.receiver}) {
    const RobotSpec& r = world.robot(name);
    out.merge(movable_blockers(world, place_corridor(r.base, r.body_radius, point, shape, world.clearance()), q.object));
  }
  return out;
}

namespace {

PredicateSet robot_predicates(const WorldState& world, const std::string& robot) {
  PredicateSet out;
  for (const std::string& object : world.movable_names()) {
    const int n_grasps = static_cast<int>(world.grasps_for(object, robot).size());
    const auto goal_region = world.goal_region_of(object);
    for (int g = 0; g < n_grasps; ++g) {
      const PickQuery pq{object, robot, g};
      ++out.pick_queries_evaluated;
      auto pick = eval_reachable_pick(world, pq);
      if (pick.reachable) {
        out.reachable_pick.insert(pq);
        out.occludes_pick[pq] = std::move(pick.blockers);
        out.pick_volumes[pq] = *pick.corridor;
      }
      for (const RegionSpec& region : world.scene().regions) {
        const PlaceQuery lq{object, region.name, robot, g};
        auto place = eval_reachable_place(world, lq);
        if (!place.reachable) continue;
        out.reachable_place.insert(lq);
        out.place_volumes[lq] = *place.corridor;
        if (goal_region == region.name) out.occludes_goal_place[lq] = std::move(place.blockers);
      }
    }
  }
  return out;
}

void merge_into(PredicateSet& dst, PredicateSet&& src) {
  dst.reachable_pick.merge(src.reachable_pick);
  dst.reachable_place.merge(src.reachable_place);
  dst.occludes_pick.merge(src.occludes_pick);
  dst.occludes_goal_place.merge(src.occludes_goal_place);
  dst.pick_volumes.merge(src.pick_volumes);
  dst.place_volumes.merge(src.place_volumes);
  dst.pick_queries_evaluated += src.pick_queries_evaluated;
}

}  // namespace

PredicateSet compute_predicates(const WorldState& world, bool parallel) {
  PredicateSet out;
  const auto& robots = world.robot_names();
  if (parallel && robots.size() > 1) {
    std::vector<std::future<PredicateSet>> parts;
    for (const std::string& r : robots) {
      parts.push_back(std::async(std::launch::async, [&world, r] { return robot_predicates(world, r); }));
    }
    for (auto& p : parts) merge_into(out, p.get());
  } else {
    for (const std::string& r : robots) merge_into(out, robot_predicates(world, r));
  }

  if (!world.scene().handovers) return out;
  for (const GoalEntry& goal : world.goal()) {
    for (const std::string& giver : robots) {
      for (const std::string& receiver : robots) {
        if (giver == receiver) continue;
        const int ng = static_cast<int>(world.grasps_for(goal.object, giver).size());
        const int nr = static_cast<int>(world.grasps_for(goal.object, receiver).size());
        for (int g1 = 0; g1 < ng; ++g1) {
          for (int g2 = 0; g2 < nr; ++g2) {
            const HandoverQuery hq{goal.object, giver, g1, receiver, g2};
            if (!eval_goal_handover(world, hq)) continue;
            out.enable_goal_handover.insert(hq);
            out.occludes_handover[hq] = eval_handover_blockers(world, hq);
          }
        }
      }
    }
  }
  return out;
}

std::string predicates_to_json(const PredicateSet& preds) {
  using nlohmann::ordered_json;
  auto corridor_json = [](const Corridor& c) {
    return ordered_json{{"start", {c.start.x, c.start.y}}, {"end", {c.end.x, c.end.y}}, {"half_width", c.half_width}};
  };
  ordered_json root;
  root["reachable_pick"] = ordered_json::array();
  for (const PickQuery& q : preds.reachable_pick) {
    root["reachable_pick"].push_back({{"object", q.object},
                                      {"robot", q.robot},
                                      {"grasp", q.grasp},
                                      {"blockers", preds.pick_blockers(q)},
                                      {"volume", corridor_json(preds.pick_volumes.at(q))}});
  }
  root["reachable_place"] = ordered_json::array();
  for (const PlaceQuery& q : preds.reachable_place) {
    ordered_json entry{{"object", q.object},
                       {"region", q.region},
                       {"robot", q.robot},
                       {"grasp", q.grasp},
                       {"volume", corridor_json(preds.place_volumes.at(q))}};
    if (preds.occludes_goal_place.contains(q)) entry["goal_place_blockers"] = preds.place_blockers(q);
    root["reachable_place"].push_back(std::move(entry));
  }
  root["enable_goal_handover"] = ordered_json::array();
  for (const HandoverQuery& q : preds.enable_goal_handover) {
    root["enable_goal_handover"].push_back({{"object", q.object},
                                            {"giver", q.giver},
                                            {"giver_grasp", q.giver_grasp},
                                            {"receiver", q.receiver},
                                            {"receiver_grasp", q.receiver_grasp},
                                            {"blockers", preds.handover_blockers(q)}});
  }
  return root.dump(2) + "\n";
}

}  // namespace gtamp
