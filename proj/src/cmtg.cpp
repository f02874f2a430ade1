#include "gtamp/cmtg.hpp"

#include <limits>
#include <map>
#include <sstream>

namespace gtamp {

std::string to_string(const PartialAction& a) {
  std::ostringstream os;
  os << a.object << "->" << a.region << " [" << a.pick_robot << "/g" << a.pick_grasp;
  if (a.is_handover()) os << " => " << a.place_robot << "/g" << a.place_grasp;
  os << "]";
  return os.str();
}

std::vector<PartialAction> Cmtg::actions_of(const std::string& object) const {
  std::vector<PartialAction> out;
  for (auto it = action_nodes.lower_bound(PartialAction{object, "", "", std::numeric_limits<int>::min(), "", 0});
       it != action_nodes.end() && it->object == object; ++it) {
    out.push_back(*it);
  }
  return out;
}

std::string target_region_of(const std::string& object, const WorldState& world) {
  if (auto goal = world.goal_region_of(object)) return *goal;
  const PlacedShape placed = world.placed(object);
  const RegionSpec* best = nullptr;
  for (const RegionSpec& r : world.scene().regions) {
    if (!contained_in(placed, r.area())) continue;
    if (best == nullptr || r.area().area() < best->area().area()) best = &r;
  }
  if (best == nullptr) throw NoContainingRegion("object '" + object + "' lies in no declared region");
  return best->name;
}

void add_object(const std::string& object, Cmtg& graph, const PredicateSet& preds, const WorldState& world,
                const std::set<std::string>& frozen) {
  if (graph.object_nodes.contains(object)) return;
  graph.object_nodes.insert(object);

  const bool goal_named = world.goal_named(object);
  const std::string region = target_region_of(object, world);

  auto add_blockers = [&](const std::set<std::string>& blockers, const PartialAction& action,
                          std::set<BlockEdge>& edges) {
    for (const std::string& blocker : blockers) {
      if (frozen.contains(blocker) || blocker == object) continue;
      add_object(blocker, graph, preds, world, frozen);
      edges.insert({action, blocker});
    }
  };

  for (const std::string& picker : world.robot_names()) {
    const int n_pick = static_cast<int>(world.grasps_for(object, picker).size());
    for (int g = 0; g < n_pick; ++g) {
      if (!preds.can_pick({object, picker, g})) continue;
      std::vector<PartialAction> actions;
      if (preds.can_place({object, region, picker, g})) actions.push_back({object, region, picker, g, picker, g});
      if (goal_named) {
        for (const std::string& placer : world.robot_names()) {
          if (placer == picker) continue;
          const int n_place = static_cast<int>(world.grasps_for(object, placer).size());
          for (int h = 0; h < n_place; ++h) {
            if (preds.can_hand_over({object, picker, g, placer, h}) && preds.can_place({object, region, placer, h})) {
              actions.push_back({object, region, picker, g, placer, h});
            }
          }
        }
      }
      for (const PartialAction& action : actions) {
        graph.action_nodes.insert(action);
        add_blockers(preds.pick_blockers({object, picker, g}), action, graph.block_pick_edges);
        if (action.is_handover()) {
          // Both legs are swept before the release, so they behave like the pick corridor.
          add_blockers(preds.handover_blockers({object, picker, g, action.place_robot, action.place_grasp}), action,
                       graph.block_pick_edges);
        }
        if (goal_named) {
          add_blockers(preds.place_blockers({object, region, action.place_robot, action.place_grasp}), action,
                       graph.block_place_edges);
        }
      }
    }
  }
}

Cmtg build_cmtg(const std::set<std::string>& targets, const PredicateSet& preds, const WorldState& world,
                const std::set<std::string>& frozen) {
  if (targets.empty()) throw std::invalid_argument("build_cmtg: empty target set");
  Cmtg graph;
  for (const std::string& t : targets) {
    if (frozen.contains(t)) throw std::invalid_argument("build_cmtg: target '" + t + "' is frozen");
    if (!world.is_movable(t)) throw std::invalid_argument("build_cmtg: target '" + t + "' is not movable");
  }
  graph.targets = targets;
  for (const std::string& t : targets) add_object(t, graph, preds, world, frozen);
  return graph;
}

std::string to_dot(const Cmtg& graph) {
  std::ostringstream os;
  std::map<PartialAction, std::size_t> ids;
  os << "digraph cmtg {\n";
  for (const std::string& o : graph.object_nodes) {
    os << "  \"" << o << "\" [shape=circle" << (graph.targets.contains(o) ? ",color=red" : "") << "];\n";
  }
  for (const PartialAction& a : graph.action_nodes) {
    const std::size_t id = ids.size();
    ids[a] = id;
    os << "  a" << id << " [shape=box,style=rounded,label=\"" << to_string(a) << "\"];\n";
    os << "  \"" << a.object << "\" -> a" << id << " [color=gold];\n";
  }
  for (const auto& [a, o] : graph.block_pick_edges) os << "  a" << ids[a] << " -> \"" << o << "\" [color=blue];\n";
  for (const auto& [a, o] : graph.block_place_edges) os << "  a" << ids[a] << " -> \"" << o << "\" [color=purple];\n";
  os << "}\n";
  return os.str();
}

}  // namespace gtamp
