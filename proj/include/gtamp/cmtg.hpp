#pragma once

#include <compare>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gtamp/predicates.hpp"
#include "gtamp/world.hpp"

namespace gtamp {

/// Pick-and-place without its placement. A handover when the pick and place
/// robots differ.
struct PartialAction {
  std::string object;
  std::string region;
  std::string pick_robot;
  int pick_grasp = 0;
  std::string place_robot;
  int place_grasp = 0;

  bool is_handover() const { return pick_robot != place_robot; }
  bool uses(const std::string& robot) const { return pick_robot == robot || place_robot == robot; }
  auto operator<=>(const PartialAction&) const = default;
};

std::string to_string(const PartialAction& a);

using BlockEdge = std::pair<PartialAction, std::string>;

/// Collaborative manipulation task graph. Action edges are implicit: every
/// action node has exactly one incoming edge from `action.object`.
struct Cmtg {
  std::set<std::string> object_nodes;
  std::set<PartialAction> action_nodes;
  std::set<BlockEdge> block_pick_edges;
  std::set<BlockEdge> block_place_edges;
  std::set<std::string> targets;

  std::vector<PartialAction> actions_of(const std::string& object) const;
  std::size_t action_edge_count() const { return action_nodes.size(); }

  friend bool operator==(const Cmtg&, const Cmtg&) = default;
};

class NoContainingRegion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Goal region for goal-named objects; otherwise the smallest-area region that
/// fully contains the object's current placement.
std::string target_region_of(const std::string& object, const WorldState& world);

/// Adds `object` and, recursively, every non-frozen movable blocking one of
/// its actions. No-op if the object is already a node.
void add_object(const std::string& object, Cmtg& graph, const PredicateSet& preds, const WorldState& world,
                const std::set<std::string>& frozen);

Cmtg build_cmtg(const std::set<std::string>& targets, const PredicateSet& preds, const WorldState& world,
                const std::set<std::string>& frozen);

/// Graphviz rendering for debugging.
std::string to_dot(const Cmtg& graph);

}  // namespace gtamp
