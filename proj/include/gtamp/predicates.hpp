#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "gtamp/world.hpp"

namespace gtamp {

/// (object, robot, grasp) where `grasp` is the ordinal within
/// WorldState::grasps_for(object, robot).
struct PickQuery {
  std::string object;
  std::string robot;
  int grasp = 0;
  auto operator<=>(const PickQuery&) const = default;
};

struct PlaceQuery {
  std::string object;
  std::string region;
  std::string robot;
  int grasp = 0;
  auto operator<=>(const PlaceQuery&) const = default;
};

struct HandoverQuery {
  std::string object;
  std::string giver;
  int giver_grasp = 0;
  std::string receiver;
  int receiver_grasp = 0;
  auto operator<=>(const HandoverQuery&) const = default;
};

struct PickEvaluation {
  bool reachable = false;
  std::set<std::string> blockers;
  std::optional<Corridor> corridor;
};

struct PlaceEvaluation {
  bool reachable = false;
  std::set<std::string> blockers;
  std::optional<Corridor> corridor;
  std::optional<Pose> probe_pose;
};

/// Number of low-discrepancy placement probes tried per place query.
inline constexpr int kPlaceProbes = 64;

/// All true predicate instances for one world snapshot, plus the swept
/// volumes they were decided on. Blocker sets are stored for every reachable
/// query (possibly empty); place blockers only for goal (object, region) pairs.
struct PredicateSet {
  std::set<PickQuery> reachable_pick;
  std::set<PlaceQuery> reachable_place;
  std::map<PickQuery, std::set<std::string>> occludes_pick;
  std::map<PlaceQuery, std::set<std::string>> occludes_goal_place;
  std::set<HandoverQuery> enable_goal_handover;
  /// Movables on either leg to the handover point, per enabled handover.
  std::map<HandoverQuery, std::set<std::string>> occludes_handover;
  std::map<PickQuery, Corridor> pick_volumes;
  std::map<PlaceQuery, Corridor> place_volumes;
  std::size_t pick_queries_evaluated = 0;

  bool can_pick(const PickQuery& q) const { return reachable_pick.contains(q); }
  bool can_place(const PlaceQuery& q) const { return reachable_place.contains(q); }
  bool can_hand_over(const HandoverQuery& q) const { return enable_goal_handover.contains(q); }
  const std::set<std::string>& pick_blockers(const PickQuery& q) const;
  /// Empty for non-goal pairs.
  const std::set<std::string>& place_blockers(const PlaceQuery& q) const;
  /// Empty for handovers that are not enabled.
  const std::set<std::string>& handover_blockers(const HandoverQuery& q) const;

  friend bool operator==(const PredicateSet&, const PredicateSet&) = default;
};

/// Reach, grasp-direction and fixed-obstacle check of a pick. Blockers are the
/// movables the straight reach corridor touches; empty means the corridor is
/// also free of movables.
PickEvaluation eval_reachable_pick(const WorldState& world, const PickQuery& q);

/// Probes kPlaceProbes Halton placements in the region; keeps the fixed-free,
/// in-reach probe whose place corridor touches the fewest movables.
PlaceEvaluation eval_reachable_place(const WorldState& world, const PlaceQuery& q);

/// Both robots reach the handover point with their corridors clear of fixed
/// objects, and their bodies at the standoff positions do not touch.
bool eval_goal_handover(const WorldState& world, const HandoverQuery& q);

/// Movables other than the handed object that touch the giver's or the
/// receiver's leg to the handover point.
std::set<std::string> eval_handover_blockers(const WorldState& world, const HandoverQuery& q);

/// Exhaustive evaluation. Per-robot work fans out across threads when
/// `parallel` is set; the merged result does not depend on it.
PredicateSet compute_predicates(const WorldState& world, bool parallel = true);

/// JSON dump of every true instance and blocker set.
std::string predicates_to_json(const PredicateSet& preds);

}  // namespace gtamp
