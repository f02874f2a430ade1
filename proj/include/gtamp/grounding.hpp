#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "gtamp/skeleton_ilp.hpp"
#include "gtamp/world.hpp"

namespace gtamp {

/// A pick-and-place with its placement and sweeps. For a handover the giver
/// carries the object to the handover point, the receiver reaches it there
/// and then carries it to the placement.
struct GroundedAction {
  PartialAction action;
  Pose placement;
  Corridor pick_corridor;
  Corridor place_corridor;
  std::optional<Vec2> handover_point;
  std::optional<Corridor> giver_leg;
  std::optional<Corridor> receiver_leg;

  std::vector<Corridor> corridors() const;
  friend bool operator==(const GroundedAction&, const GroundedAction&) = default;
};

struct GroundedJointAction {
  std::vector<std::optional<GroundedAction>> slots;  // one per robot; empty = wait
  std::vector<GroundedAction> actions() const;
  friend bool operator==(const GroundedJointAction&, const GroundedJointAction&) = default;
};

using GroundedSequence = std::vector<GroundedJointAction>;

std::set<std::string> moved_objects(const GroundedSequence& steps);

struct Plan {
  GroundedSequence steps;
  std::set<std::string> moved_objects;

  std::size_t makespan() const { return steps.size(); }
  std::size_t motion_cost() const { return moved_objects.size(); }
  friend bool operator==(const Plan&, const Plan&) = default;
};

struct GroundingSuccess {
  Plan plan;
};

/// Grounding had to ignore untouched movables at some step. `prefix` holds the
/// grounded suffix including that step; `must_move` the objects that still
/// have to be moved before it.
struct GroundingPartial {
  GroundedSequence prefix;
  std::set<std::string> must_move;
};

struct GroundingFailure {
  int step = 0;  // skeleton step (1-based) that could not be grounded
};

using GroundingResult = std::variant<GroundingSuccess, GroundingPartial, GroundingFailure>;

struct GroundingConfig {
  int strict_attempts = 200;
  int relaxed_attempts = 200;
};

/// Pairs of graph actions on different objects with disjoint robots that can
/// never run at the same step: a pick corridor or handover leg of one touches
/// a pick corridor, handover leg or the initial placement of the other. None
/// of these depend on sampled placements.
std::set<ActionPair> concurrency_conflicts(const Cmtg& graph, const WorldState& world);

/// Reverse grounding of `skeleton` in front of the already grounded `suffix`
/// (forward order). Steps are grounded from the last to the first; each
/// step's placements avoid everything later steps sweep.
GroundingResult ground(const TaskSkeleton& skeleton, const GroundedSequence& suffix, const WorldState& world,
                       const GroundingConfig& config, Rng& rng);

struct Violation {
  int step = 0;  // 1-based; 0 for whole-plan checks
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Forward replay from the initial world. Independent of ground(): every
/// corridor is recomputed from the robots and the state at that step.
ValidationReport validate(const Plan& plan, const WorldState& world);

}  // namespace gtamp
