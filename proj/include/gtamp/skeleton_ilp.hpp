#pragma once

#include <bitset>
#include <chrono>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gtamp/binary_program.hpp"
#include "gtamp/cmtg.hpp"

namespace gtamp {

/// One binary variable of the skeleton program. Action variables are
/// X^t_{M,a} ("action a runs at step t or later"); block variables are
/// X^t_{a,M'} for a block edge (a, M').
struct IlpVar {
  enum class Kind { kAction, kBlock };
  Kind kind = Kind::kAction;
  int action = 0;   // index into IlpModel::actions
  int block = -1;   // index into IlpModel::blocks, kBlock only
  int step = 1;     // 1-based
};

struct IlpBlock {
  int action = 0;
  std::string blocker;
  bool blocks_pick = false;
  bool blocks_place = false;
};

/// Constraint families that can be left out of a model (index = family number).
using FamilyMask = std::bitset<15>;

/// Family number of the implied inequalities: per-robot capacity
/// (sum of a robot's selected actions <= horizon) and time-indexed blocker
/// precedence. They follow from families 1-12 for binary points and only
/// tighten propagation; each is emitted only if the families it is derived
/// from are present.
inline constexpr int kImpliedFamily = 13;

/// Family number of same-step exclusions added by add_exclusions.
inline constexpr int kExclusionFamily = 14;

/// Two actions that must not end at the same step.
using ActionPair = std::pair<PartialAction, PartialAction>;

struct IlpModel {
  int horizon = 1;
  std::vector<PartialAction> actions;  // action edges, in variable order
  std::vector<IlpBlock> blocks;        // E_B = pick and place block edges
  std::vector<std::string> robots;     // robots appearing in some action
  std::set<std::string> targets;
  std::vector<IlpVar> vars;
  BinaryProgram program;  // objective: sum_a X^1_{M,a}
  long big_m = 0;

  int action_var(int action, int step) const { return action * horizon + (step - 1); }
  int block_var(int block, int step) const {
    return static_cast<int>(actions.size()) * horizon + block * horizon + (step - 1);
  }
  /// The X^t_{M,a} variables, the ones no-good cuts range over.
  std::vector<int> selection_vars() const;

  /// CPLEX LP text.
  std::string to_lp() const;
};

struct IlpSolution {
  std::vector<std::int8_t> assignment;
  long objective_value = 0;
};

/// A partially grounded joint action: one slot per robot (scene declaration
/// order); an empty slot is a wait. A handover fills both of its robots' slots.
struct JointStep {
  std::vector<std::optional<PartialAction>> slots;
  std::vector<PartialAction> actions() const;
  friend bool operator==(const JointStep&, const JointStep&) = default;
};

struct TaskSkeleton {
  std::vector<JointStep> steps;
  std::set<std::string> moved_objects;

  /// Time steps.
  std::size_t length() const { return steps.size(); }
  /// Objects intended to be moved.
  std::size_t moved_count() const { return moved_objects.size(); }
  friend bool operator==(const TaskSkeleton&, const TaskSkeleton&) = default;
};

struct SkeletonGenConfig {
  int t_max = 8;
  int max_skeletons = 8;
  /// Branch-and-bound node budget per solve; <= 0 for unlimited. A model whose
  /// solve exceeds the budget contributes no further skeletons.
  long node_limit = 2'000'000;
  /// Generation stops early (keeping what it has) once this passes.
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
  /// Pairs of actions that can never share a step; added to every model.
  std::set<ActionPair> exclusive;
};

class DecodeViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySkeletonSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Emits constraint families 1..12 (plus the implied family) over horizon
/// `horizon`; families set in
/// `omit` are left out (for checking what each family contributes).
IlpModel build_model(const Cmtg& graph, int horizon, FamilyMask omit = {});

/// For each pair whose actions are both in the model and each step t:
/// (X^t_a - X^{t+1}_a) + (X^t_b - X^{t+1}_b) <= 1, with X^{T+1} = 0.
void add_exclusions(IlpModel& model, const std::set<ActionPair>& pairs);

std::optional<IlpSolution> solve(const IlpModel& model, const SolveLimits& limits = {});

/// Up to `k` distinct solutions in non-decreasing objective order, separated
/// by no-good cuts over the selection variables.
std::vector<IlpSolution> enumerate(const IlpModel& model, int k, const SolveLimits& limits = {});

/// Action a runs at the last step t with X^t_{M,a} = 1. `robot_slots` lists the
/// scene's robots in slot order. Throws DecodeViolation on any broken
/// skeleton invariant.
TaskSkeleton decode(const IlpSolution& solution, const IlpModel& model, const Cmtg& graph,
                    const std::vector<std::string>& robot_slots);

/// Smallest horizon worth trying: ceil(|targets| / robots).
int horizon_lower_bound(std::size_t targets, std::size_t robots);

/// Raises the horizon from the lower bound to t_max, collecting up to
/// max_skeletons distinct skeletons. Throws EmptySkeletonSet if none exist.
std::vector<TaskSkeleton> generate_skeletons(const Cmtg& graph, const SkeletonGenConfig& config,
                                             const std::vector<std::string>& robot_slots);

std::string to_string(const TaskSkeleton& skeleton);

}  // namespace gtamp
