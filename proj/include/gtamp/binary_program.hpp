#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtamp {

enum class Sense { kLe, kGe, kEq };

struct LinearTerm {
  int var = 0;
  long coef = 0;
};

struct LinearConstraint {
  std::vector<LinearTerm> terms;
  Sense sense = Sense::kGe;
  long rhs = 0;
  /// Origin label; the skeleton model uses 1..13 for its constraint
  /// families and 0 for enumeration cuts.
  int family = 0;

  long activity(std::span<const std::int8_t> values) const;
  bool satisfied_by(std::span<const std::int8_t> values) const;
};

/// Pure 0-1 linear program: minimize the number of ones among
/// `objective_vars` subject to `constraints`.
struct BranchStep {
  int var = 0;
  std::int8_t first = 1;  // value tried first
};

struct BinaryProgram {
  int num_vars = 0;
  std::vector<LinearConstraint> constraints;
  std::vector<int> objective_vars;
  /// Branching order; variables not listed follow in index order, 1 first.
  std::vector<BranchStep> branch_order;

  bool feasible(std::span<const std::int8_t> values) const;
  long objective(std::span<const std::int8_t> values) const;
};

struct BinarySolution {
  std::vector<std::int8_t> values;
  long objective = 0;
};

struct SolveLimits {
  /// Search nodes before giving up; <= 0 means unlimited.
  long node_limit = 0;
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
};

struct SolveStats {
  long nodes = 0;
};

class SolverLimitReached : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact depth-first branch and bound. Variables are branched in
/// `branch_order`, then index order, with bound propagation on every constraint and pruning on
/// an objective lower bound. Returns nullopt iff the program is infeasible.
/// Throws SolverLimitReached when the node budget or the deadline runs out.
std::optional<BinarySolution> solve_binary(const BinaryProgram& program, const SolveLimits& limits = {},
                                           SolveStats* stats = nullptr);

/// Constraint excluding `solution` restricted to `vars`:
/// sum_{v*=1} (1 - v) + sum_{v*=0} v >= 1.
LinearConstraint no_good_cut(std::span<const int> vars, std::span<const std::int8_t> solution);

}  // namespace gtamp
