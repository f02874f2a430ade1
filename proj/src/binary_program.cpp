#include "gtamp/binary_program.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <limits>

namespace gtamp {

long LinearConstraint::activity(std::span<const std::int8_t> values) const {
  long sum = 0;
  for (const LinearTerm& t : terms) sum += t.coef * values[static_cast<std::size_t>(t.var)];
  return sum;
}

bool LinearConstraint::satisfied_by(std::span<const std::int8_t> values) const {
  const long a = activity(values);
  switch (sense) {
    case Sense::kLe: return a <= rhs;
    case Sense::kGe: return a >= rhs;
    case Sense::kEq: return a == rhs;
  }
  return false;
}

bool BinaryProgram::feasible(std::span<const std::int8_t> values) const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [&](const LinearConstraint& c) { return c.satisfied_by(values); });
}

long BinaryProgram::objective(std::span<const std::int8_t> values) const {
  long sum = 0;
  for (int v : objective_vars) sum += values[static_cast<std::size_t>(v)];
  return sum;
}

LinearConstraint no_good_cut(std::span<const int> vars, std::span<const std::int8_t> solution) {
  LinearConstraint cut;
  cut.sense = Sense::kGe;
  cut.rhs = 1;
  for (int v : vars) {
    if (solution[static_cast<std::size_t>(v)] == 1) {
      cut.terms.push_back({v, -1});
      cut.rhs -= 1;
    } else {
      cut.terms.push_back({v, 1});
    }
  }
  return cut;
}

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const BinaryProgram& p, const SolveLimits& limits) : p_(p), limits_(limits) {
    const auto n = static_cast<std::size_t>(p.num_vars);
    const std::size_t m = p.constraints.size();
    value_.assign(n, -1);
    occurs_.resize(n);
    min_act_.assign(m, 0);
    max_act_.assign(m, 0);
    max_abs_.assign(m, 0);
    queued_.assign(m, 0);
    for (std::size_t c = 0; c < m; ++c) {
      for (const LinearTerm& t : p.constraints[c].terms) {
        occurs_[static_cast<std::size_t>(t.var)].push_back({static_cast<int>(c), t.coef});
        min_act_[c] += std::min(t.coef, 0L);
        max_act_[c] += std::max(t.coef, 0L);
        max_abs_[c] = std::max(max_abs_[c], std::labs(t.coef));
      }
    }
    std::vector<char> listed(n, 0);
    for (const BranchStep& b : p.branch_order) {
      const auto v = static_cast<std::size_t>(b.var);
      if (v >= n || listed[v]) throw std::invalid_argument("branch order repeats or exceeds variables");
      listed[v] = 1;
      order_.push_back(b);
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (!listed[v]) order_.push_back({static_cast<int>(v), 1});
    }
    is_objective_.assign(n, 0);
    for (int v : p.objective_vars) is_objective_[static_cast<std::size_t>(v)] = 1;
    find_cover_groups();
  }

  std::optional<BinarySolution> run(SolveStats* stats) {
    for (std::size_t c = 0; c < p_.constraints.size(); ++c) enqueue(static_cast<int>(c));
    if (propagate()) search(0);
    if (stats != nullptr) stats->nodes = nodes_;
    if (!found_) return std::nullopt;
    return BinarySolution{best_values_, best_};
  }

 private:
  // Disjoint "at least rhs of these objective vars" constraints give an
  // objective lower bound of sum max(ones in group, rhs).
  void find_cover_groups() {
    group_of_.assign(static_cast<std::size_t>(p_.num_vars), -1);
    for (const LinearConstraint& c : p_.constraints) {
      if (c.sense == Sense::kLe || c.rhs < 1 || c.terms.empty()) continue;
      const bool usable = std::all_of(c.terms.begin(), c.terms.end(), [&](const LinearTerm& t) {
        return t.coef == 1 && is_objective_[static_cast<std::size_t>(t.var)] &&
               group_of_[static_cast<std::size_t>(t.var)] == -1;
      });
      if (!usable) continue;
      const int g = static_cast<int>(group_rhs_.size());
      group_rhs_.push_back(c.rhs);
      group_ones_.push_back(0);
      for (const LinearTerm& t : c.terms) group_of_[static_cast<std::size_t>(t.var)] = g;
      bound_ += c.rhs;
    }
  }

  void count_objective(int var, int delta) {
    const auto v = static_cast<std::size_t>(var);
    if (!is_objective_[v]) return;
    const int g = group_of_[v];
    if (g < 0) {
      bound_ += delta;
      return;
    }
    const auto gi = static_cast<std::size_t>(g);
    bound_ -= std::max(group_ones_[gi], group_rhs_[gi]);
    group_ones_[gi] += delta;
    bound_ += std::max(group_ones_[gi], group_rhs_[gi]);
  }

  void enqueue(int c) {
    if (!queued_[static_cast<std::size_t>(c)]) {
      queued_[static_cast<std::size_t>(c)] = 1;
      queue_.push_back(c);
    }
  }

  void assign(int var, std::int8_t x) {
    const auto v = static_cast<std::size_t>(var);
    value_[v] = x;
    trail_.push_back(var);
    for (const auto& [c, a] : occurs_[v]) {
      const auto ci = static_cast<std::size_t>(c);
      if (x == 1) {
        min_act_[ci] += std::max(a, 0L);
        max_act_[ci] += std::min(a, 0L);
      } else {
        min_act_[ci] -= std::min(a, 0L);
        max_act_[ci] -= std::max(a, 0L);
      }
      enqueue(c);
    }
    if (x == 1) count_objective(var, +1);
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      const int var = trail_.back();
      trail_.pop_back();
      const auto v = static_cast<std::size_t>(var);
      const std::int8_t x = value_[v];
      for (const auto& [c, a] : occurs_[v]) {
        const auto ci = static_cast<std::size_t>(c);
        if (x == 1) {
          min_act_[ci] -= std::max(a, 0L);
          max_act_[ci] -= std::min(a, 0L);
        } else {
          min_act_[ci] += std::min(a, 0L);
          max_act_[ci] += std::max(a, 0L);
        }
      }
      if (x == 1) count_objective(var, -1);
      value_[v] = -1;
    }
  }

  void clear_queue() {
    for (int c : queue_) queued_[static_cast<std::size_t>(c)] = 0;
    queue_.clear();
  }

  bool propagate() {
    while (!queue_.empty()) {
      const int c = queue_.back();
      queue_.pop_back();
      const auto ci = static_cast<std::size_t>(c);
      queued_[ci] = 0;
      const LinearConstraint& con = p_.constraints[ci];
      const bool upper = con.sense != Sense::kGe;
      const bool lower = con.sense != Sense::kLe;
      if ((upper && min_act_[ci] > con.rhs) || (lower && max_act_[ci] < con.rhs)) {
        clear_queue();
        return false;
      }
      if (upper && max_abs_[ci] > con.rhs - min_act_[ci]) {
        for (const LinearTerm& t : con.terms) {
          if (value_[static_cast<std::size_t>(t.var)] != -1) continue;
          const long slack = con.rhs - min_act_[ci];
          if (t.coef > slack) assign(t.var, 0);
          else if (-t.coef > slack) assign(t.var, 1);
        }
        if (min_act_[ci] > con.rhs) {
          clear_queue();
          return false;
        }
      }
      if (lower && max_abs_[ci] > max_act_[ci] - con.rhs) {
        for (const LinearTerm& t : con.terms) {
          if (value_[static_cast<std::size_t>(t.var)] != -1) continue;
          const long slack = max_act_[ci] - con.rhs;
          if (t.coef > slack) assign(t.var, 1);
          else if (-t.coef > slack) assign(t.var, 0);
        }
        if (max_act_[ci] < con.rhs) {
          clear_queue();
          return false;
        }
      }
    }
    return true;
  }

  void search(int from) {
    ++nodes_;
    if (limits_.node_limit > 0 && nodes_ > limits_.node_limit) {
      throw SolverLimitReached("branch and bound node limit reached");
    }
    if ((nodes_ & 1023) == 1 && std::chrono::steady_clock::now() >= limits_.deadline) {
      throw SolverLimitReached("branch and bound deadline reached");
    }
    if (found_ && bound_ >= best_) return;
    std::size_t pos = static_cast<std::size_t>(from);
    while (pos < order_.size() && value_[static_cast<std::size_t>(order_[pos].var)] != -1) ++pos;
    if (pos == order_.size()) {
      found_ = true;
      best_ = bound_;
      best_values_ = value_;
      return;
    }
    const auto [var, first] = order_[pos];
    for (const std::int8_t x : {first, static_cast<std::int8_t>(1 - first)}) {
      const std::size_t mark = trail_.size();
      assign(var, x);
      if (propagate()) search(static_cast<int>(pos) + 1);
      undo_to(mark);
      if (found_ && bound_ >= best_) return;
    }
  }

  const BinaryProgram& p_;
  SolveLimits limits_;
  std::vector<std::int8_t> value_;
  std::vector<BranchStep> order_;
  std::vector<std::vector<std::pair<int, long>>> occurs_;
  std::vector<long> min_act_, max_act_, max_abs_;
  std::vector<char> queued_;
  std::vector<int> queue_;
  std::vector<int> trail_;
  std::vector<char> is_objective_;
  std::vector<int> group_of_;
  std::vector<long> group_rhs_, group_ones_;
  long bound_ = 0;
  long nodes_ = 0;
  bool found_ = false;
  long best_ = std::numeric_limits<long>::max();
  std::vector<std::int8_t> best_values_;
};

}  // namespace

std::optional<BinarySolution> solve_binary(const BinaryProgram& program, const SolveLimits& limits,
                                           SolveStats* stats) {
  BranchAndBound bb(program, limits);
  return bb.run(stats);
}

}  // namespace gtamp
