#include "gtamp/skeleton_ilp.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

namespace gtamp {

std::vector<int> IlpModel::selection_vars() const {
  std::vector<int> out;
  out.reserve(actions.size() * static_cast<std::size_t>(horizon));
  for (int a = 0; a < static_cast<int>(actions.size()); ++a) {
    for (int t = 1; t <= horizon; ++t) out.push_back(action_var(a, t));
  }
  return out;
}

namespace {

std::string var_name(const IlpModel& m, int v) {
  const IlpVar& var = m.vars[static_cast<std::size_t>(v)];
  std::ostringstream os;
  if (var.kind == IlpVar::Kind::kAction) os << "xa" << var.action << "_t" << var.step;
  else os << "xb" << var.block << "_t" << var.step;
  return os.str();
}

}  // namespace

std::string IlpModel::to_lp() const {
  std::ostringstream os;
  os << "\\ skeleton model, horizon " << horizon << ", big_m " << big_m << "\n";
  for (std::size_t a = 0; a < actions.size(); ++a) os << "\\ a" << a << " = " << to_string(actions[a]) << "\n";
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    os << "\\ b" << b << " = a" << blocks[b].action << " blocked by " << blocks[b].blocker
       << (blocks[b].blocks_pick ? " (pick)" : "") << (blocks[b].blocks_place ? " (place)" : "") << "\n";
  }
  auto write_terms = [&](const std::vector<LinearTerm>& terms) {
    if (terms.empty()) {
      os << " 0 " << var_name(*this, 0);
      return;
    }
    for (const LinearTerm& t : terms) {
      os << (t.coef < 0 ? " - " : " + ");
      if (std::labs(t.coef) != 1) os << std::labs(t.coef) << " ";
      os << var_name(*this, t.var);
    }
  };
  os << "Minimize\n obj:";
  std::vector<LinearTerm> obj;
  for (int v : program.objective_vars) obj.push_back({v, 1});
  write_terms(obj);
  os << "\nSubject To\n";
  std::map<int, int> counters;
  for (const LinearConstraint& c : program.constraints) {
    os << " "
       << (c.family == 0 ? std::string("cut") : c.family == kImpliedFamily ? std::string("imp") : c.family == kExclusionFamily ? std::string("excl") : "c" + std::to_string(c.family)) << "_" << counters[c.family]++ << ":";
    write_terms(c.terms);
    os << (c.sense == Sense::kLe ? " <= " : c.sense == Sense::kGe ? " >= " : " = ") << c.rhs << "\n";
  }
  os << "Binary\n";
  for (int v = 0; v < program.num_vars; ++v) os << " " << var_name(*this, v) << "\n";
  os << "End\n";
  return os.str();
}

IlpModel build_model(const Cmtg& graph, int horizon, FamilyMask omit) {
  if (horizon < 1) throw std::invalid_argument("build_model: horizon must be >= 1");
  IlpModel m;
  m.horizon = horizon;
  m.targets = graph.targets;
  const int T = horizon;

  // Target actions first so the search commits to required moves early.
  for (const PartialAction& a : graph.action_nodes) {
    if (graph.targets.contains(a.object)) m.actions.push_back(a);
  }
  for (const PartialAction& a : graph.action_nodes) {
    if (!graph.targets.contains(a.object)) m.actions.push_back(a);
  }
  std::map<PartialAction, int> action_index;
  std::map<std::string, std::vector<int>> actions_by_object;
  std::set<std::string> robots;
  for (int i = 0; i < static_cast<int>(m.actions.size()); ++i) {
    const PartialAction& a = m.actions[static_cast<std::size_t>(i)];
    action_index[a] = i;
    actions_by_object[a.object].push_back(i);
    robots.insert(a.pick_robot);
    robots.insert(a.place_robot);
  }
  m.robots.assign(robots.begin(), robots.end());

  std::map<BlockEdge, int> block_index;
  auto add_block = [&](const BlockEdge& e, bool pick) {
    auto [it, inserted] = block_index.emplace(e, static_cast<int>(m.blocks.size()));
    if (inserted) m.blocks.push_back({action_index.at(e.first), e.second, false, false});
    IlpBlock& b = m.blocks[static_cast<std::size_t>(it->second)];
    (pick ? b.blocks_pick : b.blocks_place) = true;
  };
  for (const BlockEdge& e : graph.block_pick_edges) add_block(e, true);
  for (const BlockEdge& e : graph.block_place_edges) add_block(e, false);

  const int n_actions = static_cast<int>(m.actions.size());
  const int n_blocks = static_cast<int>(m.blocks.size());
  for (int a = 0; a < n_actions; ++a) {
    for (int t = 1; t <= T; ++t) m.vars.push_back({IlpVar::Kind::kAction, a, -1, t});
  }
  for (int b = 0; b < n_blocks; ++b) {
    for (int t = 1; t <= T; ++t) m.vars.push_back({IlpVar::Kind::kBlock, m.blocks[static_cast<std::size_t>(b)].action, b, t});
  }
  m.program.num_vars = static_cast<int>(m.vars.size());
  // Decide which actions are selected before when they happen; obstacles are
  // first tried unmoved.
  for (int a = 0; a < n_actions; ++a) {
    const bool target = graph.targets.contains(m.actions[static_cast<std::size_t>(a)].object);
    m.program.branch_order.push_back({m.action_var(a, 1), static_cast<std::int8_t>(target ? 1 : 0)});
  }
  for (int a = 0; a < n_actions; ++a) {
    for (int t = 2; t <= T; ++t) m.program.branch_order.push_back({m.action_var(a, t), 1});
  }
  for (int a = 0; a < n_actions; ++a) m.program.objective_vars.push_back(m.action_var(a, 1));
  m.big_m = static_cast<long>(T) * n_actions + 1;

  auto& cons = m.program.constraints;
  auto emit = [&](int family, std::vector<LinearTerm> terms, Sense sense, long rhs) {
    if (!omit.test(static_cast<std::size_t>(family))) cons.push_back({std::move(terms), sense, rhs, family});
  };
  auto object_actions = [&](const std::string& obj) -> const std::vector<int>& {
    static const std::vector<int> kNone;
    auto it = actions_by_object.find(obj);
    return it == actions_by_object.end() ? kNone : it->second;
  };

  // (1) X^t >= X^{t+1}
  for (int a = 0; a < n_actions; ++a) {
    for (int t = 1; t < T; ++t) emit(1, {{m.action_var(a, t), 1}, {m.action_var(a, t + 1), -1}}, Sense::kGe, 0);
  }
  // (2) block variables follow their action
  for (int b = 0; b < n_blocks; ++b) {
    const int a = m.blocks[static_cast<std::size_t>(b)].action;
    for (int t = 1; t <= T; ++t) emit(2, {{m.action_var(a, t), 1}, {m.block_var(b, t), -1}}, Sense::kEq, 0);
  }
  // (3) a non-target moves at t only if something it blocks is live at t
  for (const std::string& obj : graph.object_nodes) {
    if (graph.targets.contains(obj)) continue;
    for (int a : object_actions(obj)) {
      for (int t = 1; t <= T; ++t) {
        std::vector<LinearTerm> terms{{m.action_var(a, t), 1}};
        for (int b = 0; b < n_blocks; ++b) {
          if (m.blocks[static_cast<std::size_t>(b)].blocker == obj) terms.push_back({m.block_var(b, t), -1});
        }
        emit(3, std::move(terms), Sense::kLe, 0);
      }
    }
  }
  // (4) each robot does at most one action at the last step
  for (const std::string& r : m.robots) {
    std::vector<LinearTerm> terms;
    for (int a = 0; a < n_actions; ++a) {
      if (m.actions[static_cast<std::size_t>(a)].uses(r)) terms.push_back({m.action_var(a, T), 1});
    }
    emit(4, std::move(terms), Sense::kLe, 1);
  }
  // (5) something happens at the last step
  {
    std::vector<LinearTerm> terms;
    for (int a = 0; a < n_actions; ++a) terms.push_back({m.action_var(a, T), 1});
    emit(5, std::move(terms), Sense::kGe, 1);
  }
  // (6) each robot does at most one action per earlier step
  for (const std::string& r : m.robots) {
    for (int t = 1; t < T; ++t) {
      std::vector<LinearTerm> terms;
      for (int a = 0; a < n_actions; ++a) {
        if (!m.actions[static_cast<std::size_t>(a)].uses(r)) continue;
        terms.push_back({m.action_var(a, t), 1});
        terms.push_back({m.action_var(a, t + 1), -1});
      }
      emit(6, std::move(terms), Sense::kLe, 1);
    }
  }
  // (7) something happens at every earlier step
  for (int t = 1; t < T; ++t) {
    std::vector<LinearTerm> terms;
    for (int a = 0; a < n_actions; ++a) {
      terms.push_back({m.action_var(a, t), 1});
      terms.push_back({m.action_var(a, t + 1), -1});
    }
    emit(7, std::move(terms), Sense::kGe, 1);
  }
  // (8) every target is moved
  for (const std::string& obj : graph.targets) {
    std::vector<LinearTerm> terms;
    for (int a : object_actions(obj)) terms.push_back({m.action_var(a, 1), 1});
    emit(8, std::move(terms), Sense::kEq, 1);
  }
  // (9) blockers of selected actions are moved
  for (int b = 0; b < n_blocks; ++b) {
    std::vector<LinearTerm> terms;
    for (int a : object_actions(m.blocks[static_cast<std::size_t>(b)].blocker)) terms.push_back({m.action_var(a, 1), 1});
    terms.push_back({m.block_var(b, 1), -1});
    emit(9, std::move(terms), Sense::kGe, 0);
  }
  // (10) each object is moved at most once
  for (const std::string& obj : graph.object_nodes) {
    std::vector<LinearTerm> terms;
    for (int a : object_actions(obj)) terms.push_back({m.action_var(a, 1), 1});
    if (!terms.empty()) emit(10, std::move(terms), Sense::kLe, 1);
  }
  // (11)/(12) blockers move strictly (pick) or weakly (place) earlier:
  //   sum_t X^t_b - sum_{a',t} X^t_{M,a'} >= gap - big_m * (1 - X^1_b)
  for (int b = 0; b < n_blocks; ++b) {
    const IlpBlock& blk = m.blocks[static_cast<std::size_t>(b)];
    for (const auto& [family, gap, active] : {std::tuple{11, 1L, blk.blocks_pick}, std::tuple{12, 0L, blk.blocks_place}}) {
      if (!active) continue;
      std::vector<LinearTerm> terms{{m.block_var(b, 1), 1 - m.big_m}};
      for (int t = 2; t <= T; ++t) terms.push_back({m.block_var(b, t), 1});
      for (int a : object_actions(blk.blocker)) {
        for (int t = 1; t <= T; ++t) terms.push_back({m.action_var(a, t), -1});
      }
      emit(family, std::move(terms), Sense::kGe, gap - m.big_m);
    }
  }

  // Implied: summing (6) over t and adding (4) telescopes to a robot's total.
  if (!omit.test(4) && !omit.test(6)) {
    for (const std::string& r : m.robots) {
      std::vector<LinearTerm> terms;
      for (int a = 0; a < n_actions; ++a) {
        if (m.actions[static_cast<std::size_t>(a)].uses(r)) terms.push_back({m.action_var(a, 1), 1});
      }
      emit(kImpliedFamily, std::move(terms), Sense::kLe, T);
    }
  }
  // Implied: with prefix-closed variables, "blocker still unmoved before t"
  // forces the blocked action to happen after t (pick) or at t at the latest
  // (place):  sum_a' X^t_{M,a'} + X^1_b - X^{t+gap}_b <= 1.
  for (int b = 0; b < n_blocks; ++b) {
    const IlpBlock& blk = m.blocks[static_cast<std::size_t>(b)];
    for (const auto& [family, gap, active] : {std::tuple{11, 1, blk.blocks_pick}, std::tuple{12, 0, blk.blocks_place}}) {
      if (!active || omit.test(1) || omit.test(2) || omit.test(10) || omit.test(static_cast<std::size_t>(family))) {
        continue;
      }
      for (int t = 1; t <= T; ++t) {
        std::vector<LinearTerm> terms;
        for (int a : object_actions(blk.blocker)) terms.push_back({m.action_var(a, t), 1});
        if (terms.empty()) continue;
        terms.push_back({m.block_var(b, 1), 1});
        if (t + gap <= T) {
          if (t + gap == 1) {
            terms.back().coef = 0;  // X^1_b - X^1_b cancels
          } else {
            terms.push_back({m.block_var(b, t + gap), -1});
          }
        }
        std::erase_if(terms, [](const LinearTerm& lt) { return lt.coef == 0; });
        emit(kImpliedFamily, std::move(terms), Sense::kLe, 1);
      }
    }
  }
  return m;
}

void add_exclusions(IlpModel& model, const std::set<ActionPair>& pairs) {
  if (pairs.empty()) return;
  std::map<PartialAction, int> index;
  for (int a = 0; a < static_cast<int>(model.actions.size()); ++a) index[model.actions[static_cast<std::size_t>(a)]] = a;
  const int T = model.horizon;
  for (const auto& [first, second] : pairs) {
    auto ia = index.find(first);
    auto ib = index.find(second);
    if (ia == index.end() || ib == index.end() || ia->second == ib->second) continue;
    for (int t = 1; t <= T; ++t) {
      std::vector<LinearTerm> terms;
      for (int a : {ia->second, ib->second}) {
        terms.push_back({model.action_var(a, t), 1});
        if (t < T) terms.push_back({model.action_var(a, t + 1), -1});
      }
      model.program.constraints.push_back({std::move(terms), Sense::kLe, 1, kExclusionFamily});
    }
  }
}

std::optional<IlpSolution> solve(const IlpModel& model, const SolveLimits& limits) {
  auto sol = solve_binary(model.program, limits);
  if (!sol) return std::nullopt;
  return IlpSolution{std::move(sol->values), sol->objective};
}

std::vector<IlpSolution> enumerate(const IlpModel& model, int k, const SolveLimits& limits) {
  if (k < 1) throw std::invalid_argument("enumerate: k must be >= 1");
  std::vector<IlpSolution> out;
  BinaryProgram program = model.program;
  const std::vector<int> selection = model.selection_vars();
  while (static_cast<int>(out.size()) < k) {
    auto sol = solve_binary(program, limits);
    if (!sol) break;
    program.constraints.push_back(no_good_cut(selection, sol->values));
    out.push_back({std::move(sol->values), sol->objective});
  }
  return out;
}

std::vector<PartialAction> JointStep::actions() const {
  std::vector<PartialAction> out;
  for (const auto& slot : slots) {
    if (slot && std::find(out.begin(), out.end(), *slot) == out.end()) out.push_back(*slot);
  }
  return out;
}

TaskSkeleton decode(const IlpSolution& solution, const IlpModel& model, const Cmtg& graph,
                    const std::vector<std::string>& robot_slots) {
  const int T = model.horizon;
  const auto& x = solution.assignment;
  if (x.size() != model.vars.size()) throw DecodeViolation("assignment size does not match the model");
  auto value = [&](int v) { return x[static_cast<std::size_t>(v)]; };

  std::map<std::string, std::size_t> slot_of;
  for (std::size_t i = 0; i < robot_slots.size(); ++i) slot_of[robot_slots[i]] = i;

  TaskSkeleton sk;
  sk.steps.assign(static_cast<std::size_t>(T), JointStep{std::vector<std::optional<PartialAction>>(robot_slots.size())});
  std::map<std::string, int> step_of_object;
  for (int a = 0; a < static_cast<int>(model.actions.size()); ++a) {
    int step = 0;
    for (int t = 1; t <= T; ++t) {
      if (value(model.action_var(a, t)) == 1) {
        if (step != t - 1) throw DecodeViolation("selection variables are not prefix-closed");
        step = t;
      }
    }
    if (step == 0) continue;
    const PartialAction& action = model.actions[static_cast<std::size_t>(a)];
    if (!step_of_object.emplace(action.object, step).second) {
      throw DecodeViolation("object '" + action.object + "' moved more than once");
    }
    for (const std::string& r : {action.pick_robot, action.place_robot}) {
      auto it = slot_of.find(r);
      if (it == slot_of.end()) throw DecodeViolation("unknown robot '" + r + "'");
      auto& slot = sk.steps[static_cast<std::size_t>(step - 1)].slots[it->second];
      if (slot && *slot != action) {
        throw DecodeViolation("robot '" + r + "' has two actions at step " + std::to_string(step));
      }
      slot = action;
    }
    sk.moved_objects.insert(action.object);
  }
  for (int t = 0; t < T; ++t) {
    if (sk.steps[static_cast<std::size_t>(t)].actions().empty()) {
      throw DecodeViolation("step " + std::to_string(t + 1) + " is empty");
    }
  }
  // Blockers of every selected action must move first (pick) or no later (place).
  auto check = [&](const std::set<BlockEdge>& edges, bool strict) {
    for (const auto& [action, blocker] : edges) {
      auto it = step_of_object.find(action.object);
      if (it == step_of_object.end()) continue;
      bool selected = false;
      for (const auto& a : sk.steps[static_cast<std::size_t>(it->second - 1)].actions()) selected |= a == action;
      if (!selected) continue;
      auto bt = step_of_object.find(blocker);
      if (bt == step_of_object.end() || (strict ? bt->second >= it->second : bt->second > it->second)) {
        throw DecodeViolation("blocker '" + blocker + "' not moved in time for " + to_string(action));
      }
    }
  };
  check(graph.block_pick_edges, true);
  check(graph.block_place_edges, false);
  if (static_cast<long>(sk.moved_objects.size()) != solution.objective_value) {
    throw DecodeViolation("objective does not match the number of moved objects");
  }
  return sk;
}

int horizon_lower_bound(std::size_t targets, std::size_t robots) {
  if (robots == 0) return 1;
  return std::max<int>(1, static_cast<int>((targets + robots - 1) / robots));
}

std::vector<TaskSkeleton> generate_skeletons(const Cmtg& graph, const SkeletonGenConfig& config,
                                             const std::vector<std::string>& robot_slots) {
  if (config.t_max < 1 || config.max_skeletons < 1) throw std::invalid_argument("invalid skeleton config");
  std::vector<TaskSkeleton> out;
  const SolveLimits limits{config.node_limit, config.deadline};
  for (int T = horizon_lower_bound(graph.targets.size(), robot_slots.size());
       T <= config.t_max && static_cast<int>(out.size()) < config.max_skeletons; ++T) {
    if (std::chrono::steady_clock::now() >= config.deadline) break;
    IlpModel model = build_model(graph, T);
    add_exclusions(model, config.exclusive);
    BinaryProgram program = model.program;
    const std::vector<int> selection = model.selection_vars();
    while (static_cast<int>(out.size()) < config.max_skeletons) {
      std::optional<BinarySolution> sol;
      try {
        sol = solve_binary(program, limits);
      } catch (const SolverLimitReached&) {
        break;
      }
      if (!sol) break;
      program.constraints.push_back(no_good_cut(selection, sol->values));
      TaskSkeleton sk = decode(IlpSolution{std::move(sol->values), sol->objective}, model, graph, robot_slots);
      if (std::find(out.begin(), out.end(), sk) == out.end()) out.push_back(std::move(sk));
    }
  }
  if (out.empty()) throw EmptySkeletonSet("no task skeleton within horizon " + std::to_string(config.t_max));
  return out;
}

std::string to_string(const TaskSkeleton& skeleton) {
  std::ostringstream os;
  for (std::size_t t = 0; t < skeleton.steps.size(); ++t) {
    os << "t" << (t + 1) << ":";
    for (const auto& a : skeleton.steps[t].actions()) os << " " << to_string(a);
    os << "\n";
  }
  return os.str();
}

}  // namespace gtamp
