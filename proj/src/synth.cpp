#include "emdp/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "emdp/digraph.hpp"
#include "emdp/machines.hpp"
#include "emdp/ratlp.hpp"

namespace emdp {

namespace {

const DistributionTable& table_of(const MachinePtr& m) {
  const auto* table = dynamic_cast<const TableMachine*>(m.get());
  if (!table) throw std::logic_error("expected a memoryless table strategy");
  return table->table();
}

std::int64_t ceil_int(const Rational& q) { return to_int64(ceil_div(q)); }

std::optional<std::int64_t> max_finite(const LevelMap& levels) {
  std::optional<std::int64_t> best;
  for (const auto& l : levels) {
    if (l.is_finite() && (!best || l.value() > *best)) best = l.value();
  }
  return best;
}

Rational reward_range(const Emdp& e) { return max_reward(e) - min_reward(e); }

std::vector<bool> only(std::size_t n, StateId s) {
  std::vector<bool> mask(n, false);
  mask[s] = true;
  return mask;
}

Rational max_expected_steps(const Emdp& e, const std::vector<bool>& target) {
  const auto reach = reach_strategy(e, target);
  return *std::max_element(reach.expected_steps.begin(), reach.expected_steps.end());
}

struct SpParts {
  LevelMap safe_levels;
  LevelMap pump_levels;
  FlowSolution flow;
  Core core;
};

SpParts sp_parts(const Emdp& e) {
  if (classify(e) != Classification::SpEmdp) throw NotSpEmdp("model is not an SP-EMDP");
  SpParts p;
  p.safe_levels = min_safe(e);
  if (!max_finite(p.safe_levels)) throw NotSpEmdp("SP-EMDP without a safe configuration");
  p.pump_levels = min_pump(e);
  p.flow = solve_flow(e, ProgramKind::Payoff);
  p.core = find_core(e, p.flow);
  return p;
}

MachinePtr make_type1(const Emdp& e, const TypeICore& core, const LevelMap& mp) {
  const auto tp = threshold_params(e, mp);
  return std::make_shared<SwitchingMachine>(table_of(pumping_strategy(e, mp)),
                                            mu_table(e, core.c), tp.low, tp.high);
}

MachinePtr make_staged(const Emdp& e, const TypeIICore& core, const LevelMap& mp,
                       std::optional<std::int64_t> cap) {
  const auto p = type2_params(e, core, mp);
  StagedMachine::Params params;
  params.steps1 = to_int64(mpz_class(p.p1 * p.period));
  params.steps2 = to_int64(mpz_class(p.p2 * p.period));
  params.period = p.period;
  params.anchor = p.anchor;
  params.threshold = p.threshold;
  params.stage_cap = cap;
  const auto kappa = reach_strategy(e, only(e.num_states(), p.anchor));
  return std::make_shared<StagedMachine>(mu_table(e, core.c1), mu_table(e, core.c2),
                                         table_of(kappa.machine),
                                         table_of(pumping_strategy(e, mp)), params);
}

MachinePtr sp_machine(const Emdp& e, const Rational& eps) {
  const auto p = sp_parts(e);
  if (const auto* one = std::get_if<TypeICore>(&p.core)) return make_type1(e, *one, p.pump_levels);
  const auto& two = std::get<TypeIICore>(p.core);
  return make_staged(e, two, p.pump_levels, stage_cap(e, two, eps));
}

Rational trend_optimum(const Emdp& e) {
  try {
    return solve_flow(e, ProgramKind::Trend).objective_value;
  } catch (const InfeasibleFlow&) {
    throw NotApplicable("no flow with non-negative trend");
  }
}

struct CaseABuild {
  CaseAPlan plan;
  MachinePtr machine;  // unguarded time share
};

CaseABuild build_case_a(const Emdp& e, const Rational& eps) {
  if (!is_strongly_connected(e)) throw NotApplicable("model is not strongly connected");
  CaseAPlan plan;
  const auto trend_flow = [&] {
    try {
      return solve_flow(e, ProgramKind::Trend);
    } catch (const InfeasibleFlow&) {
      throw NotApplicable("no flow with non-negative trend");
    }
  }();
  plan.g_star = trend_flow.objective_value;
  if (plan.g_star <= 0) throw NotApplicable("optimal trend is not positive");
  const auto payoff = solve_flow(e, ProgramKind::Payoff);
  plan.f_star = payoff.objective_value;

  std::vector<Component> candidates;
  const auto add = [&](const Component& c) {
    if (std::find(candidates.begin(), candidates.end(), c) == candidates.end()) {
      candidates.push_back(c);
    }
  };
  const auto core = find_core(e, payoff);
  if (const auto* one = std::get_if<TypeICore>(&core)) {
    add(one->c);
  } else {
    add(std::get<TypeIICore>(core).c1);
    add(std::get<TypeIICore>(core).c2);
  }
  for (const auto& d : components(e, trend_flow)) {
    if (d.trend >= plan.g_star) {
      add(d);
      break;
    }
  }

  // Weights maximizing the trend while keeping the payoff within eps / 2 of f*.
  LinearProgram lp;
  lp.sense = Sense::Maximize;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    lp.add_variable("alpha" + std::to_string(j), candidates[j].trend);
  }
  auto& mass = lp.add_constraint(Relation::Equal, 1, "mass");
  mass.coefficients.assign(candidates.size(), Rational(1));
  auto& pay = lp.add_constraint(Relation::GreaterEq, plan.f_star - eps / 2, "payoff");
  for (std::size_t j = 0; j < candidates.size(); ++j) pay.coefficients[j] = candidates[j].mp;
  const auto out = solve_lp(lp);
  const auto* opt = std::get_if<LpOptimal>(&out);
  if (!opt || opt->value <= 0) throw std::logic_error("no positive-trend mixture found");

  std::vector<DistributionTable> tables;
  Rational steps = 0;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (opt->assignment[j] <= 0) continue;
    plan.components.push_back(candidates[j]);
    plan.alpha.push_back(opt->assignment[j]);
    tables.push_back(mu_table(e, candidates[j]));
    std::vector<bool> target(e.num_states(), false);
    for (StateId s : candidates[j].states) target[s] = true;
    steps = std::max(steps, max_expected_steps(e, target));
  }
  plan.mp = 0;
  plan.trend = 0;
  for (std::size_t j = 0; j < plan.components.size(); ++j) {
    plan.mp += plan.alpha[j] * plan.components[j].mp;
    plan.trend += plan.alpha[j] * plan.components[j].trend;
  }

  // Each phase pays at most one approach of expected length `steps`: the block must absorb
  // its energy cost with the mixture trend and its payoff cost within eps / 4.
  const Rational k = static_cast<long>(plan.components.size());
  const Rational me = static_cast<long>(max_update(e));
  const std::int64_t block = std::max<std::int64_t>(
      {1, ceil_int(k * (2 * me * steps + 1) / plan.trend),
       ceil_int(4 * k * reward_range(e) * steps / eps)});
  for (const auto& a : plan.alpha) plan.counts.push_back(ceil_int(a * block));
  plan.block = 0;
  for (auto c : plan.counts) plan.block += c;
  return {plan, std::make_shared<TimeShareMachine>(std::move(tables), plan.counts)};
}

struct CaseBBuild {
  CaseBResult result;
  MachinePtr machine;  // null when the value is -inf
  Rational reach_steps;
};

CaseBBuild build_case_b(const Emdp& e) {
  if (!is_strongly_connected(e)) throw NotApplicable("model is not strongly connected");
  if (trend_optimum(e) != 0) throw NotApplicable("optimal trend is not zero");
  const std::size_t n = e.num_states();
  CaseBBuild out;
  out.result.band = static_cast<std::int64_t>(n) * max_update(e);
  const Rational sink = min_reward(e) - 1;
  const auto u = unfold(e, 0, out.result.band, sink);
  const auto sol = solve_mean_payoff(u.mdp);
  std::size_t best = 0;
  for (std::size_t i = 1; i < u.sink; ++i) {
    if (sol.value[i] > sol.value[best]) best = i;
  }
  out.result.reference = u.configuration(best);
  if (sol.value[best] > sink) out.result.value = sol.value[best];
  if (!out.result.value) return out;

  DistributionTable replay(u.sink);
  for (std::size_t i = 0; i < u.sink; ++i) {
    if (!u.mdp.is_stochastic(i)) replay[i] = Distribution::dirac(u.origin[sol.policy[i]]);
  }
  const auto reach = reach_strategy(e, only(n, out.result.reference.state));
  out.reach_steps =
      *std::max_element(reach.expected_steps.begin(), reach.expected_steps.end());
  out.machine = std::make_shared<ReplayMachine>(table_of(reach.machine), std::move(replay), n,
                                                out.result.reference.state,
                                                out.result.reference.counter, out.result.band);
  return out;
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::SpEmdp: return "SpEmdp";
    case Classification::StronglyConnectedNotPumpable: return "StronglyConnectedNotPumpable";
    default: return "NotStronglyConnected";
  }
}

Classification classify(const Emdp& e) {
  if (!is_strongly_connected(e)) return Classification::NotStronglyConnected;
  const LevelMap pump = min_pump(e);
  const bool pumpable = min_safe(e) == pump &&
                        std::all_of(pump.begin(), pump.end(),
                                    [](const Level& l) { return l.is_finite(); });
  return pumpable ? Classification::SpEmdp : Classification::StronglyConnectedNotPumpable;
}

ThresholdParams threshold_params(const Emdp& e, const LevelMap& pump_levels) {
  const std::int64_t me = max_update(e);
  const auto n = static_cast<std::int64_t>(e.num_states());
  ThresholdParams p;
  p.low = me + max_finite(pump_levels).value_or(0);
  p.high = p.low + n + 2 * n * n * me;
  return p;
}

std::int64_t Type2Params::pump_target(std::int64_t stage) const {
  return progressive_target(threshold, stage, period);
}

Type2Params type2_params(const Emdp& e, const TypeIICore& core, const LevelMap& pump_levels) {
  Type2Params p;
  if (core.c1.states == core.c2.states) {
    p.p1 = Rational(1, 2);
  } else {
    p.p1 = core.c1.freq / (core.c1.freq + core.c2.freq);
  }
  p.p2 = 1 - p.p1;
  p.period = to_int64(mpz_class(p.p1.get_den()));
  p.anchor = core.c1.states.front();
  p.threshold = max_finite(pump_levels).value_or(0) + max_update(e);
  return p;
}

Rational sp_value(const Emdp& e) { return sp_parts(e).flow.objective_value; }

MachinePtr type1_strategy(const Emdp& e, const TypeICore& core) {
  const auto p = sp_parts(e);
  return make_type1(e, core, p.pump_levels);
}

MachinePtr type2_strategy(const Emdp& e, const TypeIICore& core) {
  const auto p = sp_parts(e);
  return make_staged(e, core, p.pump_levels, std::nullopt);
}

std::int64_t stage_cap(const Emdp& e, const TypeIICore& core, const Rational& eps) {
  if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
  const auto p = type2_params(e, core, min_pump(e));
  const Rational kappa =
      static_cast<long>(ceil_int(max_expected_steps(e, only(e.num_states(), p.anchor))));
  const Rational range = reward_range(e);
  const auto holds = [&](std::int64_t i) {
    const Rational overhead = kappa + static_cast<long>(progressive_target(0, i, p.period));
    const Rational work = Rational(static_cast<long>(p.period)) * static_cast<long>(i);
    return range * overhead < eps / 2 * (work + overhead);
  };
  if (holds(1)) return 1;
  std::int64_t fail = 1;
  std::int64_t pass = 2;
  while (!holds(pass)) {
    if (pass > (std::int64_t{1} << 50)) throw std::logic_error("stage cap search did not terminate");
    fail = pass;
    pass *= 2;
  }
  while (pass - fail > 1) {
    const std::int64_t mid = fail + (pass - fail) / 2;
    (holds(mid) ? pass : fail) = mid;
  }
  return pass;
}

MachinePtr sp_epsilon_strategy(const Emdp& e, const Configuration& cfg, const Rational& eps) {
  if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
  const auto p = sp_parts(e);
  const Level& need = p.safe_levels.at(cfg.state);
  if (!need.is_finite() || cfg.counter < need.value()) {
    throw UnsafeStart(format_configuration(e, cfg) + " is not safe");
  }
  return sp_machine(e, eps);
}

CaseAPlan case_a_plan(const Emdp& e, const Rational& eps) { return build_case_a(e, eps).plan; }

CaseAStrategy caseA_strategy(const Emdp& e, const Rational& eps) {
  if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
  auto built = build_case_a(e, eps);
  const auto ms = min_safe(e);
  const auto top = max_finite(ms);
  if (!top) throw NoSafeState();
  const std::int64_t me = max_update(e);
  const std::int64_t danger = *top + me;
  CaseAStrategy out;
  out.machine = std::make_shared<GuardMachine>(built.machine, table_of(safe_strategy(e, ms)),
                                               danger);
  out.safe_start_level = danger + 2 * built.plan.block * me + 1;
  out.plan = std::move(built.plan);
  return out;
}

CaseBResult caseB_value(const Emdp& e) { return build_case_b(e).result; }

LimitAnalysis analyze_limits(const Emdp& e) {
  LimitAnalysis la;
  la.safe_levels = min_safe(e);
  la.value.assign(e.num_states(), std::nullopt);
  std::vector<bool> keep(e.num_states());
  for (StateId s = 0; s < e.num_states(); ++s) keep[s] = la.safe_levels[s].is_finite();
  if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; })) return la;
  std::vector<bool> keep_t(e.num_transitions());
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    keep_t[t] = keep[e.transition(t).src] && keep[e.transition(t).dst];
  }
  la.safe = restrict_model(e, keep, keep_t);
  const Emdp& safe = la.safe->model;

  std::vector<std::optional<Rational>> values;
  for (const auto& m : mecs(safe)) {
    MecAnalysis a{m, MecKind::Infeasible, std::nullopt};
    const auto sub = mec_model(safe, m);
    try {
      const Rational g = solve_flow(sub.model, ProgramKind::Trend).objective_value;
      if (g > 0) {
        a.kind = MecKind::CaseA;
        a.value = solve_flow(sub.model, ProgramKind::Payoff).objective_value;
      } else {
        a.kind = MecKind::CaseB;
        a.value = caseB_value(sub.model).value;
      }
    } catch (const InfeasibleFlow&) {
    }
    values.push_back(a.value);
    la.mecs.push_back(std::move(a));
  }
  std::vector<Mec> ms;
  for (const auto& a : la.mecs) ms.push_back(a.mec);
  la.condensation = condensation(safe, ms, values);
  la.solution = solve_mean_payoff(la.condensation->mdp);
  for (StateId s = 0; s < safe.num_states(); ++s) {
    la.value[la.safe->state_to_parent[s]] = la.solution->value[la.condensation->hat[s]];
  }
  return la;
}

std::optional<Rational> limit_value(const Emdp& e, StateId s) {
  return analyze_limits(e).value.at(s);
}

std::string to_string(ValueKind k) {
  switch (k) {
    case ValueKind::Exact: return "exact";
    case ValueKind::Approximate: return "approximate";
    default: return "limit";
  }
}

ValueApproximator::ValueApproximator(const Emdp& e, const Rational& eps)
    : e_(&e), eps_(eps), limits_(analyze_limits(e)) {
  if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
  const LevelMap& ms = limits_.safe_levels;
  const auto top = max_finite(ms);
  if (!top) return;
  const std::int64_t me = max_update(e);
  std::vector<Rational> cut_reward(e.num_states(), Rational(0));
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (limits_.value[s]) cut_reward[s] = *limits_.value[s];
  }
  const auto solve = [&](std::int64_t h) {
    auto cu = cut_unfold(e, ms, h, cut_reward);
    auto sol = solve_mean_payoff(cu.mdp);
    return std::make_pair(std::move(cu), std::move(sol));
  };
  const std::int64_t cap = 256;
  std::int64_t h = std::max<std::int64_t>(
      {2, static_cast<std::int64_t>(e.num_states()) * me, *top + me});
  h = std::min(h, cap / 2);
  auto prev = solve(h);
  while (true) {
    auto next = solve(2 * h);
    bool close = true;
    for (std::int64_t k = 0; k <= h && close; ++k) {
      for (StateId s = 0; s < e.num_states() && close; ++s) {
        const std::size_t a = prev.first.at(s, k);
        if (a == npos) continue;
        const Rational diff = prev.second.value[a] - next.second.value[next.first.at(s, k)];
        close = abs(diff) < eps / 4;
      }
    }
    if (close || 2 * h >= cap) {
      table_ = std::move(next.first);
      solution_ = std::move(next.second);
      return;
    }
    h *= 2;
    prev = std::move(next);
  }
}

ValueReport ValueApproximator::value(const Configuration& cfg) const {
  ValueReport r{cfg, std::nullopt, ValueKind::Exact, eps_};
  const Level& need = limits_.safe_levels.at(cfg.state);
  if (!need.is_finite() || cfg.counter < need.value()) return r;
  r.kind = ValueKind::Approximate;
  if (cfg.counter <= table_.height) {
    r.value = solution_.value[table_.at(cfg.state, cfg.counter)];
  } else {
    r.value = limits_.value[cfg.state];
  }
  return r;
}

ValueReport approx_value(const Emdp& e, const Configuration& cfg, const Rational& eps) {
  return ValueApproximator(e, eps).value(cfg);
}

MachinePtr epsilon_strategy(const Emdp& e, const Configuration& cfg, const Rational& eps) {
  if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
  const LevelMap ms = min_safe(e);
  const Level& need = ms.at(cfg.state);
  if (!need.is_finite() || cfg.counter < need.value()) {
    throw UnsafeStart(format_configuration(e, cfg) + " is not safe");
  }
  if (classify(e) == Classification::SpEmdp) return sp_epsilon_strategy(e, cfg, eps);

  const ValueApproximator approx(e, eps);
  const LimitAnalysis& la = approx.limits();
  const SubModel& safe = *la.safe;
  const Condensation& cond = *la.condensation;
  const Policy& sigma = la.solution->policy;
  const std::size_t n = e.num_states();
  const std::int64_t me = max_update(e);
  const Rational range = reward_range(e);

  CompositeMachine::Parts parts;
  parts.num_states = n;
  parts.danger = *max_finite(ms) + me;
  parts.safe = table_of(safe_strategy(e, ms));

  const CutUnfolding& cu = approx.table();
  const Policy& low_policy = approx.table_solution().policy;
  parts.low_height = cu.height;
  parts.low.resize(static_cast<std::size_t>(cu.height + 1) * n);
  for (std::int64_t k = 0; k <= cu.height; ++k) {
    for (StateId s = 0; s < n; ++s) {
      const std::size_t idx = cu.at(s, k);
      if (idx == npos || e.is_stochastic(s)) continue;
      parts.low[static_cast<std::size_t>(k) * n + s] =
          Distribution::dirac(cu.origin[low_policy[idx]]);
    }
  }

  const auto global_state = [&](StateId s) { return safe.state_to_parent[s]; };
  const auto global_transition = [&](TransitionId t) { return safe.transition_to_parent[t]; };
  parts.transient.resize(n);
  parts.target_of.assign(n, npos);

  std::int64_t top_floor = 0;
  for (std::size_t i = 0; i < la.mecs.size(); ++i) {
    const Mec& m = la.mecs[i].mec;
    const auto sub = mec_model(safe.model, m);
    const std::size_t r = cond.r_state[i];
    if (cond.loop[i] != npos && sigma[r] == cond.loop[i]) {
      // Target: hand over to a machine for the MEC alone.
      CompositeMachine::TargetEntry entry;
      if (classify(sub.model) == Classification::SpEmdp) {
        entry.machine = sp_machine(sub.model, eps / 2)->lift(sub)->lift(safe);
        entry.floor = *max_finite(min_pump(sub.model));
      } else if (la.mecs[i].kind == MecKind::CaseA) {
        const auto built = build_case_a(sub.model, eps / 2);
        entry.machine = std::make_shared<GuardMachine>(built.machine->lift(sub)->lift(safe),
                                                       parts.safe, parts.danger);
        entry.floor = parts.danger + 2 * built.plan.block * me + 1;
      } else {
        const auto built = build_case_b(sub.model);
        entry.machine = std::make_shared<GuardMachine>(built.machine->lift(sub)->lift(safe),
                                                       parts.safe, parts.danger);
        entry.floor = parts.danger + 1 + built.result.band +
                      me * ceil_int(4 * range * built.reach_steps / eps);
      }
      top_floor = std::max(top_floor, entry.floor);
      for (StateId s : m.states) parts.target_of[global_state(s)] = parts.targets.size();
      parts.targets.push_back(std::move(entry));
      continue;
    }
    // Not a target: walk to the source of the exit sigma takes, then take it.
    const TransitionId exit = cond.origin[sigma[r]];
    const StateId source = safe.model.transition(exit).src;
    const auto kappa = reach_strategy(sub.model, only(sub.model.num_states(),
                                                      *sub.parent_to_state[source]));
    for (StateId s : m.states) {
      if (safe.model.is_stochastic(s)) continue;
      const TransitionId t =
          s == source ? exit
                      : sub.transition_to_parent[kappa.choice[*sub.parent_to_state[s]]];
      parts.transient[global_state(s)] = Distribution::dirac(global_transition(t));
    }
  }
  for (StateId s = 0; s < safe.model.num_states(); ++s) {
    if (safe.model.is_stochastic(s) || cond.hat[s] == npos) continue;
    if (std::any_of(la.mecs.begin(), la.mecs.end(), [&](const MecAnalysis& a) {
          return std::binary_search(a.mec.states.begin(), a.mec.states.end(), s);
        })) {
      continue;
    }
    parts.transient[global_state(s)] =
        Distribution::dirac(global_transition(cond.origin[sigma[cond.hat[s]]]));
  }

  // Expected length of the transient part, for the energy margin above the target floors.
  MarkovChain chain;
  chain.next.resize(n);
  chain.reward.assign(n, Rational(0));
  std::vector<bool> absorbing(n, false);
  for (StateId s = 0; s < n; ++s) {
    if (!ms[s].is_finite() || parts.target_of[s] != npos) {
      absorbing[s] = true;
      chain.next[s].emplace_back(s, Rational(1));
      continue;
    }
    if (e.is_stochastic(s)) {
      for (TransitionId t : e.out(s)) chain.next[s].emplace_back(e.transition(t).dst, *e.transition(t).prob);
    } else {
      chain.next[s].emplace_back(e.transition(parts.transient[s].mode()).dst, Rational(1));
    }
  }
  const auto steps = expected_until(chain, absorbing, std::vector<Rational>(n, Rational(1)));
  const Rational longest = *std::max_element(steps.begin(), steps.end());
  const std::int64_t margin = me * ceil_int(4 * range * longest / eps);
  parts.climb = std::max(cu.height + 1, top_floor + margin);
  return std::make_shared<CompositeMachine>(std::move(parts));
}

}  // namespace emdp
