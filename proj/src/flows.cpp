#include "emdp/flows.hpp"

#include <algorithm>

#include "emdp/digraph.hpp"
#include "emdp/graphs.hpp"

namespace emdp {

namespace {

LinearProgram build_flow_lp(const Emdp& e, ProgramKind kind) {
  const std::size_t m = e.num_transitions();
  LinearProgram lp;
  lp.sense = Sense::Maximize;
  for (TransitionId t = 0; t < m; ++t) {
    const auto& tr = e.transition(t);
    lp.add_variable("f" + std::to_string(t),
                    kind == ProgramKind::Payoff ? tr.reward : Rational(tr.update));
  }
  const auto row = [&](Relation rel, Rational rhs, std::string name) -> Constraint& {
    auto& c = lp.add_constraint(rel, std::move(rhs), std::move(name));
    c.coefficients.assign(m, Rational(0));
    return c;
  };

  auto& mass = row(Relation::Equal, 1, "mass");
  for (auto& a : mass.coefficients) a = 1;

  for (StateId s = 0; s < e.num_states(); ++s) {
    if (!e.is_controllable(s)) continue;
    auto& c = row(Relation::Equal, 0, "conserve:" + e.state(s).id);
    for (TransitionId t : e.in(s)) c.coefficients[t] += 1;
    for (TransitionId t : e.out(s)) c.coefficients[t] -= 1;
  }
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (!e.is_stochastic(s)) continue;
    for (TransitionId t : e.out(s)) {
      auto& c = row(Relation::Equal, 0, "split:" + std::to_string(t));
      c.coefficients[t] += 1;
      for (TransitionId in : e.in(s)) c.coefficients[in] -= *e.transition(t).prob;
    }
  }
  auto& trend = row(Relation::GreaterEq, 0, "trend");
  for (TransitionId t = 0; t < m; ++t) trend.coefficients[t] = e.transition(t).update;
  return lp;
}

bool same_states(const Component& a, const Component& b) { return a.states == b.states; }

}  // namespace

LinearProgram build_payoff_lp(const Emdp& e) { return build_flow_lp(e, ProgramKind::Payoff); }
LinearProgram build_trend_lp(const Emdp& e) { return build_flow_lp(e, ProgramKind::Trend); }

FlowSolution solve_flow(const Emdp& e, ProgramKind kind) {
  const auto lp = build_flow_lp(e, kind);
  const auto out = solve_lp(lp);
  const auto* opt = std::get_if<LpOptimal>(&out);
  if (!opt) throw InfeasibleFlow();  // the mass row bounds every variable, so never unbounded
  return {opt->assignment, opt->value, kind};
}

std::vector<Component> components(const Emdp& e, const FlowSolution& fs) {
  const std::size_t n = e.num_states();
  Adjacency succ(n);
  std::vector<bool> active(n, false);
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    if (fs.f[t] <= 0) continue;
    const auto& tr = e.transition(t);
    succ[tr.src].push_back(tr.dst);
    active[tr.src] = active[tr.dst] = true;
  }
  const auto scc = strongly_connected_components(succ, &active);
  std::vector<Component> out;
  for (const auto& states : scc.components) {
    Component c;
    c.states = states;
    c.freq = 0;
    for (StateId s : states) {
      for (TransitionId t : e.out(s)) {
        if (fs.f[t] > 0) c.transitions.push_back(t);
      }
    }
    std::sort(c.transitions.begin(), c.transitions.end());
    if (c.transitions.empty()) continue;  // a state on no cycle
    Rational energy = 0, reward = 0;
    for (TransitionId t : c.transitions) {
      c.flow.push_back(fs.f[t]);
      c.freq += fs.f[t];
      energy += fs.f[t] * e.transition(t).update;
      reward += fs.f[t] * e.transition(t).reward;
    }
    c.trend = energy / c.freq;
    c.mp = reward / c.freq;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    return a.states.front() < b.states.front();
  });
  return out;
}

bool satisfies(const Core& core, const Rational& f_star) {
  if (const auto* one = std::get_if<TypeICore>(&core)) {
    return one->c.trend > 0 && one->c.mp >= f_star;
  }
  const auto& two = std::get<TypeIICore>(core);
  if (two.c1.trend < 0 || two.c2.trend > 0) return false;
  if (same_states(two.c1, two.c2)) {
    return two.c1.freq * two.c1.trend >= 0 && two.c1.freq * two.c1.mp >= f_star;
  }
  return two.c1.freq * two.c1.trend + two.c2.freq * two.c2.trend >= 0 &&
         two.c1.freq * two.c1.mp + two.c2.freq * two.c2.mp >= f_star;
}

Core find_core(const Emdp& e, const FlowSolution& fs) {
  const auto comps = components(e, fs);
  const Rational& f_star = fs.objective_value;
  for (const auto& c : comps) {
    if (satisfies(TypeICore{c}, f_star)) return TypeICore{c};
  }
  for (const auto& a : comps) {
    for (const auto& b : comps) {
      if (same_states(a, b)) continue;
      if (satisfies(TypeIICore{a, b}, f_star)) return TypeIICore{a, b};
    }
  }
  for (const auto& c : comps) {
    if (satisfies(TypeIICore{c, c}, f_star)) return TypeIICore{c, c};
  }
  throw NoCore();
}

DistributionTable flow_table(const Emdp& e, const Component& c) {
  DistributionTable table(e.num_states());
  for (StateId s : c.states) {
    if (!e.is_controllable(s)) continue;
    Rational outflow = 0;
    for (std::size_t i = 0; i < c.transitions.size(); ++i) {
      if (e.transition(c.transitions[i]).src == s) outflow += c.flow[i];
    }
    std::vector<Choice> choices;
    for (std::size_t i = 0; i < c.transitions.size(); ++i) {
      if (e.transition(c.transitions[i]).src == s) {
        choices.push_back({c.transitions[i], c.flow[i] / outflow});
      }
    }
    table[s] = Distribution(std::move(choices));
  }
  return table;
}

DistributionTable mu_table(const Emdp& e, const Component& c) {
  DistributionTable table = flow_table(e, c);
  std::vector<bool> target(e.num_states(), false);
  for (StateId s : c.states) target[s] = true;
  const auto kappa = reach_strategy(e, target);
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (!target[s] && e.is_controllable(s)) table[s] = Distribution::dirac(kappa.choice[s]);
  }
  return table;
}

MachinePtr mu_strategy(const Emdp& e, const Component& c) {
  return std::make_shared<TableMachine>(mu_table(e, c));
}

}  // namespace emdp
