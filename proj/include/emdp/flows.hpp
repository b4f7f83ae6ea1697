#pragma once

#include <variant>
#include <vector>

#include "emdp/model.hpp"
#include "emdp/ratlp.hpp"
#include "emdp/strategy.hpp"

namespace emdp {

enum class ProgramKind { Payoff, Trend };

struct FlowSolution {
  std::vector<Rational> f;  // one frequency per transition
  Rational objective_value;
  ProgramKind kind = ProgramKind::Payoff;
};

struct Component {
  std::vector<StateId> states;            // sorted
  std::vector<TransitionId> transitions;  // sorted; positive-flow transitions leaving C's states
  std::vector<Rational> flow;             // f_e for each entry of transitions
  Rational freq;
  Rational trend;
  Rational mp;

  friend bool operator==(const Component&, const Component&) = default;
};

struct TypeICore {
  Component c;
};
struct TypeIICore {
  Component c1;  // non-negative trend
  Component c2;  // non-positive trend
};
using Core = std::variant<TypeICore, TypeIICore>;

// Rows in order: total mass, conservation per controllable state, split per transition of a
// stochastic state, energy trend >= 0. One variable per transition, in transition order.
LinearProgram build_payoff_lp(const Emdp& e);
LinearProgram build_trend_lp(const Emdp& e);

// Throws InfeasibleFlow when no flow with non-negative trend exists.
FlowSolution solve_flow(const Emdp& e, ProgramKind kind);

// SCCs of the positive-flow graph, sorted by smallest state.
std::vector<Component> components(const Emdp& e, const FlowSolution& fs);

// First TypeI component, else the first ordered pair meeting the TypeII inequalities.
// A component paired with itself stands for that component alone.
Core find_core(const Emdp& e, const FlowSolution& fs);
bool satisfies(const Core& core, const Rational& f_star);

// Inside C: f_e divided by the flow leaving the state. Elsewhere: empty.
DistributionTable flow_table(const Emdp& e, const Component& c);

// flow_table inside C, a reach strategy toward C elsewhere.
MachinePtr mu_strategy(const Emdp& e, const Component& c);
DistributionTable mu_table(const Emdp& e, const Component& c);

}  // namespace emdp
