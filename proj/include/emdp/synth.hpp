#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emdp/energy.hpp"
#include "emdp/finmdp.hpp"
#include "emdp/flows.hpp"
#include "emdp/graphs.hpp"
#include "emdp/model.hpp"
#include "emdp/strategy.hpp"

namespace emdp {

enum class Classification { SpEmdp, StronglyConnectedNotPumpable, NotStronglyConnected };

std::string to_string(Classification c);

// SP-EMDP: strongly connected, and every safe configuration is pumpable
// (min_safe and min_pump agree everywhere). A state that is never safe also counts against
// pumpability: a safe play can never cross it, so the SP constructions would not apply.
Classification classify(const Emdp& e);

struct ThresholdParams {
  std::int64_t low = 0;   // L = M_E + max min_pump
  std::int64_t high = 0;  // H = L + |S| + 2 |S|^2 M_E
};
// Maxima range over pumpable states.
ThresholdParams threshold_params(const Emdp& e, const LevelMap& pump_levels);

struct Type2Params {
  Rational p1;
  Rational p2;
  std::int64_t period = 1;  // N: least positive integer with p1 N and p2 N integral
  StateId anchor = 0;       // q: first state of C1
  std::int64_t threshold = 0;  // TH = max min_pump + M_E

  std::int64_t pump_target(std::int64_t stage) const;
};
// p_i is f(C_i) normalized by f(C1) + f(C2); a component paired with itself gets 1/2 each.
Type2Params type2_params(const Emdp& e, const TypeIICore& core, const LevelMap& pump_levels);

// The common value f* of the safe configurations. Throws NotSpEmdp.
Rational sp_value(const Emdp& e);

// Throw NotSpEmdp unless e is an SP-EMDP.
MachinePtr type1_strategy(const Emdp& e, const TypeICore& core);
MachinePtr type2_strategy(const Emdp& e, const TypeIICore& core);

// A stage i with R * overhead(i) / (N i + overhead(i)) < eps / 2, where
// overhead(i) = ceil(max expected kappa steps) + ceil((i N)^(3/4)) and R is the reward range.
// Found by doubling then bisection, so it is the least such i up to rounding in the ceilings.
std::int64_t stage_cap(const Emdp& e, const TypeIICore& core, const Rational& eps);

// Optimal (type I) or eps-optimal finite-memory (type II, stage-capped) strategy.
// Throws NotSpEmdp, or UnsafeStart when cfg is not safe.
MachinePtr sp_epsilon_strategy(const Emdp& e, const Configuration& cfg, const Rational& eps);

struct CaseAPlan {
  Rational f_star;
  Rational g_star;
  std::vector<Component> components;  // the mixed components, all with positive weight
  std::vector<Rational> alpha;
  Rational mp;     // sum alpha_j mp_j
  Rational trend;  // sum alpha_j trend_j, positive
  std::vector<std::int64_t> counts;  // steps per phase of one block
  std::int64_t block = 0;            // sum of counts
};
// Throws NotApplicable unless e is strongly connected with g* > 0.
CaseAPlan case_a_plan(const Emdp& e, const Rational& eps);

struct CaseAStrategy {
  MachinePtr machine;
  std::int64_t safe_start_level = 0;
  CaseAPlan plan;
};
// Time-share over the plan's components, guarded by the model's safe strategy below
// max min_safe + M_E. Throws NotApplicable, or NoSafeState when nothing is safe.
CaseAStrategy caseA_strategy(const Emdp& e, const Rational& eps);

struct CaseBResult {
  std::optional<Rational> value;  // nullopt: -inf
  Configuration reference;
  std::int64_t band = 0;  // |S| M_E
};
// Throws NotApplicable unless e is strongly connected with g* = 0.
CaseBResult caseB_value(const Emdp& e);

enum class MecKind { Infeasible, CaseA, CaseB };

struct MecAnalysis {
  Mec mec;  // ids of the safe part
  MecKind kind = MecKind::Infeasible;
  std::optional<Rational> value;
};

// Limit values through the condensation of the safe part of e.
struct LimitAnalysis {
  LevelMap safe_levels;
  std::optional<SubModel> safe;  // absent when no state is safe
  std::vector<MecAnalysis> mecs;
  std::optional<Condensation> condensation;
  std::optional<MeanPayoffResult> solution;
  std::vector<std::optional<Rational>> value;  // per state of e
};
LimitAnalysis analyze_limits(const Emdp& e);

std::optional<Rational> limit_value(const Emdp& e, StateId s);

enum class ValueKind { Exact, Approximate, Limit };
std::string to_string(ValueKind k);

struct ValueReport {
  Configuration query;
  std::optional<Rational> value;  // nullopt: -inf
  ValueKind kind = ValueKind::Approximate;
  Rational epsilon;
};

// Values of a cut unfolding whose height is doubled until successive tables agree within
// eps / 4 below the smaller height (height capped at 256).
class ValueApproximator {
 public:
  ValueApproximator(const Emdp& e, const Rational& eps);

  ValueReport value(const Configuration& cfg) const;
  std::int64_t height() const { return table_.height; }
  const LimitAnalysis& limits() const { return limits_; }
  const CutUnfolding& table() const { return table_; }
  const MeanPayoffResult& table_solution() const { return solution_; }

 private:
  const Emdp* e_;
  Rational eps_;
  LimitAnalysis limits_;
  CutUnfolding table_;
  MeanPayoffResult solution_;
};

ValueReport approx_value(const Emdp& e, const Configuration& cfg, const Rational& eps);

// The composite eps-optimal strategy; SP-EMDPs delegate to sp_epsilon_strategy.
// Throws UnsafeStart.
MachinePtr epsilon_strategy(const Emdp& e, const Configuration& cfg, const Rational& eps);

}  // namespace emdp
