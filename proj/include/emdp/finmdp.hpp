#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emdp/energy.hpp"
#include "emdp/graphs.hpp"
#include "emdp/markov.hpp"
#include "emdp/model.hpp"
#include "emdp/strategy.hpp"

namespace emdp {

struct MdpTransition {
  std::size_t src = 0;
  std::size_t dst = 0;
  Rational reward;
  std::optional<Rational> prob;  // present iff src is stochastic
};

// A mean-payoff MDP without a counter.
class FiniteMdp {
 public:
  FiniteMdp() = default;
  FiniteMdp(std::vector<State> states, std::vector<MdpTransition> transitions);

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_transitions() const { return transitions_.size(); }
  const State& state(std::size_t s) const { return states_.at(s); }
  const MdpTransition& transition(std::size_t t) const { return transitions_.at(t); }
  bool is_stochastic(std::size_t s) const { return states_[s].kind == StateKind::Stochastic; }
  std::span<const std::size_t> out(std::size_t s) const { return out_[s]; }

  // Totality and probability rules, as for Emdp.
  void validate() const;

 private:
  std::vector<State> states_;
  std::vector<MdpTransition> transitions_;
  std::vector<std::vector<std::size_t>> out_;
};

// Per-state transition choice; entries of stochastic states are ignored.
using Policy = std::vector<std::size_t>;

struct MeanPayoffResult {
  std::vector<Rational> value;
  Policy policy;
  MachinePtr strategy;  // memoryless deterministic, over the MDP's own indices
};

// Multichain policy iteration with exact gain/bias evaluation.
MeanPayoffResult solve_mean_payoff(const FiniteMdp& m);
// Optimal gains from the multichain primal LP; the policy is left empty.
std::vector<Rational> mean_payoff_values_lp(const FiniteMdp& m);

MarkovChain policy_chain(const FiniteMdp& m, const Policy& policy);
// The first outgoing transition everywhere.
Policy default_policy(const FiniteMdp& m);

struct Unfolding {
  FiniteMdp mdp;
  std::int64_t low = 0;
  std::int64_t high = 0;
  std::size_t base_states = 0;
  std::size_t sink = 0;
  std::vector<TransitionId> origin;  // npos for the sink loop

  std::optional<std::size_t> index(const Configuration& c) const;
  Configuration configuration(std::size_t state) const;  // not for the sink
};

// Configurations s(k) with low <= k <= high plus a sink; leaving the band goes to the sink,
// whose self-loop pays sink_reward. Throws BadBounds when low > high or sink_reward is not
// below every transition reward.
Unfolding unfold(const Emdp& e, std::int64_t low, std::int64_t high, const Rational& sink_reward);

// Safe configurations s(k), min_safe(s) <= k <= height, with only the transitions that keep
// the level at or above min_safe. Going above height enters an absorbing cut state for the
// destination whose loop pays cut_reward of that destination.
struct CutUnfolding {
  FiniteMdp mdp;
  std::int64_t height = 0;
  std::size_t base_states = 0;
  std::vector<std::size_t> index;    // k * base_states + s -> MDP state, npos if unsafe
  std::vector<std::size_t> cut;      // per base state, npos if never entered
  std::vector<TransitionId> origin;  // npos for cut loops

  std::size_t at(StateId s, std::int64_t k) const {
    return index[static_cast<std::size_t>(k) * base_states + s];
  }
};
CutUnfolding cut_unfold(const Emdp& e, const LevelMap& safe_levels, std::int64_t height,
                        const std::vector<Rational>& cut_reward);

struct Condensation {
  FiniteMdp mdp;
  std::vector<Mec> mecs;
  std::vector<std::size_t> hat;          // original state -> MDP state
  std::vector<std::size_t> r_state;      // per MEC
  std::vector<std::size_t> loop;         // per MEC: transition index of r_M's loop or npos
  std::vector<TransitionId> origin;      // MDP transition -> original transition, npos for loops
};

// One value per MEC of e (in mecs(e) order); nullopt omits the r_M loop. Transitions other
// than the loops pay the least supplied value (0 when none is finite).
Condensation condensation(const Emdp& e, const std::vector<Mec>& ms,
                          const std::vector<std::optional<Rational>>& values);
Condensation condensation(const Emdp& e, const std::vector<Rational>& mec_limit_values);

}  // namespace emdp
