#pragma once

#include <optional>
#include <vector>

#include "emdp/markov.hpp"
#include "emdp/model.hpp"
#include "emdp/strategy.hpp"

namespace emdp {

struct Mec {
  std::vector<StateId> states;            // sorted
  std::vector<TransitionId> transitions;  // sorted

  friend bool operator==(const Mec&, const Mec&) = default;
};

std::vector<Mec> mecs(const Emdp& e);
// MECs of the sub-MDP formed by the allowed states and transitions.
std::vector<Mec> mecs_within(const Emdp& e, const std::vector<bool>& allowed_state,
                             const std::vector<bool>& allowed_transition);

bool is_strongly_connected(const Emdp& e);

// The sub-model spanned by a MEC.
SubModel mec_model(const Emdp& e, const Mec& m);

struct Attractor {
  std::vector<bool> winning;  // states from which target is reached almost surely
  // For controllable winning states outside the target: a transition moving strictly
  // closer to the target along the attractor ranking.
  std::vector<std::optional<TransitionId>> choice;
  std::vector<std::size_t> rank;  // BFS distance to target inside the winning region
};

// Almost-sure reachability restricted to allowed states and transitions (nullptr = all).
// Stochastic states must keep all their transitions inside the region.
Attractor almost_sure_attractor(const Emdp& e, const std::vector<bool>& target,
                                const std::vector<bool>* allowed_state = nullptr,
                                const std::vector<bool>* allowed_transition = nullptr);

struct ReachStrategy {
  MachinePtr machine;
  std::vector<TransitionId> choice;  // per state; meaningful at controllable states
  // Exact expected number of steps to hit the target under the strategy.
  std::vector<Rational> expected_steps;
};

// Memoryless deterministic strategy reaching target almost surely from every state.
// Throws NotAlmostSurelyReachable listing the states where this is impossible.
ReachStrategy reach_strategy(const Emdp& e, const std::vector<bool>& target);

// The Markov chain induced by a memoryless strategy (stochastic states use Prob).
// Per-state expected rewards are filled from transition rewards.
MarkovChain induced_chain(const Emdp& e, const DistributionTable& strategy);

}  // namespace emdp
