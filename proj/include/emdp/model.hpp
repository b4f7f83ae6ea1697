#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emdp/errors.hpp"
#include "emdp/rational.hpp"

namespace emdp {

enum class StateKind { Controllable, Stochastic };

using StateId = std::size_t;
using TransitionId = std::size_t;

struct State {
  std::string id;
  StateKind kind = StateKind::Controllable;

  friend bool operator==(const State&, const State&) = default;
};

struct Transition {
  StateId src = 0;
  StateId dst = 0;
  std::int64_t update = 0;
  Rational reward;
  std::optional<Rational> prob;  // present iff src is stochastic

  friend bool operator==(const Transition&, const Transition&) = default;
};

// An energy MDP. Structure (ids, endpoint ranges) is checked on construction;
// totality and probability rules are checked by validate().
class Emdp {
 public:
  Emdp() = default;
  Emdp(std::vector<State> states, std::vector<Transition> transitions);

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_transitions() const { return transitions_.size(); }

  const State& state(StateId s) const { return states_.at(s); }
  const Transition& transition(TransitionId t) const { return transitions_.at(t); }
  const std::vector<State>& states() const { return states_; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  bool is_stochastic(StateId s) const { return states_[s].kind == StateKind::Stochastic; }
  bool is_controllable(StateId s) const { return states_[s].kind == StateKind::Controllable; }

  std::span<const TransitionId> out(StateId s) const { return out_[s]; }
  std::span<const TransitionId> in(StateId s) const { return in_[s]; }

  std::optional<StateId> find_state(std::string_view id) const;
  // Throws std::out_of_range naming the id.
  StateId state_id(std::string_view id) const;

  friend bool operator==(const Emdp& a, const Emdp& b) {
    return a.states_ == b.states_ && a.transitions_ == b.transitions_;
  }

 private:
  std::vector<State> states_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<TransitionId>> out_;
  std::vector<std::vector<TransitionId>> in_;
  std::unordered_map<std::string, StateId> index_;
};

// Builds an Emdp from state names; unknown endpoints and duplicate ids raise ValidationError.
class EmdpBuilder {
 public:
  StateId add_state(std::string id, StateKind kind);
  TransitionId add_transition(std::string_view src, std::string_view dst, std::int64_t update,
                              Rational reward, std::optional<Rational> prob = std::nullopt);
  Emdp build() const;

 private:
  std::vector<State> states_;
  std::vector<Transition> transitions_;
  std::unordered_map<std::string, StateId> index_;
};

struct Configuration {
  StateId state = 0;
  std::int64_t counter = 0;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

Emdp parse_emdp(std::string_view text);
std::string print_emdp(const Emdp& e);
void validate(const Emdp& e);

// M_E: the largest absolute update.
std::int64_t max_update(const Emdp& e);
Rational min_reward(const Emdp& e);
Rational max_reward(const Emdp& e);

// Levels along a path given by transitions; element 0 is n0.
std::vector<std::int64_t> energy_level(const Emdp& e, std::span<const TransitionId> path,
                                       std::int64_t n0);
// Levels along a path given by states. Each consecutive pair must be joined by a
// transition, and parallel transitions must agree on the update.
std::vector<std::int64_t> energy_level_of_states(const Emdp& e, std::span<const StateId> path,
                                                 std::int64_t n0);

// "<state>(<int>)"
Configuration parse_configuration(const Emdp& e, std::string_view text);
std::string format_configuration(const Emdp& e, const Configuration& c);

// A sub-EMDP on selected states and transitions, with index maps back to the parent.
struct SubModel {
  Emdp model;
  std::vector<StateId> state_to_parent;
  std::vector<TransitionId> transition_to_parent;
  std::vector<std::optional<StateId>> parent_to_state;
  std::size_t parent_states = 0;
  std::size_t parent_transitions = 0;
};

// Kept transitions must have both endpoints kept. The result is not validated.
SubModel restrict_model(const Emdp& e, const std::vector<bool>& keep_state,
                        const std::vector<bool>& keep_transition);

}  // namespace emdp
