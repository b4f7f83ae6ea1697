#include "emdp/finmdp.hpp"

#include <algorithm>
#include <stdexcept>

#include "emdp/digraph.hpp"
#include "emdp/ratlp.hpp"

namespace emdp {

FiniteMdp::FiniteMdp(std::vector<State> states, std::vector<MdpTransition> transitions)
    : states_(std::move(states)), transitions_(std::move(transitions)), out_(states_.size()) {
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    const auto& tr = transitions_[t];
    if (tr.src >= states_.size() || tr.dst >= states_.size()) {
      throw ValidationError("known-endpoint", "transition #" + std::to_string(t),
                            "endpoint out of range");
    }
    out_[tr.src].push_back(t);
  }
}

void FiniteMdp::validate() const {
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    const auto& tr = transitions_[t];
    const std::string where = "transition #" + std::to_string(t);
    if (is_stochastic(tr.src) != tr.prob.has_value()) {
      throw ValidationError("prob-iff-stochastic", where, "probability presence mismatch");
    }
    if (tr.prob && *tr.prob <= 0) throw ValidationError("prob-positive", where, "non-positive");
  }
  for (std::size_t s = 0; s < states_.size(); ++s) {
    if (out_[s].empty()) {
      throw ValidationError("totality", "state " + states_[s].id, "no outgoing transition");
    }
    if (!is_stochastic(s)) continue;
    Rational sum = 0;
    for (std::size_t t : out_[s]) sum += *transitions_[t].prob;
    if (sum != 1) {
      throw ValidationError("prob-sum", "state " + states_[s].id,
                            "probabilities sum to " + to_string(sum));
    }
  }
}

Policy default_policy(const FiniteMdp& m) {
  Policy p(m.num_states(), 0);
  for (std::size_t s = 0; s < m.num_states(); ++s) p[s] = m.out(s).front();
  return p;
}

MarkovChain policy_chain(const FiniteMdp& m, const Policy& policy) {
  MarkovChain chain;
  chain.next.resize(m.num_states());
  chain.reward.assign(m.num_states(), Rational(0));
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    if (m.is_stochastic(s)) {
      for (std::size_t t : m.out(s)) {
        const auto& tr = m.transition(t);
        chain.next[s].emplace_back(tr.dst, *tr.prob);
        chain.reward[s] += *tr.prob * tr.reward;
      }
    } else {
      const auto& tr = m.transition(policy[s]);
      chain.next[s].emplace_back(tr.dst, Rational(1));
      chain.reward[s] = tr.reward;
    }
  }
  return chain;
}

namespace {

MachinePtr policy_machine(const FiniteMdp& m, const Policy& policy) {
  std::vector<std::optional<TransitionId>> choice(m.num_states());
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    if (!m.is_stochastic(s)) choice[s] = policy[s];
  }
  return make_deterministic(m.num_states(), choice);
}

// Switches s to the first transition maximizing score unless the current one already does.
// Returns whether the policy changed.
template <typename Score>
bool improve(std::size_t s, std::span<const std::size_t> actions,
             Policy& policy, Score score) {
  const Rational current = score(policy[s]);
  std::optional<std::size_t> best;
  Rational best_value = current;
  for (std::size_t t : actions) {
    const Rational v = score(t);
    if (v > best_value) {
      best_value = v;
      best = t;
    }
  }
  if (!best) return false;
  policy[s] = *best;
  return true;
}

}  // namespace

MeanPayoffResult solve_mean_payoff(const FiniteMdp& m) {
  m.validate();
  Policy policy = default_policy(m);
  const std::size_t limit = 100000;
  for (std::size_t round = 0; round < limit; ++round) {
    const auto a = analyze_chain(policy_chain(m, policy), true);
    bool changed = false;
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      if (m.is_stochastic(s)) continue;
      changed |= improve(s, m.out(s), policy,
                         [&](std::size_t t) { return a.gain[m.transition(t).dst]; });
    }
    if (changed) continue;
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      if (m.is_stochastic(s)) continue;
      const Rational& g = a.gain[m.transition(policy[s]).dst];
      std::vector<std::size_t> tied;
      for (std::size_t t : m.out(s)) {
        if (a.gain[m.transition(t).dst] == g) tied.push_back(t);
      }
      changed |= improve(s, tied, policy, [&](std::size_t t) {
        return m.transition(t).reward + a.bias[m.transition(t).dst];
      });
    }
    if (!changed) return {a.gain, policy, policy_machine(m, policy)};
  }
  throw std::logic_error("policy iteration did not converge");
}

std::vector<Rational> mean_payoff_values_lp(const FiniteMdp& m) {
  m.validate();
  const std::size_t n = m.num_states();
  // Free variables g_s and h_s, each split as a difference of two non-negative ones.
  LinearProgram lp;
  lp.sense = Sense::Minimize;
  for (std::size_t s = 0; s < n; ++s) lp.add_variable("g+" + std::to_string(s), 1);
  for (std::size_t s = 0; s < n; ++s) lp.add_variable("g-" + std::to_string(s), -1);
  for (std::size_t s = 0; s < n; ++s) lp.add_variable("h+" + std::to_string(s));
  for (std::size_t s = 0; s < n; ++s) lp.add_variable("h-" + std::to_string(s));
  const auto add = [&](std::vector<Rational>& row, std::size_t block, std::size_t s, Rational a) {
    row[2 * block * n + s] += a;
    row[(2 * block + 1) * n + s] -= a;
  };
  const auto action_rows = [&](std::size_t s, const std::vector<std::pair<std::size_t, Rational>>& dist,
                               const Rational& reward) {
    auto& gain = lp.add_constraint(Relation::GreaterEq, 0);
    gain.coefficients.assign(4 * n, Rational(0));
    add(gain.coefficients, 0, s, 1);
    for (const auto& [d, p] : dist) add(gain.coefficients, 0, d, -p);
    auto& bias = lp.add_constraint(Relation::GreaterEq, reward);
    bias.coefficients.assign(4 * n, Rational(0));
    add(bias.coefficients, 0, s, 1);
    add(bias.coefficients, 1, s, 1);
    for (const auto& [d, p] : dist) add(bias.coefficients, 1, d, -p);
  };
  for (std::size_t s = 0; s < n; ++s) {
    if (m.is_stochastic(s)) {
      std::vector<std::pair<std::size_t, Rational>> dist;
      Rational reward = 0;
      for (std::size_t t : m.out(s)) {
        dist.emplace_back(m.transition(t).dst, *m.transition(t).prob);
        reward += *m.transition(t).prob * m.transition(t).reward;
      }
      action_rows(s, dist, reward);
    } else {
      for (std::size_t t : m.out(s)) {
        action_rows(s, {{m.transition(t).dst, Rational(1)}}, m.transition(t).reward);
      }
    }
  }
  const auto out = solve_lp(lp);
  const auto* opt = std::get_if<LpOptimal>(&out);
  if (!opt) throw std::logic_error("mean-payoff LP has no optimum");
  std::vector<Rational> g(n);
  for (std::size_t s = 0; s < n; ++s) g[s] = opt->assignment[s] - opt->assignment[n + s];
  return g;
}

std::optional<std::size_t> Unfolding::index(const Configuration& c) const {
  if (c.state >= base_states || c.counter < low || c.counter > high) return std::nullopt;
  return static_cast<std::size_t>(c.counter - low) * base_states + c.state;
}

Configuration Unfolding::configuration(std::size_t state) const {
  if (state >= sink) throw std::out_of_range("the sink has no configuration");
  return {state % base_states, low + static_cast<std::int64_t>(state / base_states)};
}

Unfolding unfold(const Emdp& e, std::int64_t low, std::int64_t high, const Rational& sink_reward) {
  if (low > high) throw BadBounds("low bound exceeds high bound");
  if (sink_reward >= min_reward(e)) {
    throw BadBounds("sink reward must be below every transition reward");
  }
  Unfolding u;
  u.low = low;
  u.high = high;
  u.base_states = e.num_states();
  const std::size_t width = static_cast<std::size_t>(high - low + 1);
  u.sink = width * e.num_states();

  std::vector<State> states;
  states.reserve(u.sink + 1);
  std::vector<MdpTransition> transitions;
  for (std::size_t i = 0; i < u.sink; ++i) {
    const auto c = u.configuration(i);
    states.push_back({format_configuration(e, c), e.state(c.state).kind});
    for (TransitionId t : e.out(c.state)) {
      const auto& tr = e.transition(t);
      const auto dst = u.index({tr.dst, c.counter + tr.update});
      transitions.push_back({i, dst.value_or(u.sink), tr.reward, tr.prob});
      u.origin.push_back(t);
    }
  }
  states.push_back({"sink", StateKind::Controllable});
  transitions.push_back({u.sink, u.sink, sink_reward, std::nullopt});
  u.origin.push_back(npos);
  u.mdp = FiniteMdp(std::move(states), std::move(transitions));
  return u;
}

CutUnfolding cut_unfold(const Emdp& e, const LevelMap& safe_levels, std::int64_t height,
                        const std::vector<Rational>& cut_reward) {
  const std::size_t n = e.num_states();
  CutUnfolding u;
  u.height = height;
  u.base_states = n;
  u.index.assign(static_cast<std::size_t>(height + 1) * n, npos);
  u.cut.assign(n, npos);

  std::vector<State> states;
  for (std::int64_t k = 0; k <= height; ++k) {
    for (StateId s = 0; s < n; ++s) {
      if (!safe_levels[s].is_finite() || safe_levels[s].value() > k) continue;
      u.index[static_cast<std::size_t>(k) * n + s] = states.size();
      states.push_back({format_configuration(e, {s, k}), e.state(s).kind});
    }
  }
  const auto cut_state = [&](StateId d) {
    if (u.cut[d] == npos) {
      u.cut[d] = states.size();
      states.push_back({"cut:" + e.state(d).id, StateKind::Controllable});
    }
    return u.cut[d];
  };

  std::vector<MdpTransition> transitions;
  for (std::int64_t k = 0; k <= height; ++k) {
    for (StateId s = 0; s < n; ++s) {
      const std::size_t from = u.at(s, k);
      if (from == npos) continue;
      for (TransitionId t : e.out(s)) {
        const auto& tr = e.transition(t);
        const std::int64_t next = k + tr.update;
        const Level& need = safe_levels[tr.dst];
        if (!need.is_finite() || next < need.value()) {
          if (e.is_stochastic(s)) throw std::logic_error("stochastic state below its safe level");
          continue;
        }
        const std::size_t to = next > height ? cut_state(tr.dst) : u.at(tr.dst, next);
        transitions.push_back({from, to, tr.reward, tr.prob});
        u.origin.push_back(t);
      }
    }
  }
  for (StateId d = 0; d < n; ++d) {
    if (u.cut[d] == npos) continue;
    transitions.push_back({u.cut[d], u.cut[d], cut_reward[d], std::nullopt});
    u.origin.push_back(npos);
  }
  u.mdp = FiniteMdp(std::move(states), std::move(transitions));
  return u;
}

Condensation condensation(const Emdp& e, const std::vector<Mec>& ms,
                          const std::vector<std::optional<Rational>>& values) {
  if (values.size() != ms.size()) throw std::invalid_argument("one value per MEC is required");
  const std::size_t n = e.num_states();
  Condensation c;
  c.mecs = ms;
  std::vector<std::size_t> mec_of(n, npos);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (StateId s : ms[i].states) mec_of[s] = i;
  }

  std::optional<Rational> low;
  for (const auto& v : values) {
    if (v && (!low || *v < *low)) low = *v;
  }
  const Rational filler = low.value_or(Rational(0));

  std::vector<State> states;
  c.hat.assign(n, npos);
  c.r_state.assign(ms.size(), npos);
  for (StateId s = 0; s < n; ++s) {
    const std::size_t i = mec_of[s];
    if (i == npos) {
      c.hat[s] = states.size();
      states.push_back(e.state(s));
      continue;
    }
    if (c.r_state[i] == npos) {
      std::string id = "r[";
      for (std::size_t k = 0; k < ms[i].states.size(); ++k) {
        if (k) id += ",";
        id += e.state(ms[i].states[k]).id;
      }
      c.r_state[i] = states.size();
      states.push_back({id + "]", StateKind::Controllable});
    }
    c.hat[s] = c.r_state[i];
  }

  std::vector<MdpTransition> transitions;
  std::vector<std::size_t> outdeg(states.size(), 0);
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    const auto& tr = e.transition(t);
    if (mec_of[tr.src] != npos && mec_of[tr.src] == mec_of[tr.dst]) continue;
    const bool keep_prob = mec_of[tr.src] == npos && tr.prob;
    transitions.push_back({c.hat[tr.src], c.hat[tr.dst], filler,
                           keep_prob ? tr.prob : std::nullopt});
    c.origin.push_back(t);
    ++outdeg[c.hat[tr.src]];
  }
  c.loop.assign(ms.size(), npos);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (!values[i]) continue;
    c.loop[i] = transitions.size();
    transitions.push_back({c.r_state[i], c.r_state[i], *values[i], std::nullopt});
    c.origin.push_back(npos);
    ++outdeg[c.r_state[i]];
  }
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (outdeg[c.r_state[i]] == 0) throw std::logic_error("MEC without value has no exit");
  }
  c.mdp = FiniteMdp(std::move(states), std::move(transitions));
  return c;
}

Condensation condensation(const Emdp& e, const std::vector<Rational>& mec_limit_values) {
  std::vector<std::optional<Rational>> values(mec_limit_values.begin(), mec_limit_values.end());
  return condensation(e, mecs(e), values);
}

}  // namespace emdp
