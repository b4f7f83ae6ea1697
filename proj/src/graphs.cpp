#include "emdp/graphs.hpp"

#include <algorithm>
#include <deque>

#include "emdp/digraph.hpp"
#include "emdp/markov.hpp"

namespace emdp {

std::vector<Mec> mecs(const Emdp& e) {
  return mecs_within(e, std::vector<bool>(e.num_states(), true),
                     std::vector<bool>(e.num_transitions(), true));
}

std::vector<Mec> mecs_within(const Emdp& e, const std::vector<bool>& allowed_state,
                             const std::vector<bool>& allowed_transition) {
  const std::size_t n = e.num_states();
  std::vector<bool> state_on = allowed_state;
  std::vector<bool> trans_on(e.num_transitions());
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    const auto& tr = e.transition(t);
    trans_on[t] = allowed_transition[t] && state_on[tr.src] && state_on[tr.dst];
  }
  for (bool changed = true; changed;) {
    changed = false;
    // Drop states that cannot stay: controllable without an active move, stochastic
    // with any inactive branch.
    for (bool pruned = true; pruned;) {
      pruned = false;
      for (StateId s = 0; s < n; ++s) {
        if (!state_on[s]) continue;
        const auto outs = e.out(s);
        const bool keep =
            e.is_stochastic(s)
                ? std::all_of(outs.begin(), outs.end(), [&](TransitionId t) { return trans_on[t]; })
                : std::any_of(outs.begin(), outs.end(), [&](TransitionId t) { return trans_on[t]; });
        if (keep) continue;
        state_on[s] = false;
        for (TransitionId t : e.in(s)) trans_on[t] = false;
        for (TransitionId t : e.out(s)) trans_on[t] = false;
        pruned = changed = true;
      }
    }
    Adjacency succ(n);
    for (TransitionId t = 0; t < e.num_transitions(); ++t) {
      if (trans_on[t]) succ[e.transition(t).src].push_back(e.transition(t).dst);
    }
    const auto scc = strongly_connected_components(succ, &state_on);
    for (TransitionId t = 0; t < e.num_transitions(); ++t) {
      if (!trans_on[t]) continue;
      const auto& tr = e.transition(t);
      if (scc.component_of[tr.src] != scc.component_of[tr.dst]) {
        trans_on[t] = false;
        changed = true;
      }
    }
  }
  Adjacency succ(n);
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    if (trans_on[t]) succ[e.transition(t).src].push_back(e.transition(t).dst);
  }
  const auto scc = strongly_connected_components(succ, &state_on);
  std::vector<Mec> out;
  for (const auto& comp : scc.components) {
    Mec m;
    m.states = comp;
    for (StateId s : comp) {
      for (TransitionId t : e.out(s)) {
        if (trans_on[t]) m.transitions.push_back(t);
      }
    }
    std::sort(m.transitions.begin(), m.transitions.end());
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(),
            [](const Mec& a, const Mec& b) { return a.states.front() < b.states.front(); });
  return out;
}

bool is_strongly_connected(const Emdp& e) {
  Adjacency succ(e.num_states());
  for (const auto& t : e.transitions()) succ[t.src].push_back(t.dst);
  return strongly_connected_components(succ).components.size() == 1;
}

SubModel mec_model(const Emdp& e, const Mec& m) {
  std::vector<bool> keep_state(e.num_states(), false), keep_trans(e.num_transitions(), false);
  for (StateId s : m.states) keep_state[s] = true;
  for (TransitionId t : m.transitions) keep_trans[t] = true;
  return restrict_model(e, keep_state, keep_trans);
}

Attractor almost_sure_attractor(const Emdp& e, const std::vector<bool>& target,
                                const std::vector<bool>* allowed_state,
                                const std::vector<bool>* allowed_transition) {
  const std::size_t n = e.num_states();
  const auto state_ok = [&](StateId s) { return !allowed_state || (*allowed_state)[s]; };
  const auto trans_ok = [&](TransitionId t) {
    return !allowed_transition || (*allowed_transition)[t];
  };
  std::vector<bool> w(n);
  for (StateId s = 0; s < n; ++s) w[s] = state_ok(s);

  std::vector<std::size_t> rank(n, npos);
  for (;;) {
    // Closure: stochastic states may not leak out of w; controllable ones need a move into w.
    for (bool pruned = true; pruned;) {
      pruned = false;
      for (StateId s = 0; s < n; ++s) {
        if (!w[s] || target[s]) continue;
        bool keep;
        if (e.is_stochastic(s)) {
          keep = std::all_of(e.out(s).begin(), e.out(s).end(), [&](TransitionId t) {
            return trans_ok(t) && w[e.transition(t).dst];
          });
        } else {
          keep = std::any_of(e.out(s).begin(), e.out(s).end(), [&](TransitionId t) {
            return trans_ok(t) && w[e.transition(t).dst];
          });
        }
        if (!keep) {
          w[s] = false;
          pruned = true;
        }
      }
    }
    // Backward BFS from the target inside w.
    std::fill(rank.begin(), rank.end(), npos);
    std::deque<StateId> queue;
    for (StateId s = 0; s < n; ++s) {
      if (w[s] && target[s]) {
        rank[s] = 0;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      const StateId v = queue.front();
      queue.pop_front();
      for (TransitionId t : e.in(v)) {
        const StateId u = e.transition(t).src;
        if (!w[u] || rank[u] != npos || !trans_ok(t)) continue;
        rank[u] = rank[v] + 1;
        queue.push_back(u);
      }
    }
    bool shrunk = false;
    for (StateId s = 0; s < n; ++s) {
      if (w[s] && rank[s] == npos) {
        w[s] = false;
        shrunk = true;
      }
    }
    if (!shrunk) break;
  }

  Attractor out;
  out.winning = w;
  out.rank = rank;
  out.choice.assign(n, std::nullopt);
  for (StateId s = 0; s < n; ++s) {
    if (!w[s] || target[s] || e.is_stochastic(s)) continue;
    for (TransitionId t : e.out(s)) {
      const StateId d = e.transition(t).dst;
      if (trans_ok(t) && w[d] && rank[d] + 1 == rank[s]) {
        out.choice[s] = t;
        break;
      }
    }
  }
  return out;
}

MarkovChain induced_chain(const Emdp& e, const DistributionTable& strategy) {
  MarkovChain chain;
  chain.next.resize(e.num_states());
  chain.reward.assign(e.num_states(), Rational(0));
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (e.is_stochastic(s)) {
      for (TransitionId t : e.out(s)) {
        const auto& tr = e.transition(t);
        chain.next[s].emplace_back(tr.dst, *tr.prob);
        chain.reward[s] += *tr.prob * tr.reward;
      }
    } else {
      for (const auto& c : strategy.at(s).choices()) {
        const auto& tr = e.transition(c.transition);
        chain.next[s].emplace_back(tr.dst, c.prob);
        chain.reward[s] += c.prob * tr.reward;
      }
    }
  }
  return chain;
}

ReachStrategy reach_strategy(const Emdp& e, const std::vector<bool>& target) {
  const auto attr = almost_sure_attractor(e, target);
  std::vector<StateId> losing;
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (!attr.winning[s]) losing.push_back(s);
  }
  if (!losing.empty()) {
    std::string names;
    for (StateId s : losing) names += (names.empty() ? "" : ", ") + e.state(s).id;
    throw NotAlmostSurelyReachable(losing, "target not reached almost surely from: " + names);
  }
  ReachStrategy out;
  out.choice.assign(e.num_states(), 0);
  DistributionTable table(e.num_states());
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (e.is_stochastic(s)) continue;
    out.choice[s] = attr.choice[s] ? *attr.choice[s] : e.out(s).front();
    table[s] = Distribution::dirac(out.choice[s]);
  }
  const auto chain = induced_chain(e, table);
  out.expected_steps =
      expected_until(chain, target, std::vector<Rational>(e.num_states(), Rational(1)));
  out.machine = std::make_shared<TableMachine>(std::move(table));
  return out;
}

}  // namespace emdp
