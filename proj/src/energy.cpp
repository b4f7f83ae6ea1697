#include "emdp/energy.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "emdp/digraph.hpp"
#include "emdp/graphs.hpp"

namespace emdp {

std::string to_string(const Level& l) {
  return l.is_finite() ? std::to_string(l.value()) : "inf";
}

namespace {

// Level needed before taking t so that the successor is at least `after`.
Level need_before(const Level& after, std::int64_t update) {
  if (!after.is_finite()) return after;
  return Level(std::max<std::int64_t>(0, after.value() - update));
}

Level lift_candidate(const Emdp& e, const LevelMap& levels, StateId s) {
  const auto outs = e.out(s);
  if (e.is_stochastic(s)) {
    Level worst(0);
    for (TransitionId t : outs) {
      const auto& tr = e.transition(t);
      worst = std::max(worst, need_before(levels[tr.dst], tr.update));
    }
    return worst;
  }
  Level best = Level::infinity();
  for (TransitionId t : outs) {
    const auto& tr = e.transition(t);
    best = std::min(best, need_before(levels[tr.dst], tr.update));
  }
  return best;
}

std::string fresh_id(const Emdp& e, std::vector<std::string>& taken, std::string id) {
  const auto used = [&](const std::string& x) {
    return e.find_state(x).has_value() || std::find(taken.begin(), taken.end(), x) != taken.end();
  };
  while (used(id)) id += "'";
  taken.push_back(id);
  return id;
}

// Thresholds from which B can be reached with positive probability while staying above W.
LevelMap positive_reach(const Emdp& g, const LevelMap& w, const std::vector<bool>& buchi) {
  const std::size_t n = g.num_states();
  LevelMap z(n, Level::infinity());
  for (StateId s = 0; s < n; ++s) {
    if (buchi[s]) z[s] = w[s];
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId s = 0; s < n; ++s) {
      if (buchi[s] || !w[s].is_finite()) continue;
      Level best = Level::infinity();
      for (TransitionId t : g.out(s)) {
        const auto& tr = g.transition(t);
        if (!z[tr.dst].is_finite()) continue;
        best = std::min(best, Level(z[tr.dst].value() - tr.update));
      }
      if (!best.is_finite()) continue;
      const Level cand = std::max(w[s], best);
      if (cand < z[s]) {
        z[s] = cand;
        changed = true;
      }
    }
  }
  return z;
}

// Longest-path relaxation over the sub-graph on `inside`; returns the transitions of a
// cycle with positive total update, or an empty vector.
std::vector<TransitionId> positive_cycle(const Emdp& e, const std::vector<bool>& inside,
                                         const std::vector<bool>& allowed) {
  const std::size_t n = e.num_states();
  std::vector<std::int64_t> dist(n, 0);
  std::vector<std::size_t> parent(n, npos);
  std::size_t count = 0;
  for (StateId s = 0; s < n; ++s) count += inside[s];
  StateId relaxed = npos;
  for (std::size_t round = 0; round <= count; ++round) {
    relaxed = npos;
    for (TransitionId t = 0; t < e.num_transitions(); ++t) {
      const auto& tr = e.transition(t);
      if (!allowed[t] || !inside[tr.src] || !inside[tr.dst]) continue;
      if (dist[tr.src] + tr.update > dist[tr.dst]) {
        dist[tr.dst] = dist[tr.src] + tr.update;
        parent[tr.dst] = t;
        relaxed = tr.dst;
      }
    }
    if (relaxed == npos) return {};
  }
  // Walk the parent chain until a state repeats; the repeated part is the cycle.
  std::vector<bool> seen(n, false);
  StateId v = relaxed;
  while (!seen[v]) {
    seen[v] = true;
    if (parent[v] == npos) throw std::logic_error("broken parent chain");
    v = e.transition(parent[v]).src;
  }
  std::vector<TransitionId> cycle;
  StateId u = v;
  do {
    cycle.push_back(parent[u]);
    u = e.transition(parent[u]).src;
  } while (u != v);
  std::reverse(cycle.begin(), cycle.end());
  return cycle;
}

}  // namespace

LevelMap lift_safe_levels(const Emdp& e, LevelMap floor, std::int64_t cap) {
  const std::size_t n = e.num_states();
  LevelMap levels = std::move(floor);
  for (auto& l : levels) {
    if (l.is_finite() && l.value() > cap) l = Level::infinity();
  }
  std::deque<StateId> work;
  std::vector<bool> queued(n, true);
  for (StateId s = 0; s < n; ++s) work.push_back(s);
  while (!work.empty()) {
    const StateId s = work.front();
    work.pop_front();
    queued[s] = false;
    if (!levels[s].is_finite()) continue;
    Level cand = std::max(levels[s], lift_candidate(e, levels, s));
    if (cand.is_finite() && cand.value() > cap) cand = Level::infinity();
    if (cand == levels[s]) continue;
    levels[s] = cand;
    for (TransitionId t : e.in(s)) {
      const StateId p = e.transition(t).src;
      if (!queued[p]) {
        queued[p] = true;
        work.push_back(p);
      }
    }
  }
  return levels;
}

LevelMap min_safe(const Emdp& e) {
  const auto n = static_cast<std::int64_t>(e.num_states());
  return lift_safe_levels(e, LevelMap(e.num_states(), Level(0)), (n - 1) * max_update(e));
}

MachinePtr safe_strategy(const Emdp& e) { return safe_strategy(e, min_safe(e)); }

MachinePtr safe_strategy(const Emdp& e, const LevelMap& ms) {
  if (std::none_of(ms.begin(), ms.end(), [](const Level& l) { return l.is_finite(); })) {
    throw NoSafeState();
  }
  std::vector<std::optional<TransitionId>> choice(e.num_states());
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (e.is_stochastic(s)) continue;
    choice[s] = e.out(s).front();
    if (!ms[s].is_finite()) continue;
    for (TransitionId t : e.out(s)) {
      const auto& tr = e.transition(t);
      if (ms[tr.dst].is_finite() && ms[s].value() + tr.update >= ms[tr.dst].value()) {
        choice[s] = t;
        break;
      }
    }
  }
  return make_deterministic(e.num_states(), choice);
}

PumpGadget pump_gadget(const Emdp& e) {
  std::vector<State> states = e.states();
  std::vector<Transition> transitions;
  std::vector<std::string> taken;
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    const auto& tr = e.transition(t);
    const std::string base = "g" + std::to_string(t) + "." + e.state(tr.src).id;
    const StateId se = states.size();
    states.push_back({fresh_id(e, taken, base), StateKind::Controllable});
    const StateId sp = states.size();
    states.push_back({fresh_id(e, taken, base + ".dec"), StateKind::Controllable});
    transitions.push_back({tr.src, se, tr.update, tr.reward, tr.prob});
    transitions.push_back({se, tr.dst, 0, Rational(0), std::nullopt});
    transitions.push_back({se, sp, -1, Rational(0), std::nullopt});
    transitions.push_back({sp, se, 0, Rational(0), std::nullopt});
  }
  PumpGadget out{Emdp(std::move(states), std::move(transitions)), {}};
  out.buchi.assign(out.model.num_states(), false);
  for (StateId s = e.num_states() + 1; s < out.model.num_states(); s += 2) out.buchi[s] = true;
  return out;
}

LevelMap min_pump(const Emdp& e) {
  const auto gadget = pump_gadget(e);
  const auto& g = gadget.model;
  const std::int64_t m = max_update(e);
  const std::int64_t bound = 3 * static_cast<std::int64_t>(e.num_states()) * m;
  const std::int64_t cap = bound + m + 1;

  LevelMap w = lift_safe_levels(g, LevelMap(g.num_states(), Level(0)), cap);
  for (;;) {
    LevelMap next = lift_safe_levels(g, positive_reach(g, w, gadget.buchi), cap);
    if (next == w) break;
    w = std::move(next);
  }
  LevelMap out(e.num_states());
  for (StateId s = 0; s < e.num_states(); ++s) {
    out[s] = (w[s].is_finite() && w[s].value() <= bound) ? w[s] : Level::infinity();
  }
  return out;
}

MachinePtr pumping_strategy(const Emdp& e) { return pumping_strategy(e, min_pump(e)); }

MachinePtr pumping_strategy(const Emdp& e, const LevelMap& mp) {
  const std::size_t n = e.num_states();
  std::vector<bool> pumpable(n);
  for (StateId s = 0; s < n; ++s) pumpable[s] = mp[s].is_finite();
  if (std::none_of(pumpable.begin(), pumpable.end(), [](bool b) { return b; })) {
    throw NoPumpableState();
  }
  std::vector<bool> allowed(e.num_transitions(), false);
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    const auto& tr = e.transition(t);
    if (!pumpable[tr.src] || !pumpable[tr.dst]) continue;
    allowed[t] = e.is_stochastic(tr.src) || mp[tr.src].value() + tr.update >= mp[tr.dst].value();
  }

  std::vector<std::optional<TransitionId>> choice(n);
  std::vector<bool> covered(n, false);
  for (;;) {
    std::vector<bool> open(n);
    bool any = false;
    for (StateId s = 0; s < n; ++s) {
      open[s] = pumpable[s] && !covered[s];
      any = any || open[s];
    }
    if (!any) break;
    const auto cycle = positive_cycle(e, open, allowed);
    if (cycle.empty()) throw std::logic_error("pumpable states without a positive cycle");
    std::vector<bool> target = covered;
    for (TransitionId t : cycle) {
      const StateId s = e.transition(t).src;
      target[s] = true;
      if (e.is_controllable(s)) choice[s] = t;
    }
    const auto attr = almost_sure_attractor(e, target, &pumpable, &allowed);
    for (StateId s = 0; s < n; ++s) {
      if (target[s] || !attr.winning[s]) continue;
      if (e.is_controllable(s)) choice[s] = attr.choice[s];
      covered[s] = true;
    }
    for (StateId s = 0; s < n; ++s) covered[s] = covered[s] || target[s];
  }
  for (StateId s = 0; s < n; ++s) {
    if (e.is_controllable(s) && !choice[s]) choice[s] = e.out(s).front();
  }
  return make_deterministic(n, choice);
}

Emdp safety_gadget(const Emdp& e) {
  std::vector<State> states = e.states();
  std::vector<Transition> transitions;
  std::vector<std::string> taken;
  const std::int64_t boost = max_update(e) + 1;
  const Rational half(1, 2);
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    const auto& tr = e.transition(t);
    const StateId mid = states.size();
    states.push_back(
        {fresh_id(e, taken, "p" + std::to_string(t) + "." + e.state(tr.src).id + "." +
                                e.state(tr.dst).id),
         StateKind::Stochastic});
    transitions.push_back({tr.src, mid, tr.update, tr.reward, tr.prob});
    transitions.push_back({mid, mid, boost, Rational(0), half});
    transitions.push_back({mid, tr.dst, 0, Rational(0), half});
  }
  return Emdp(std::move(states), std::move(transitions));
}

}  // namespace emdp
