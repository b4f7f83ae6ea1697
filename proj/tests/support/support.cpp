#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "emdp/digraph.hpp"

namespace emdp::testing {

std::string fixture_path(const std::string& name) {
  return std::string(EMDP_FIXTURE_DIR) + "/" + name + ".emdp";
}

Emdp load_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_emdp(buf.str());
}

Emdp random_emdp(std::mt19937_64& rng, const RandomParams& p) {
  const auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  const auto n = static_cast<std::size_t>(pick(1, static_cast<std::int64_t>(p.max_states)));
  const std::int64_t m = pick(0, p.max_update);
  EmdpBuilder b;
  std::vector<bool> stochastic(n);
  for (std::size_t s = 0; s < n; ++s) {
    stochastic[s] = pick(0, 2) == 0;
    b.add_state("s" + std::to_string(s),
                stochastic[s] ? StateKind::Stochastic : StateKind::Controllable);
  }
  for (std::size_t s = 0; s < n; ++s) {
    const auto k = static_cast<std::size_t>(pick(1, static_cast<std::int64_t>(p.max_out)));
    std::vector<std::int64_t> weights(k);
    for (auto& w : weights) w = pick(1, 3);
    const std::int64_t total = std::accumulate(weights.begin(), weights.end(), std::int64_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const auto dst = static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(n) - 1));
      std::optional<Rational> prob;
      if (stochastic[s]) prob = make_rational(weights[i], total);
      b.add_transition("s" + std::to_string(s), "s" + std::to_string(dst), pick(-m, m),
                       Rational(pick(-p.max_reward, p.max_reward)), prob);
    }
  }
  auto e = b.build();
  validate(e);
  return e;
}

std::vector<Mec> brute_force_mecs(const Emdp& e) {
  const std::size_t n = e.num_states();
  std::vector<std::uint32_t> ecs;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto in = [&](StateId s) { return (mask >> s) & 1u; };
    bool ok = true;
    Adjacency succ(n);
    std::vector<bool> active(n);
    for (StateId s = 0; s < n && ok; ++s) {
      if (!in(s)) continue;
      active[s] = true;
      bool has_inside = false;
      for (TransitionId t : e.out(s)) {
        const StateId d = e.transition(t).dst;
        if (in(d)) {
          has_inside = true;
          succ[s].push_back(d);
        } else if (e.is_stochastic(s)) {
          ok = false;
        }
      }
      ok = ok && has_inside;
    }
    if (!ok) continue;
    if (strongly_connected_components(succ, &active).components.size() != 1) continue;
    ecs.push_back(mask);
  }
  std::vector<Mec> out;
  for (auto mask : ecs) {
    const bool maximal = std::none_of(ecs.begin(), ecs.end(), [&](std::uint32_t other) {
      return other != mask && (other & mask) == mask;
    });
    if (!maximal) continue;
    Mec m;
    for (StateId s = 0; s < n; ++s) {
      if ((mask >> s) & 1u) m.states.push_back(s);
    }
    for (TransitionId t = 0; t < e.num_transitions(); ++t) {
      const auto& tr = e.transition(t);
      if (((mask >> tr.src) & 1u) && ((mask >> tr.dst) & 1u)) m.transitions.push_back(t);
    }
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(),
            [](const Mec& a, const Mec& b) { return a.states.front() < b.states.front(); });
  return out;
}

namespace {

class ConfigGame {
 public:
  ConfigGame(const Emdp& e, std::int64_t cap) : e_(e), cap_(cap) {}

  std::size_t size() const { return e_.num_states() * width(); }
  std::size_t index(StateId s, std::int64_t k) const { return s * width() + k; }

  // npos when the move drops below zero.
  std::size_t successor(StateId s, std::int64_t k, TransitionId t) const {
    const auto& tr = e_.transition(t);
    const std::int64_t next = std::min(cap_, k + tr.update);
    return next < 0 ? npos : index(tr.dst, next);
  }

  // Greatest subset of `region` in which the controller can stay surely.
  std::vector<bool> trap(std::vector<bool> region) const {
    for (bool changed = true; changed;) {
      changed = false;
      for (StateId s = 0; s < e_.num_states(); ++s) {
        for (std::int64_t k = 0; k <= cap_; ++k) {
          const auto i = index(s, k);
          if (!region[i]) continue;
          const auto good = [&](TransitionId t) {
            const auto j = successor(s, k, t);
            return j != npos && region[j];
          };
          const auto outs = e_.out(s);
          const bool keep = e_.is_stochastic(s) ? std::all_of(outs.begin(), outs.end(), good)
                                                : std::any_of(outs.begin(), outs.end(), good);
          if (!keep) {
            region[i] = false;
            changed = true;
          }
        }
      }
    }
    return region;
  }

  LevelMap thresholds(const std::vector<bool>& region, std::size_t states) const {
    LevelMap out(states, Level::infinity());
    for (StateId s = 0; s < states; ++s) {
      for (std::int64_t k = 0; k <= cap_; ++k) {
        if (region[index(s, k)]) {
          out[s] = Level(k);
          break;
        }
      }
    }
    return out;
  }

  std::int64_t cap() const { return cap_; }

 private:
  std::size_t width() const { return static_cast<std::size_t>(cap_ + 1); }

  const Emdp& e_;
  std::int64_t cap_;
};

}  // namespace

LevelMap oracle_min_safe(const Emdp& e, std::int64_t cap) {
  const ConfigGame game(e, cap);
  return game.thresholds(game.trap(std::vector<bool>(game.size(), true)), e.num_states());
}

LevelMap oracle_min_pump(const Emdp& e, std::int64_t cap) {
  const auto gadget = pump_gadget(e);
  const auto& g = gadget.model;
  const ConfigGame game(g, cap);
  std::vector<bool> x = game.trap(std::vector<bool>(game.size(), true));
  for (;;) {
    std::vector<bool> reach(game.size(), false);
    for (StateId s = 0; s < g.num_states(); ++s) {
      if (!gadget.buchi[s]) continue;
      for (std::int64_t k = 0; k <= cap; ++k) reach[game.index(s, k)] = x[game.index(s, k)];
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (StateId s = 0; s < g.num_states(); ++s) {
        for (std::int64_t k = 0; k <= cap; ++k) {
          const auto i = game.index(s, k);
          if (!x[i] || reach[i]) continue;
          for (TransitionId t : g.out(s)) {
            const auto j = game.successor(s, k, t);
            if (j != npos && reach[j]) {
              reach[i] = true;
              changed = true;
              break;
            }
          }
        }
      }
    }
    auto next = game.trap(std::move(reach));
    if (next == x) break;
    x = std::move(next);
  }
  return game.thresholds(x, e.num_states());
}

}  // namespace emdp::testing
