#include "emdp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "emdp/digraph.hpp"
#include "emdp/markov.hpp"

namespace emdp {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode) { return seed ^ episode; }

namespace {

using Wide = __int128;

mpz_class to_mpz(Wide v) {
  const bool negative = v < 0;
  unsigned __int128 u = negative ? -static_cast<unsigned __int128>(v) : v;
  mpz_class z(static_cast<unsigned long>(u >> 64));
  z <<= 64;
  z += mpz_class(static_cast<unsigned long>(u & 0xffffffffffffffffULL));
  return negative ? mpz_class(-z) : z;
}

// Rewards as integers over a common denominator, so running sums stay exact and cheap.
struct ScaledRewards {
  mpz_class denominator = 1;
  std::vector<std::int64_t> numerator;

  explicit ScaledRewards(const Emdp& e) {
    for (const auto& tr : e.transitions()) {
      mpz_lcm(denominator.get_mpz_t(), denominator.get_mpz_t(), tr.reward.get_den_mpz_t());
    }
    for (const auto& tr : e.transitions()) {
      const mpz_class scaled = tr.reward.get_num() * (denominator / tr.reward.get_den());
      if (!scaled.fits_slong_p()) throw std::overflow_error("reward scale exceeds 64 bits");
      numerator.push_back(scaled.get_si());
    }
  }

  Rational mean(Wide sum, std::uint64_t steps) const {
    Rational q(to_mpz(sum), denominator * mpz_class(static_cast<unsigned long>(steps)));
    q.canonicalize();
    return q;
  }
};

// Runs one episode, calling step(i, state, transition, level, sum) after every step.
template <class OnStep>
void simulate(const Emdp& e, const StrategyMachine& machine, const ScaledRewards& rewards,
              const Configuration& cfg, std::uint64_t steps, std::uint64_t seed, OnStep&& step) {
  SplitMix64 rng(seed);
  std::vector<MemoryCell> memory = machine.initial_memory(cfg.state, cfg.counter);
  std::vector<Distribution> chance(e.num_states());
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (!e.is_stochastic(s)) continue;
    std::vector<Choice> choices;
    for (TransitionId t : e.out(s)) choices.push_back({t, *e.transition(t).prob});
    chance[s] = Distribution(std::move(choices));
  }
  StateId state = cfg.state;
  std::int64_t level = cfg.counter;
  Wide sum = 0;
  for (std::uint64_t i = 1; i <= steps; ++i) {
    const double u = rng.uniform();
    TransitionId t;
    if (e.is_stochastic(state)) {
      t = chance[state].sample(u);
    } else {
      const Distribution& d = machine.next(state, memory);
      if (d.empty()) {
        throw std::logic_error("strategy has no choice at " + e.state(state).id);
      }
      t = d.sample(u);
    }
    const auto& tr = e.transition(t);
    if (tr.src != state) {
      throw std::logic_error("strategy chose a transition that does not leave " + e.state(state).id);
    }
    state = tr.dst;
    level += tr.update;
    sum += rewards.numerator[t];
    machine.observe(memory, state, level);
    step(i, state, t, level, sum);
  }
}

}  // namespace

Trace run_trace(const Emdp& e, const StrategyMachine& machine, const Configuration& cfg,
                std::uint64_t steps, std::uint64_t seed) {
  const ScaledRewards rewards(e);
  Trace trace;
  trace.start = cfg;
  trace.min_level = trace.max_level = cfg.counter;
  trace.steps.reserve(steps);
  simulate(e, machine, rewards, cfg, steps, seed,
           [&](std::uint64_t i, StateId s, TransitionId t, std::int64_t level, Wide sum) {
             trace.steps.push_back({i, s, t, level, e.transition(t).reward, rewards.mean(sum, i)});
             trace.min_level = std::min(trace.min_level, level);
             trace.max_level = std::max(trace.max_level, level);
           });
  return trace;
}

SimReport estimate_mp(const Emdp& e, const StrategyMachine& machine, const Configuration& cfg,
                      std::uint64_t episodes, std::uint64_t steps, std::uint64_t seed) {
  if (episodes == 0 || steps == 0) throw std::invalid_argument("episodes and steps must be positive");
  const ScaledRewards rewards(e);
  SimReport report;
  report.episodes = episodes;
  report.steps = steps;
  report.max_level = cfg.counter;
  std::vector<double> means;
  for (std::uint64_t k = 0; k < episodes; ++k) {
    std::int64_t low = cfg.counter;
    Wide total = 0;
    simulate(e, machine, rewards, cfg, steps, episode_seed(seed, k),
             [&](std::uint64_t, StateId, TransitionId, std::int64_t level, Wide sum) {
               low = std::min(low, level);
               report.max_level = std::max(report.max_level, level);
               total = sum;
             });
    if (low < 0) ++report.safety_violations;
    report.episode_means.push_back(rewards.mean(total, steps));
    means.push_back(report.episode_means.back().get_d());
  }
  double sum = 0;
  for (double m : means) sum += m;
  report.mean = sum / static_cast<double>(episodes);
  if (episodes > 1) {
    double sq = 0;
    for (double m : means) sq += (m - report.mean) * (m - report.mean);
    report.stderr_mean = std::sqrt(sq / static_cast<double>(episodes - 1)) /
                         std::sqrt(static_cast<double>(episodes));
  }
  return report;
}

void write_trace_jsonl(std::ostream& out, const Emdp& e, const Trace& trace) {
  for (const auto& step : trace.steps) {
    nlohmann::ordered_json j;
    j["i"] = step.i;
    j["state"] = e.state(step.state).id;
    j["transition"] = step.transition;
    j["level"] = step.level;
    j["reward"] = rational_to_json(step.reward);
    j["running_mean"] = rational_to_json(step.running_mean);
    out << j.dump() << '\n';
  }
}

Rational oracle_value(const Emdp& e, const Configuration& cfg, std::int64_t cap) {
  if (cap < 0 || cfg.counter < 0 || cfg.counter > cap) {
    throw BadBounds("configuration counter outside [0, cap]");
  }
  const std::size_t n = e.num_states();
  if (static_cast<double>(n) * static_cast<double>(cap + 1) + 1 > 1e4) {
    throw TooLarge("more than 10^4 product states");
  }
  // Product states reachable from cfg; the sink is the key (npos, 0).
  using Key = std::pair<std::size_t, std::int64_t>;
  const Key sink{npos, 0};
  std::map<Key, std::size_t> id;
  std::vector<Key> keys;
  const auto intern = [&](Key k) {
    const auto [it, fresh] = id.emplace(k, keys.size());
    if (fresh) keys.push_back(k);
    return it->second;
  };
  intern({cfg.state, cfg.counter});
  // succ[i]: (transition of e or npos for the sink loop, product successor).
  std::vector<std::vector<std::pair<TransitionId, std::size_t>>> succ;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Key k = keys[i];
    std::vector<std::pair<TransitionId, std::size_t>> out;
    if (k == sink) {
      out.emplace_back(npos, i);
    } else {
      for (TransitionId t : e.out(k.first)) {
        const auto& tr = e.transition(t);
        const std::int64_t level = k.second + tr.update;
        out.emplace_back(t, intern(level < 0 || level > cap ? sink : Key{tr.dst, level}));
      }
    }
    succ.push_back(std::move(out));
  }

  std::vector<std::size_t> choosers;
  double count = 1;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] == sink || e.is_stochastic(keys[i].first)) continue;
    if (succ[i].size() > 1) {
      choosers.push_back(i);
      count *= static_cast<double>(succ[i].size());
    }
  }
  if (count > 1e6) throw TooLarge("more than 10^6 memoryless strategies");

  const Rational sink_reward = min_reward(e) - 1;
  std::vector<std::size_t> digit(keys.size(), 0);
  std::optional<Rational> best;
  while (true) {
    MarkovChain chain;
    chain.next.resize(keys.size());
    chain.reward.assign(keys.size(), Rational(0));
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i] == sink) {
        chain.next[i].emplace_back(i, Rational(1));
        chain.reward[i] = sink_reward;
      } else if (e.is_stochastic(keys[i].first)) {
        for (const auto& [t, j] : succ[i]) {
          chain.next[i].emplace_back(j, *e.transition(t).prob);
          chain.reward[i] += *e.transition(t).prob * e.transition(t).reward;
        }
      } else {
        const auto& [t, j] = succ[i][digit[i]];
        chain.next[i].emplace_back(j, Rational(1));
        chain.reward[i] = e.transition(t).reward;
      }
    }
    const Rational v = analyze_chain(chain, false).gain[0];
    if (!best || v > *best) best = v;
    std::size_t c = 0;
    while (c < choosers.size()) {
      const std::size_t i = choosers[c];
      if (++digit[i] < succ[i].size()) break;
      digit[i] = 0;
      ++c;
    }
    if (c == choosers.size()) break;
  }
  return *best;
}

}  // namespace emdp
