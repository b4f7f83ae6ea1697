#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "emdp/model.hpp"
#include "emdp/strategy.hpp"

namespace emdp {

// SplitMix64 (Steele, Lea, Flood).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode);

struct TraceStep {
  std::uint64_t i = 0;  // 1-based step index
  StateId state = 0;    // state reached
  TransitionId transition = 0;
  std::int64_t level = 0;  // level reached
  Rational reward;
  Rational running_mean;
};

struct Trace {
  Configuration start;
  std::vector<TraceStep> steps;
  std::int64_t min_level = 0;  // over the start and every step
  std::int64_t max_level = 0;

  bool safe() const { return min_level >= 0; }
};

// Controllable states follow machine.next; a negative level is recorded, not thrown.
// Throws std::logic_error if the machine has no choice at a visited controllable state or
// picks a transition that does not leave it.
Trace run_trace(const Emdp& e, const StrategyMachine& machine, const Configuration& cfg,
                std::uint64_t steps, std::uint64_t seed);

struct SimReport {
  std::uint64_t episodes = 0;
  std::uint64_t steps = 0;
  std::vector<Rational> episode_means;  // final running mean of each episode
  double mean = 0;
  double stderr_mean = 0;
  std::uint64_t safety_violations = 0;  // episodes whose level went negative
  std::int64_t max_level = 0;
};

// Episode k runs with seed episode_seed(seed, k).
SimReport estimate_mp(const Emdp& e, const StrategyMachine& machine, const Configuration& cfg,
                      std::uint64_t episodes, std::uint64_t steps, std::uint64_t seed);

// One JSON object per line: {"i", "state", "transition", "level", "reward", "running_mean"}.
void write_trace_jsonl(std::ostream& out, const Emdp& e, const Trace& trace);

// Best mean payoff from cfg over all memoryless deterministic strategies of the product with
// counters 0..cap, where leaving the band enters a sink paying min_reward - 1 forever.
// Enumerates strategies over the product states reachable from cfg.
// Throws TooLarge beyond 10^4 product states or 10^6 strategies, BadBounds unless
// 0 <= cfg.counter <= cap.
Rational oracle_value(const Emdp& e, const Configuration& cfg, std::int64_t cap);

}  // namespace emdp
