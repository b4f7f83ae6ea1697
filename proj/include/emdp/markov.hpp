#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "emdp/rational.hpp"

namespace emdp {

// A finite Markov chain with expected one-step rewards.
struct MarkovChain {
  std::vector<std::vector<std::pair<std::size_t, Rational>>> next;
  std::vector<Rational> reward;

  std::size_t size() const { return next.size(); }
};

struct ChainAnalysis {
  std::vector<Rational> gain;
  std::vector<Rational> bias;  // empty unless requested; zero at the smallest state of each class
  std::vector<std::size_t> class_of;  // npos for transient states
  std::vector<std::vector<std::size_t>> classes;
};

// Exact gain (long-run average reward) of every state, optionally with a bias vector
// satisfying g + h = r + P h and P g = g.
ChainAnalysis analyze_chain(const MarkovChain& chain, bool with_bias);

// Stationary distribution of an irreducible class given as a sorted state list.
std::vector<Rational> stationary_distribution(const MarkovChain& chain,
                                              const std::vector<std::size_t>& cls);

// Expected sum of per_step[s] over the steps taken before the target is hit, for every
// state. Requires the target to be reached almost surely. Target states get 0.
std::vector<Rational> expected_until(const MarkovChain& chain, const std::vector<bool>& target,
                                     const std::vector<Rational>& per_step);

}  // namespace emdp
