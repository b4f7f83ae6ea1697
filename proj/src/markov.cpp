#include "emdp/markov.hpp"

#include <stdexcept>

#include "emdp/digraph.hpp"
#include "emdp/linalg.hpp"

namespace emdp {

namespace {

Adjacency successors(const MarkovChain& chain) {
  Adjacency succ(chain.size());
  for (std::size_t s = 0; s < chain.size(); ++s) {
    for (const auto& [t, p] : chain.next[s]) succ[s].push_back(t);
  }
  return succ;
}

// Solves (I - P_TT) x = rhs over the states in `transient` (sorted).
std::vector<Rational> solve_transient(const MarkovChain& chain,
                                      const std::vector<std::size_t>& transient,
                                      const std::vector<std::size_t>& local,
                                      const std::vector<Rational>& rhs) {
  SparseSystem sys(transient.size());
  for (std::size_t i = 0; i < transient.size(); ++i) {
    const std::size_t s = transient[i];
    sys.add(i, i, Rational(1));
    for (const auto& [t, p] : chain.next[s]) {
      if (local[t] != npos) sys.add(i, local[t], -p);
    }
    sys.set_rhs(i, rhs[i]);
  }
  return sys.solve().front();
}

}  // namespace

ChainAnalysis analyze_chain(const MarkovChain& chain, bool with_bias) {
  const std::size_t n = chain.size();
  const Adjacency succ = successors(chain);
  const auto scc = strongly_connected_components(succ);
  const auto bottom = bottom_components(succ, scc);

  ChainAnalysis out;
  out.gain.assign(n, Rational(0));
  if (with_bias) out.bias.assign(n, Rational(0));
  out.class_of.assign(n, npos);
  for (std::size_t c = 0; c < scc.components.size(); ++c) {
    if (!bottom[c]) continue;
    for (std::size_t s : scc.components[c]) out.class_of[s] = out.classes.size();
    out.classes.push_back(scc.components[c]);
  }

  // Per recurrent class: unknowns h(s) for s != ref, then g; h(ref) = 0.
  for (const auto& cls : out.classes) {
    const std::size_t m = cls.size();
    std::vector<std::size_t> local(n, npos);
    for (std::size_t i = 1; i < m; ++i) local[cls[i]] = i - 1;
    const std::size_t g_col = m - 1;
    SparseSystem sys(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t s = cls[i];
      if (i > 0) sys.add(i, local[s], Rational(1));
      for (const auto& [t, p] : chain.next[s]) {
        if (local[t] != npos) sys.add(i, local[t], -p);
      }
      sys.add(i, g_col, Rational(1));
      sys.set_rhs(i, chain.reward[s]);
    }
    const auto x = sys.solve().front();
    for (std::size_t i = 0; i < m; ++i) {
      out.gain[cls[i]] = x[g_col];
      if (with_bias && i > 0) out.bias[cls[i]] = x[local[cls[i]]];
    }
  }

  std::vector<std::size_t> transient;
  std::vector<std::size_t> local(n, npos);
  for (std::size_t s = 0; s < n; ++s) {
    if (out.class_of[s] == npos) {
      local[s] = transient.size();
      transient.push_back(s);
    }
  }
  if (transient.empty()) return out;

  std::vector<Rational> rhs(transient.size(), Rational(0));
  for (std::size_t i = 0; i < transient.size(); ++i) {
    for (const auto& [t, p] : chain.next[transient[i]]) {
      if (local[t] == npos) rhs[i] += p * out.gain[t];
    }
  }
  const auto g = solve_transient(chain, transient, local, rhs);
  for (std::size_t i = 0; i < transient.size(); ++i) out.gain[transient[i]] = g[i];
  if (with_bias) {
    for (std::size_t i = 0; i < transient.size(); ++i) {
      const std::size_t s = transient[i];
      Rational v = chain.reward[s] - g[i];
      for (const auto& [t, p] : chain.next[s]) {
        if (local[t] == npos) v += p * out.bias[t];
      }
      rhs[i] = std::move(v);
    }
    const auto h = solve_transient(chain, transient, local, rhs);
    for (std::size_t i = 0; i < transient.size(); ++i) out.bias[transient[i]] = h[i];
  }
  return out;
}

std::vector<Rational> stationary_distribution(const MarkovChain& chain,
                                              const std::vector<std::size_t>& cls) {
  const std::size_t m = cls.size();
  std::vector<std::size_t> local(chain.size(), npos);
  for (std::size_t i = 0; i < m; ++i) local[cls[i]] = i;
  // pi (I - P) = 0 with the first balance equation replaced by sum pi = 1.
  SparseSystem sys(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t s = cls[i];
    for (const auto& [t, p] : chain.next[s]) {
      if (local[t] == npos) throw std::invalid_argument("class is not closed");
      if (local[t] != 0) sys.add(local[t], i, -p);
    }
    if (i != 0) sys.add(i, i, Rational(1));
    sys.add(0, i, Rational(1));
  }
  sys.set_rhs(0, Rational(1));
  return sys.solve().front();
}

std::vector<Rational> expected_until(const MarkovChain& chain, const std::vector<bool>& target,
                                     const std::vector<Rational>& per_step) {
  const std::size_t n = chain.size();
  std::vector<std::size_t> others;
  std::vector<std::size_t> local(n, npos);
  for (std::size_t s = 0; s < n; ++s) {
    if (!target[s]) {
      local[s] = others.size();
      others.push_back(s);
    }
  }
  std::vector<Rational> out(n, Rational(0));
  if (others.empty()) return out;
  std::vector<Rational> rhs(others.size());
  for (std::size_t i = 0; i < others.size(); ++i) rhs[i] = per_step[others[i]];
  const auto x = solve_transient(chain, others, local, rhs);
  for (std::size_t i = 0; i < others.size(); ++i) out[others[i]] = x[i];
  return out;
}

}  // namespace emdp
