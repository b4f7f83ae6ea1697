#pragma once

#include <cstddef>
#include <vector>

namespace emdp {

using Adjacency = std::vector<std::vector<std::size_t>>;

struct SccDecomposition {
  std::vector<std::size_t> component_of;
  // Reverse topological order: a component appears before every component that reaches it.
  std::vector<std::vector<std::size_t>> components;
};

// Iterative Tarjan. Nodes with active[v] == false are ignored (component_of = npos).
SccDecomposition strongly_connected_components(const Adjacency& succ,
                                               const std::vector<bool>* active = nullptr);

// Components without edges to other components.
std::vector<bool> bottom_components(const Adjacency& succ, const SccDecomposition& scc);

// Nodes from which some node in target is reachable, following succ edges.
std::vector<bool> can_reach(const Adjacency& succ, const std::vector<bool>& target);

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace emdp
