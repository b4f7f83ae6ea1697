#include "emdp/digraph.hpp"

#include <algorithm>

namespace emdp {

SccDecomposition strongly_connected_components(const Adjacency& succ,
                                               const std::vector<bool>* active) {
  const std::size_t n = succ.size();
  const auto live = [&](std::size_t v) { return !active || (*active)[v]; };
  SccDecomposition out;
  out.component_of.assign(n, npos);
  std::vector<std::size_t> index(n, npos), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  struct Frame {
    std::size_t node;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (std::size_t root = 0; root < n; ++root) {
    if (!live(root) || index[root] != npos) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& frame = call.back();
      const std::size_t v = frame.node;
      if (frame.edge < succ[v].size()) {
        const std::size_t w = succ[v][frame.edge++];
        if (!live(w)) continue;
        if (index[w] == npos) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          out.component_of[w] = out.components.size();
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.components.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return out;
}

std::vector<bool> bottom_components(const Adjacency& succ, const SccDecomposition& scc) {
  std::vector<bool> bottom(scc.components.size(), true);
  for (std::size_t v = 0; v < succ.size(); ++v) {
    const std::size_t c = scc.component_of[v];
    if (c == npos) continue;
    for (std::size_t w : succ[v]) {
      const std::size_t d = scc.component_of[w];
      if (d != npos && d != c) bottom[c] = false;
    }
  }
  return bottom;
}

std::vector<bool> can_reach(const Adjacency& succ, const std::vector<bool>& target) {
  const std::size_t n = succ.size();
  Adjacency pred(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w : succ[v]) pred[w].push_back(v);
  }
  std::vector<bool> seen = target;
  std::vector<std::size_t> queue;
  for (std::size_t v = 0; v < n; ++v) {
    if (seen[v]) queue.push_back(v);
  }
  while (!queue.empty()) {
    const std::size_t w = queue.back();
    queue.pop_back();
    for (std::size_t v : pred[w]) {
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace emdp
