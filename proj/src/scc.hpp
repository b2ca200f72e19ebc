#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "captl/state_set.hpp"

namespace captl::detail {

using Adjacency = std::vector<std::vector<StateIndex>>;

/// Iterative Tarjan over the nodes in `active`. Components come out in
/// reverse topological order (every edge leaving a component points into an
/// earlier one); members of each component are sorted ascending.
inline std::vector<std::vector<StateIndex>> strongly_connected_components(const Adjacency& adj,
                                                                           const StateSet& active) {
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::size_t n = adj.size();
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<StateIndex> stack;
    std::vector<std::pair<StateIndex, std::size_t>> frames;
    std::vector<std::vector<StateIndex>> components;
    std::size_t counter = 0;

    for (StateIndex root : active) {
        if (index[root] != unvisited) continue;
        frames.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            if (next < adj[v].size()) {
                StateIndex w = adj[v][next++];
                if (!active.contains(w)) continue;
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            StateIndex done = v;
            frames.pop_back();
            if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
            if (low[done] == index[done]) {
                std::vector<StateIndex> comp;
                StateIndex w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
        }
    }
    return components;
}

} // namespace captl::detail
