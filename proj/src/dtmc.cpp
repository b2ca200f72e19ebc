#include "captl/dtmc.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <deque>

#include "captl/errors.hpp"
#include "scc.hpp"

namespace captl {

namespace {

constexpr std::size_t kDirectSolveLimit = 2000;
constexpr double kIterationTolerance = 1e-9;
constexpr std::size_t kIterationCap = 1000000;

StateSet reachable(const Dtmc& chain) {
    StateSet seen(chain.num_states());
    std::deque<StateIndex> queue{chain.initial};
    seen.insert(chain.initial);
    while (!queue.empty()) {
        StateIndex s = queue.front();
        queue.pop_front();
        for (const Branch& b : chain.rows[s])
            if (!seen.contains(b.to)) {
                seen.insert(b.to);
                queue.push_back(b.to);
            }
    }
    return seen;
}

detail::Adjacency adjacency(const Dtmc& chain) {
    detail::Adjacency adj(chain.num_states());
    for (StateIndex s = 0; s < chain.num_states(); ++s)
        for (const Branch& b : chain.rows[s]) adj[s].push_back(b.to);
    return adj;
}

// States (within `domain`) with a path to `target`.
StateSet can_reach(const Dtmc& chain, const StateSet& domain, const StateSet& target) {
    std::vector<std::vector<StateIndex>> pred(chain.num_states());
    for (StateIndex s : domain)
        for (const Branch& b : chain.rows[s]) pred[b.to].push_back(s);
    StateSet seen = target & domain;
    std::deque<StateIndex> queue(seen.begin(), seen.end());
    while (!queue.empty()) {
        StateIndex t = queue.front();
        queue.pop_front();
        for (StateIndex s : pred[t])
            if (!seen.contains(s)) {
                seen.insert(s);
                queue.push_back(s);
            }
    }
    return seen;
}

} // namespace

Dtmc as_dtmc(const Mdp& mdp) {
    Dtmc chain;
    chain.initial = mdp.initial();
    chain.rows.resize(mdp.num_states());
    for (StateIndex s = 0; s < mdp.num_states(); ++s) {
        auto cs = mdp.choices(s);
        if (cs.size() > 1)
            throw SynthesisError("state " + std::to_string(s) + " has " + std::to_string(cs.size()) +
                                 " enabled actions; expected a Markov chain");
        if (cs.size() == 1) {
            auto bs = mdp.branches(cs[0]);
            chain.rows[s].assign(bs.begin(), bs.end());
        }
    }
    return chain;
}

std::vector<std::vector<StateIndex>> bottom_sccs(const Dtmc& chain) {
    StateSet live = reachable(chain);
    auto adj = adjacency(chain);
    auto comps = detail::strongly_connected_components(adj, live);
    std::vector<std::size_t> comp_of(chain.num_states(), 0);
    for (std::size_t i = 0; i < comps.size(); ++i)
        for (StateIndex s : comps[i]) comp_of[s] = i;
    std::vector<std::vector<StateIndex>> result;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        bool bottom = std::all_of(comps[i].begin(), comps[i].end(), [&](StateIndex s) {
            return std::all_of(adj[s].begin(), adj[s].end(), [&](StateIndex t) { return comp_of[t] == i; });
        });
        if (bottom) result.push_back(comps[i]);
    }
    std::sort(result.begin(), result.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return result;
}

std::vector<double> dtmc_reach_prob(const Dtmc& chain, const StateSet& target) {
    std::size_t n = chain.num_states();
    std::vector<double> x(n, 0.0);
    StateSet live = reachable(chain);
    StateSet yes = target & live;
    StateSet positive = can_reach(chain, live, yes);
    // A state reaches the target surely iff it cannot reach a state that misses it surely.
    StateSet no = live - positive;
    StateSet sure = live - can_reach(chain, live - yes, no);
    sure |= yes;

    std::vector<StateIndex> unknown;
    std::vector<std::size_t> column(n, 0);
    for (StateIndex s : positive)
        if (!sure.contains(s)) {
            column[s] = unknown.size();
            unknown.push_back(s);
        }
    for (StateIndex s : sure) x[s] = 1.0;
    if (unknown.empty()) return x;

    if (unknown.size() <= kDirectSolveLimit) {
        std::vector<Eigen::Triplet<double>> triplets;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(unknown.size()));
        for (std::size_t i = 0; i < unknown.size(); ++i) {
            auto row = static_cast<Eigen::Index>(i);
            triplets.emplace_back(row, row, 1.0);
            for (const Branch& b : chain.rows[unknown[i]]) {
                if (sure.contains(b.to))
                    rhs[row] += b.prob;
                else if (positive.contains(b.to))
                    triplets.emplace_back(row, static_cast<Eigen::Index>(column[b.to]), -b.prob);
            }
        }
        Eigen::SparseMatrix<double> a(rhs.size(), rhs.size());
        a.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
        solver.compute(a);
        if (solver.info() != Eigen::Success) throw ConvergenceError("singular reachability system");
        Eigen::VectorXd sol = solver.solve(rhs);
        for (std::size_t i = 0; i < unknown.size(); ++i)
            x[unknown[i]] = std::clamp(sol[static_cast<Eigen::Index>(i)], 0.0, 1.0);
        return x;
    }

    for (std::size_t iter = 0;; ++iter) {
        if (iter >= kIterationCap) throw ConvergenceError("DTMC reachability did not converge");
        double delta = 0.0;
        for (StateIndex s : unknown) {
            double v = 0.0;
            for (const Branch& b : chain.rows[s]) v += b.prob * x[b.to];
            v = std::min(v, 1.0);
            delta = std::max(delta, std::abs(v - x[s]));
            x[s] = v;
        }
        if (delta < kIterationTolerance) break;
    }
    return x;
}

double dtmc_persistence_prob(const Dtmc& chain, const StateSet& accepting) {
    StateSet target(chain.num_states());
    for (const auto& comp : bottom_sccs(chain))
        if (std::all_of(comp.begin(), comp.end(), [&](StateIndex s) { return accepting.contains(s); }))
            for (StateIndex s : comp) target.insert(s);
    if (target.empty()) return 0.0;
    return dtmc_reach_prob(chain, target)[chain.initial];
}

double dtmc_persistence_prob(const Mdp& chain, const StateSet& accepting) {
    return dtmc_persistence_prob(as_dtmc(chain), accepting);
}

} // namespace captl
