#pragma once

#include <vector>

#include "captl/mdp.hpp"
#include "captl/state_set.hpp"

namespace captl {

/// A discrete-time Markov chain: one distribution (possibly empty) per state.
/// Empty rows are deadlocks and behave as absorbing states.
struct Dtmc {
    std::vector<std::vector<Branch>> rows;
    StateIndex initial = 0;

    std::size_t num_states() const { return rows.size(); }
};

/// Converts a model with at most one enabled action per state.
/// Throws SynthesisError naming the first state with two or more actions.
Dtmc as_dtmc(const Mdp& mdp);

/// Bottom strongly connected components among the states reachable from the
/// initial state, in ascending order of their smallest member.
std::vector<std::vector<StateIndex>> bottom_sccs(const Dtmc& chain);

/// Probability of eventually reaching `target` from every state. States not
/// reachable from the initial state get 0. Uses a sparse LU solve up to 2000
/// unknowns and Gauss-Seidel iteration to 1e-9 beyond that.
std::vector<double> dtmc_reach_prob(const Dtmc& chain, const StateSet& target);

/// Probability from the initial state of ending in a bottom SCC whose states
/// all belong to `accepting`.
double dtmc_persistence_prob(const Dtmc& chain, const StateSet& accepting);
double dtmc_persistence_prob(const Mdp& chain, const StateSet& accepting);

} // namespace captl
