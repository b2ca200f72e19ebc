#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <string>
#include <vector>

#include "captl/dtmc.hpp"
#include "captl/engine.hpp"
#include "captl/mdp.hpp"
#include "captl/synthesis.hpp"

/// Independent reference implementations used to check the engine: exact
/// rational arithmetic, closure-based graph analysis and exhaustive search.
namespace captl::oracle {

/// The decimal literal that prints as `v` (shortest round-trip form), exactly.
mpq_class exact_decimal(double v);

/// Exact reachability probabilities for chains of at most 2000 states, by
/// graph preprocessing and Gaussian elimination over the rationals.
std::vector<mpq_class> exact_dtmc_reach(const Dtmc& chain, const StateSet& target);

/// Bottom SCCs from mutual reachability closures, ascending by smallest member.
std::vector<std::vector<StateIndex>> naive_bsccs(const Dtmc& chain);

/// Exact probability from the initial state of ending in a bottom SCC inside `accepting`.
mpq_class exact_dtmc_persistence(const Dtmc& chain, const StateSet& accepting);

/// Maximal end components by repeated closure-based refinement until nothing
/// changes, followed by an explicit closedness and connectivity recheck.
std::vector<EndComponent> naive_mecs(const Mdp& mdp, const StateSet& restrict_to);

enum class QueryKind { Reach, Persist };

/// Exact optimum at the initial state over all memoryless deterministic
/// strategies (choices at states reachable from the initial state).
/// Throws ValidationError when there are more than 10^6 strategies.
mpq_class enumerate_strategy_optimum(const Mdp& mdp, QueryKind kind, const StateSet& target, Direction dir);

/// The chain induced by a memoryless strategy; states without a choice keep no row.
Dtmc induced_chain(const Mdp& mdp, const StrategyMap& strategy);

struct SimulationStats {
    std::size_t runs = 0;
    std::size_t successes = 0;
    double mean = 0.0;
    double std_error = 0.0;
    /// Three binomial standard errors.
    double half_width = 0.0;
};

/// Monte-Carlo estimate. In Reach mode a run succeeds when it visits `target`
/// within the horizon; in Persist mode when it is inside a bottom SCC made of
/// `target` states by the horizon. Horizon 0 means 10 x the state count.
SimulationStats simulate(const Dtmc& chain, const StateSet& target, QueryKind kind, std::size_t runs,
                         std::size_t horizon, std::uint64_t seed);

using LabelSet = std::vector<PropIndex>;
using Trace = std::vector<LabelSet>;

/// Collapses consecutive repeated label sets.
Trace collapse(const Trace& trace);
bool stutter_equivalent(const Trace& a, const Trace& b);

struct TraceSample {
    std::vector<StateIndex> path;
    Trace trace;
    mpq_class probability;
};

/// All paths from the initial state with 0..max_length transitions. Empty rows
/// behave as probability-1 self-loops. `labels[v]` is the label set of v.
std::vector<TraceSample> enumerate_paths(const Dtmc& chain, const std::vector<LabelSet>& labels,
                                         std::size_t max_length);

struct CorrespondenceReport {
    std::size_t induced_paths = 0;
    std::size_t product_paths = 0;
    std::vector<std::string> failures;
};

/// Checks that every induced path of length <= k has a product path (length
/// <= 2k, ending in a turn-2 state) with stutter-equivalent trace and equal
/// exact probability, and that every product path of length <= k ending in a
/// turn-2 state has such an induced counterpart (length <= k).
CorrespondenceReport check_stutter_correspondence(const Mdp& mdp, const InducedChain& induced,
                                                  const ProductDtmc& product, std::size_t k);

} // namespace captl::oracle
