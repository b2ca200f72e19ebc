#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "captl/dtmc.hpp"
#include "captl/engine.hpp"
#include "captl/mdp.hpp"
#include "captl/requirement.hpp"

namespace captl {

enum class Algorithm { Pctl, Persistence };

const char* to_string(Algorithm a);

/// Either play an action or switch objective through a context.
struct Decision {
    enum class Kind { Action, Switch };
    Kind kind = Kind::Action;
    ActionIndex action = 0;
    std::size_t context = 0; // index into req.contexts()
    std::size_t target = 0;  // objective index

    static Decision play(ActionIndex a) { return {Kind::Action, a, 0, 0}; }
    static Decision change(std::size_t context, std::size_t target) { return {Kind::Switch, 0, context, target}; }

    friend bool operator==(const Decision&, const Decision&) = default;
};

/// Partial map (objective index, state) -> decision.
struct Protocol {
    std::map<std::pair<std::size_t, StateIndex>, Decision> entries;
    double satisfaction_prob = 0.0;
    Algorithm algorithm = Algorithm::Pctl;

    const Decision* find(std::size_t q, StateIndex s) const;
};

/// Per-objective classification of the reachable states.
struct ObjectivePartition {
    ObjectiveSolution solution;
    /// blocks[q'] = states whose first satisfied context leads to q'; blocks[q] keeps the rest.
    std::vector<StateSet> blocks;
    /// Context index fired at each state, if any.
    std::vector<std::optional<std::size_t>> fired;
    /// Wall time spent solving and classifying.
    double seconds = 0.0;
};

struct Partition {
    StateSet reachable;
    /// Indexed by objective; empty for objectives never explored.
    std::vector<std::optional<ObjectivePartition>> objectives;
    /// Objective indices in the order they were explored.
    std::vector<std::size_t> order;
    std::vector<std::string> warnings;
};

enum class Turn { One, Two };

struct ProductState {
    StateIndex s;
    std::size_t q;
    Turn turn;

    friend auto operator<=>(const ProductState&, const ProductState&) = default;
};

/// One enabled transition group of a product state.
struct ProductChoice {
    enum class Tag { Action, Context, Tau, Idle };
    Tag tag;
    std::size_t label; // action index or context index; 0 for tau/idle
    std::vector<Branch> branches;
};

/// Composition of model, requirement and strategy profile over S x Q x {1,2}.
class ProductDtmc {
public:
    std::size_t num_states() const { return states_.size(); }
    const ProductState& state(std::size_t v) const { return states_[v]; }
    const std::vector<ProductChoice>& choices(std::size_t v) const { return choices_[v]; }
    std::optional<std::size_t> find(const ProductState& v) const;
    std::size_t initial() const { return 0; }

    std::size_t num_choices() const;
    std::size_t num_transitions() const;
    /// True when every state has exactly one enabled choice.
    bool is_deterministic() const;
    /// Throws SynthesisError naming the first state without exactly one choice.
    Dtmc to_chain() const;

    std::size_t add_state(const ProductState& v);
    void add_choice(std::size_t v, ProductChoice c) { choices_[v].push_back(std::move(c)); }

private:
    std::vector<ProductState> states_;
    std::vector<std::vector<ProductChoice>> choices_;
    std::map<ProductState, std::size_t> index_;
};

/// The chain induced by a protocol on Q x S, restricted to reachable pairs.
struct InducedChain {
    Dtmc chain;
    std::vector<std::pair<std::size_t, StateIndex>> states; // (objective, state)
    std::map<std::pair<std::size_t, StateIndex>, std::size_t> index;
};

struct PctlResult {
    Protocol protocol;
    /// Pairs (q, s) whose optimal value is exactly 1.
    std::vector<std::pair<std::size_t, StateIndex>> accepted;
    std::vector<std::string> warnings;
};

struct PersistenceResult {
    Protocol protocol;
    Partition partition;
    ProductDtmc product;
};

/// Worklist synthesis over (objective, state) pairs: test contexts in
/// declaration order, switch while one fires, otherwise play the objective's
/// optimal action and explore its successors. c is the probability of
/// reaching a pair whose optimal value is exactly 1.
PctlResult synth_pctl(const Mdp& mdp, const CaptlRequirement& req, const SolveOptions& opts = {});

/// Requires validate_persistence(req) to be empty (throws ValidationError otherwise).
Partition partition_states(const Mdp& mdp, const CaptlRequirement& req, const SolveOptions& opts = {});

/// Product reachable from (s0, q0, 2). Turn-1 states play the objective's
/// strategy, turn-2 states either pass (tau) or switch through a context.
ProductDtmc build_product(const Mdp& mdp, const CaptlRequirement& req, const std::vector<StrategyMap>& strategies,
                          const Partition& partition);

/// States of the product whose model state lies in the persistence set of their objective.
StateSet product_accepting(const Mdp& mdp, const CaptlRequirement& req, const ProductDtmc& product);

PersistenceResult synth_persistence(const Mdp& mdp, const CaptlRequirement& req, const SolveOptions& opts = {});

InducedChain compose_protocol(const Mdp& mdp, const CaptlRequirement& req, const Protocol& protocol);

double dtmc_persistence_prob(const ProductDtmc& product, const StateSet& accepting);

std::string serialize_protocol(const Mdp& mdp, const CaptlRequirement& req, const Protocol& protocol);

std::string product_to_dot(const Mdp& mdp, const CaptlRequirement& req, const ProductDtmc& product);
std::string induced_to_dot(const Mdp& mdp, const CaptlRequirement& req, const InducedChain& chain);

} // namespace captl
