#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "captl/logic.hpp"
#include "captl/mdp.hpp"
#include "captl/state_set.hpp"

namespace captl {

/// A set of states together with the formula it was computed from.
struct TargetSet {
    StateSet states;
    std::string source;
};

/// Optimal probabilities for one query, defined on the states reachable from
/// the root it was solved for.
class ValueVector {
public:
    ValueVector() = default;
    ValueVector(StateSet domain, std::vector<double> values, std::string objective_id, double epsilon,
                StateIndex root);

    double at(StateIndex s) const; // throws ValidationError outside the domain
    bool defined(StateIndex s) const { return s < domain_.universe() && domain_.contains(s); }
    const StateSet& domain() const noexcept { return domain_; }
    /// Dense view, zero outside the domain.
    const std::vector<double>& raw() const noexcept { return values_; }
    const std::string& objective_id() const noexcept { return objective_id_; }
    double epsilon() const noexcept { return epsilon_; }
    StateIndex root() const noexcept { return root_; }

private:
    StateSet domain_;
    std::vector<double> values_;
    std::string objective_id_;
    double epsilon_ = 0.0;
    StateIndex root_ = 0;
};

/// Memoryless deterministic strategy: a partial map state → action.
class StrategyMap {
public:
    StrategyMap() = default;
    explicit StrategyMap(std::size_t num_states) : choice_(num_states) {}

    bool has(StateIndex s) const { return s < choice_.size() && choice_[s].has_value(); }
    ActionIndex at(StateIndex s) const;
    void set(StateIndex s, ActionIndex a) { choice_[s] = a; }
    std::size_t size() const;
    std::size_t universe() const { return choice_.size(); }

    friend bool operator==(const StrategyMap&, const StrategyMap&) = default;

private:
    std::vector<std::optional<ActionIndex>> choice_;
};

struct SolveOptions {
    double epsilon = 1e-6;
    std::size_t max_iterations = 1000000;
    /// Root of the value vector; the model's initial state when unset.
    std::optional<StateIndex> root;
    std::string objective_id;
    /// Called with the full iterate after every value-iteration sweep.
    std::function<void(const std::vector<double>&)> observer;
};

TargetSet eval_state_formula(const Mdp& mdp, const StateFormula& formula);

// Qualitative precomputation for reaching `target`.
StateSet prob0_max(const Mdp& mdp, const StateSet& target);
StateSet prob1_max(const Mdp& mdp, const StateSet& target);
StateSet prob0_min(const Mdp& mdp, const StateSet& target);
StateSet prob1_min(const Mdp& mdp, const StateSet& target);

// Same, for `allowed U target`: states outside allowed ∪ target never reach.
StateSet prob0(const Mdp& mdp, const StateSet& allowed, const StateSet& target, Direction dir);
StateSet prob1(const Mdp& mdp, const StateSet& allowed, const StateSet& target, Direction dir);

/// Optimal probability of `allowed U target` by topological value iteration:
/// SCCs of the undecided states are solved bottom-up, each by Gauss-Seidel
/// sweeps from 0 until the max-norm change drops below epsilon.
ValueVector until_values(const Mdp& mdp, const StateSet& allowed, const StateSet& target, Direction dir,
                         const SolveOptions& opts = {});
ValueVector max_reach_values(const Mdp& mdp, const TargetSet& target, const SolveOptions& opts = {});
ValueVector min_reach_values(const Mdp& mdp, const TargetSet& target, const SolveOptions& opts = {});
ValueVector bounded_until_values(const Mdp& mdp, const StateSet& allowed, const StateSet& target,
                                 std::size_t bound, Direction dir, const SolveOptions& opts = {});
ValueVector next_values(const Mdp& mdp, const StateSet& target, Direction dir, const SolveOptions& opts = {});

struct EndComponent {
    std::vector<StateIndex> states;
    /// Retained actions per member, ascending. Deadlock members have none.
    std::vector<std::vector<ActionIndex>> actions;

    bool contains(StateIndex s) const;
    const std::vector<ActionIndex>& actions_of(StateIndex s) const;
};

/// Maximal end components of the sub-model induced by `restrict_to`, ordered by
/// smallest member. Deadlock states count as absorbing singletons.
std::vector<EndComponent> mec_decomposition(const Mdp& mdp, const StateSet& restrict_to);

/// Union of the end components lying inside B: reaching it is the same as
/// eventually staying in B forever.
StateSet accepting_region(const Mdp& mdp, const StateSet& b_set);

/// Pmax[F G B].
ValueVector persistence_values(const Mdp& mdp, const TargetSet& b_set, const SolveOptions& opts = {});

/// Max: lowest-index action among those within 1e-9 of the best backup,
/// refined so that every state with positive value moves closer to the target.
/// Min: lowest-index argmin; states of value 0 keep away from the target.
/// `hold` fixes actions for states inside accepting end components.
StrategyMap extract_strategy(const Mdp& mdp, const ValueVector& x, const TargetSet& target, Direction dir,
                             const std::vector<EndComponent>& hold = {});

/// Expected value of x after playing `action` in s.
double backup(const Mdp& mdp, const std::vector<double>& x, StateIndex s, ActionIndex action);

/// Whether x[s] lies in `interval`. Appends a warning when x[s] is within
/// 10·epsilon of a finite endpoint.
bool verify_context(const Mdp& mdp, StateIndex s, const ValueVector& x, const Interval& interval,
                    std::vector<std::string>* warnings = nullptr);

/// Values, strategy and value-1 set of an Eventually / EventuallyAlways query.
struct ObjectiveSolution {
    ValueVector values;
    StrategyMap strategy;
    /// States whose optimal value is exactly 1, decided by graph analysis.
    StateSet certain;
};

ObjectiveSolution solve_objective(const Mdp& mdp, Direction dir, const PathFormula& path,
                                  const SolveOptions& opts = {});

/// Optimal values for any supported path formula (no strategy).
ValueVector query_values(const Mdp& mdp, Direction dir, const PathFormula& path, const SolveOptions& opts = {});

} // namespace captl
