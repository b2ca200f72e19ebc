#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "captl/state_set.hpp"

namespace captl {

using ActionIndex = std::size_t;
using PropIndex = std::size_t;

/// Tolerance for "distribution sums to 1".
inline constexpr double kDistributionTolerance = 1e-9;

struct Branch {
    StateIndex to;
    double prob;
};

/// One enabled action at a state; its branches live in the owning Mdp.
struct Choice {
    ActionIndex action;
    std::size_t first_branch;
    std::size_t branch_count;
};

struct Cardinality {
    std::size_t num_states = 0;
    std::size_t num_nonzero_transitions = 0;
    std::size_t num_choices = 0;
};

class MdpBuilder;

/// Explicit-state Markov decision process with dense state indices.
///
/// Immutable once built. Choices at a state are ordered by action index, and
/// action indices follow declaration order, so every traversal is deterministic.
class Mdp {
public:
    std::size_t num_states() const noexcept { return choice_offsets_.size() - 1; }
    StateIndex initial() const noexcept { return initial_; }

    std::span<const Choice> choices(StateIndex s) const {
        return {choices_.data() + choice_offsets_[s], choice_offsets_[s + 1] - choice_offsets_[s]};
    }
    std::span<const Branch> branches(const Choice& c) const {
        return {branches_.data() + c.first_branch, c.branch_count};
    }
    /// The choice for action `a` at `s`, or nullptr when `a` is not enabled there.
    const Choice* find_choice(StateIndex s, ActionIndex a) const;
    bool is_deadlock(StateIndex s) const { return choices(s).empty(); }

    const std::vector<std::string>& action_names() const noexcept { return actions_; }
    std::optional<ActionIndex> find_action(std::string_view name) const;

    const std::vector<std::string>& propositions() const noexcept { return props_; }
    std::optional<PropIndex> find_proposition(std::string_view name) const;
    /// Sorted proposition indices holding at `s`.
    std::span<const PropIndex> labels(StateIndex s) const { return labels_[s]; }
    bool has_label(StateIndex s, PropIndex p) const;

    /// Optional display name, empty when none was given.
    const std::string& display_name(StateIndex s) const { return names_[s]; }
    bool has_display_names() const;

    std::vector<StateIndex> deadlocks() const;

    friend bool operator==(const Mdp& a, const Mdp& b);

private:
    friend class MdpBuilder;
    Mdp() = default;

    StateIndex initial_ = 0;
    std::vector<std::string> actions_;
    std::vector<std::string> props_;
    std::vector<std::size_t> choice_offsets_{0};
    std::vector<Choice> choices_;
    std::vector<Branch> branches_;
    std::vector<std::vector<PropIndex>> labels_;
    std::vector<std::string> names_;
};

bool operator==(const Mdp& a, const Mdp& b);

/// Incremental construction; build() checks every model invariant.
class MdpBuilder {
public:
    explicit MdpBuilder(std::size_t num_states);

    ActionIndex add_action(std::string name);
    /// Index of `name`, declaring it if new.
    ActionIndex action(std::string_view name);
    PropIndex add_proposition(std::string name);
    PropIndex proposition(std::string_view name);

    MdpBuilder& set_initial(StateIndex s);
    MdpBuilder& add_label(StateIndex s, PropIndex p);
    MdpBuilder& add_label(StateIndex s, std::string_view prop);
    MdpBuilder& set_name(StateIndex s, std::string name);
    /// Adds the distribution of action `a` at `s`. An empty branch list means "not enabled".
    MdpBuilder& add_choice(StateIndex s, ActionIndex a, std::vector<Branch> branches);
    MdpBuilder& add_choice(StateIndex s, std::string_view action, std::vector<Branch> branches);

    /// Throws ValidationError naming the first violated invariant.
    Mdp build() const;

private:
    struct PendingChoice {
        StateIndex from;
        ActionIndex action;
        std::vector<Branch> branches;
    };

    std::size_t num_states_;
    StateIndex initial_ = 0;
    std::vector<std::string> actions_;
    std::vector<std::string> props_;
    std::vector<PendingChoice> pending_;
    std::vector<std::vector<PropIndex>> labels_;
    std::vector<std::string> names_;
};

/// States reachable from `s` under any strategy; always contains `s`.
StateSet reach(const Mdp& mdp, StateIndex s);

/// Successors of `s` under `a` with positive probability; empty when `a` is disabled.
StateSet post(const Mdp& mdp, StateIndex s, ActionIndex a);

Cardinality cardinality(const Mdp& mdp);

/// Non-fatal findings, currently one line per deadlock state.
std::vector<std::string> model_warnings(const Mdp& mdp);

} // namespace captl
