#include "captl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

#include "captl/errors.hpp"

namespace captl {

namespace {

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

const Choice* Mdp::find_choice(StateIndex s, ActionIndex a) const {
    for (const Choice& c : choices(s))
        if (c.action == a) return &c;
    return nullptr;
}

std::optional<ActionIndex> Mdp::find_action(std::string_view name) const {
    auto it = std::find(actions_.begin(), actions_.end(), name);
    if (it == actions_.end()) return std::nullopt;
    return static_cast<ActionIndex>(it - actions_.begin());
}

std::optional<PropIndex> Mdp::find_proposition(std::string_view name) const {
    auto it = std::find(props_.begin(), props_.end(), name);
    if (it == props_.end()) return std::nullopt;
    return static_cast<PropIndex>(it - props_.begin());
}

bool Mdp::has_label(StateIndex s, PropIndex p) const {
    const auto& l = labels_[s];
    return std::binary_search(l.begin(), l.end(), p);
}

bool Mdp::has_display_names() const {
    return std::any_of(names_.begin(), names_.end(), [](const std::string& n) { return !n.empty(); });
}

std::vector<StateIndex> Mdp::deadlocks() const {
    std::vector<StateIndex> result;
    for (StateIndex s = 0; s < num_states(); ++s)
        if (is_deadlock(s)) result.push_back(s);
    return result;
}

bool operator==(const Mdp& a, const Mdp& b) {
    if (a.num_states() != b.num_states() || a.initial_ != b.initial_ || a.actions_ != b.actions_ ||
        a.props_ != b.props_ || a.labels_ != b.labels_ || a.names_ != b.names_ ||
        a.choice_offsets_ != b.choice_offsets_)
        return false;
    for (StateIndex s = 0; s < a.num_states(); ++s) {
        auto ca = a.choices(s);
        auto cb = b.choices(s);
        for (std::size_t i = 0; i < ca.size(); ++i) {
            if (ca[i].action != cb[i].action) return false;
            auto ba = a.branches(ca[i]);
            auto bb = b.branches(cb[i]);
            if (ba.size() != bb.size()) return false;
            for (std::size_t j = 0; j < ba.size(); ++j)
                if (ba[j].to != bb[j].to || ba[j].prob != bb[j].prob) return false;
        }
    }
    return true;
}

MdpBuilder::MdpBuilder(std::size_t num_states)
    : num_states_(num_states), labels_(num_states), names_(num_states) {}

ActionIndex MdpBuilder::add_action(std::string name) {
    if (std::find(actions_.begin(), actions_.end(), name) != actions_.end())
        throw ValidationError("duplicate action '" + name + "'");
    actions_.push_back(std::move(name));
    return actions_.size() - 1;
}

ActionIndex MdpBuilder::action(std::string_view name) {
    auto it = std::find(actions_.begin(), actions_.end(), name);
    if (it != actions_.end()) return static_cast<ActionIndex>(it - actions_.begin());
    return add_action(std::string(name));
}

PropIndex MdpBuilder::add_proposition(std::string name) {
    if (std::find(props_.begin(), props_.end(), name) != props_.end())
        throw ValidationError("duplicate proposition '" + name + "'");
    props_.push_back(std::move(name));
    return props_.size() - 1;
}

PropIndex MdpBuilder::proposition(std::string_view name) {
    auto it = std::find(props_.begin(), props_.end(), name);
    if (it != props_.end()) return static_cast<PropIndex>(it - props_.begin());
    return add_proposition(std::string(name));
}

MdpBuilder& MdpBuilder::set_initial(StateIndex s) {
    initial_ = s;
    return *this;
}

MdpBuilder& MdpBuilder::add_label(StateIndex s, PropIndex p) {
    if (s >= num_states_) throw ValidationError("label on unknown state " + std::to_string(s));
    if (p >= props_.size()) throw ValidationError("unknown proposition index " + std::to_string(p));
    auto& l = labels_[s];
    auto it = std::lower_bound(l.begin(), l.end(), p);
    if (it == l.end() || *it != p) l.insert(it, p);
    return *this;
}

MdpBuilder& MdpBuilder::add_label(StateIndex s, std::string_view prop) {
    auto it = std::find(props_.begin(), props_.end(), prop);
    if (it == props_.end())
        throw ValidationError("label '" + std::string(prop) + "' is not a declared proposition");
    return add_label(s, static_cast<PropIndex>(it - props_.begin()));
}

MdpBuilder& MdpBuilder::set_name(StateIndex s, std::string name) {
    if (s >= num_states_) throw ValidationError("name on unknown state " + std::to_string(s));
    names_[s] = std::move(name);
    return *this;
}

MdpBuilder& MdpBuilder::add_choice(StateIndex s, ActionIndex a, std::vector<Branch> branches) {
    pending_.push_back({s, a, std::move(branches)});
    return *this;
}

MdpBuilder& MdpBuilder::add_choice(StateIndex s, std::string_view a, std::vector<Branch> branches) {
    return add_choice(s, action(a), std::move(branches));
}

Mdp MdpBuilder::build() const {
    if (num_states_ == 0) throw ValidationError("model has no states");
    if (initial_ >= num_states_)
        throw ValidationError("initial state " + std::to_string(initial_) + " does not exist");

    std::vector<std::vector<const PendingChoice*>> per_state(num_states_);
    for (const PendingChoice& pc : pending_) {
        std::string where = "state " + std::to_string(pc.from);
        if (pc.from >= num_states_) throw ValidationError("transition from unknown " + where);
        if (pc.action >= actions_.size())
            throw ValidationError(where + ": unknown action index " + std::to_string(pc.action));
        where += ", action '" + actions_[pc.action] + "'";
        for (const PendingChoice* other : per_state[pc.from])
            if (other->action == pc.action) throw ValidationError(where + ": duplicate (from, action) pair");
        double sum = 0.0;
        for (const Branch& b : pc.branches) {
            if (b.to >= num_states_)
                throw ValidationError(where + ": successor " + std::to_string(b.to) + " does not exist");
            if (!(b.prob > 0.0) || b.prob > 1.0)
                throw ValidationError(where + ": probability " + short_number(b.prob) + " not in (0,1]");
            sum += b.prob;
        }
        for (std::size_t i = 0; i < pc.branches.size(); ++i)
            for (std::size_t j = i + 1; j < pc.branches.size(); ++j)
                if (pc.branches[i].to == pc.branches[j].to)
                    throw ValidationError(where + ": duplicate successor " + std::to_string(pc.branches[i].to));
        if (!pc.branches.empty() && std::abs(sum - 1.0) > kDistributionTolerance)
            throw ValidationError(where + ": distribution sum " + short_number(sum) + " ∉ {0,1}");
        per_state[pc.from].push_back(&pc);
    }

    Mdp mdp;
    mdp.initial_ = initial_;
    mdp.actions_ = actions_;
    mdp.props_ = props_;
    mdp.labels_ = labels_;
    mdp.names_ = names_;
    mdp.choice_offsets_.assign(1, 0);
    for (StateIndex s = 0; s < num_states_; ++s) {
        auto& list = per_state[s];
        std::sort(list.begin(), list.end(),
                  [](const PendingChoice* x, const PendingChoice* y) { return x->action < y->action; });
        for (const PendingChoice* pc : list) {
            if (pc->branches.empty()) continue;
            std::vector<Branch> sorted = pc->branches;
            std::sort(sorted.begin(), sorted.end(), [](const Branch& x, const Branch& y) { return x.to < y.to; });
            mdp.choices_.push_back({pc->action, mdp.branches_.size(), sorted.size()});
            mdp.branches_.insert(mdp.branches_.end(), sorted.begin(), sorted.end());
        }
        mdp.choice_offsets_.push_back(mdp.choices_.size());
    }
    return mdp;
}

StateSet reach(const Mdp& mdp, StateIndex s) {
    if (s >= mdp.num_states()) throw ValidationError("invalid state index " + std::to_string(s));
    StateSet seen(mdp.num_states());
    std::deque<StateIndex> queue{s};
    seen.insert(s);
    while (!queue.empty()) {
        StateIndex u = queue.front();
        queue.pop_front();
        for (const Choice& c : mdp.choices(u))
            for (const Branch& b : mdp.branches(c))
                if (!seen.contains(b.to)) {
                    seen.insert(b.to);
                    queue.push_back(b.to);
                }
    }
    return seen;
}

StateSet post(const Mdp& mdp, StateIndex s, ActionIndex a) {
    StateSet result(mdp.num_states());
    if (s >= mdp.num_states()) return result;
    if (const Choice* c = mdp.find_choice(s, a))
        for (const Branch& b : mdp.branches(*c)) result.insert(b.to);
    return result;
}

Cardinality cardinality(const Mdp& mdp) {
    Cardinality card;
    card.num_states = mdp.num_states();
    for (StateIndex s = 0; s < mdp.num_states(); ++s) {
        auto cs = mdp.choices(s);
        card.num_choices += cs.size();
        for (const Choice& c : cs) card.num_nonzero_transitions += c.branch_count;
    }
    return card;
}

std::vector<std::string> model_warnings(const Mdp& mdp) {
    std::vector<std::string> warnings;
    for (StateIndex s : mdp.deadlocks())
        warnings.push_back("state " + std::to_string(s) + " has no enabled action (deadlock, treated as absorbing)");
    return warnings;
}

} // namespace captl
