#include "captl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "captl/errors.hpp"
#include "scc.hpp"

namespace captl {

namespace {

constexpr double kArgmaxTolerance = 1e-9;

// Reverse edges tagged with the choice that produces them.
struct PredEdge {
    StateIndex from;
    const Choice* choice;
};

std::vector<std::vector<PredEdge>> predecessors(const Mdp& mdp, const StateSet& sources) {
    std::vector<std::vector<PredEdge>> pred(mdp.num_states());
    for (StateIndex s : sources)
        for (const Choice& c : mdp.choices(s))
            for (const Branch& b : mdp.branches(c))
                if (pred[b.to].empty() || pred[b.to].back().choice != &c) pred[b.to].push_back({s, &c});
    return pred;
}

bool post_within(const Mdp& mdp, const Choice& c, const StateSet& set) {
    for (const Branch& b : mdp.branches(c))
        if (!set.contains(b.to)) return false;
    return true;
}

bool post_meets(const Mdp& mdp, const Choice& c, const StateSet& set) {
    for (const Branch& b : mdp.branches(c))
        if (set.contains(b.to)) return true;
    return false;
}

double choice_value(const Mdp& mdp, const Choice& c, const std::vector<double>& x) {
    double v = 0.0;
    for (const Branch& b : mdp.branches(c)) v += b.prob * x[b.to];
    return v;
}

// States of `sources` that can reach `goal` in one or more steps through
// `sources`, plus goal itself.
StateSet backward_closure(const Mdp& mdp, const StateSet& sources, const StateSet& goal) {
    auto pred = predecessors(mdp, sources);
    StateSet seen = goal;
    std::deque<StateIndex> queue(goal.begin(), goal.end());
    while (!queue.empty()) {
        StateIndex t = queue.front();
        queue.pop_front();
        for (const PredEdge& e : pred[t])
            if (!seen.contains(e.from)) {
                seen.insert(e.from);
                queue.push_back(e.from);
            }
    }
    return seen;
}

StateSet prob0_max_impl(const Mdp& mdp, const StateSet& active, const StateSet& target) {
    return backward_closure(mdp, active, target).complement();
}

StateSet prob1_max_impl(const Mdp& mdp, const StateSet& active, const StateSet& target) {
    auto pred = predecessors(mdp, active);
    StateSet u = StateSet::full(mdp.num_states());
    for (;;) {
        StateSet r = target;
        std::deque<StateIndex> queue(target.begin(), target.end());
        while (!queue.empty()) {
            StateIndex t = queue.front();
            queue.pop_front();
            for (const PredEdge& e : pred[t]) {
                if (r.contains(e.from) || !u.contains(e.from)) continue;
                if (!post_within(mdp, *e.choice, u)) continue;
                r.insert(e.from);
                queue.push_back(e.from);
            }
        }
        if (r == u) return u;
        u = std::move(r);
    }
}

StateSet prob0_min_impl(const Mdp& mdp, const StateSet& active, const StateSet& target) {
    StateSet z = target.complement();
    for (bool changed = true; changed;) {
        changed = false;
        for (StateIndex s : (z & active).members()) {
            if (mdp.is_deadlock(s)) continue;
            bool stays = false;
            for (const Choice& c : mdp.choices(s))
                if (post_within(mdp, c, z)) {
                    stays = true;
                    break;
                }
            if (!stays) {
                z.erase(s);
                changed = true;
            }
        }
    }
    return z;
}

StateSet prob1_min_impl(const Mdp& mdp, const StateSet& active, const StateSet& target) {
    StateSet avoid = prob0_min_impl(mdp, active, target);
    return backward_closure(mdp, active, avoid).complement();
}

void check_epsilon(const SolveOptions& opts) {
    if (!(opts.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
}

StateIndex root_of(const Mdp& mdp, const SolveOptions& opts) {
    StateIndex root = opts.root.value_or(mdp.initial());
    if (root >= mdp.num_states()) throw ValidationError("invalid state index " + std::to_string(root));
    return root;
}

} // namespace

ValueVector::ValueVector(StateSet domain, std::vector<double> values, std::string objective_id, double epsilon,
                         StateIndex root)
    : domain_(std::move(domain)), values_(std::move(values)), objective_id_(std::move(objective_id)),
      epsilon_(epsilon), root_(root) {}

double ValueVector::at(StateIndex s) const {
    if (!defined(s))
        throw ValidationError("state " + std::to_string(s) + " is outside the value vector's domain");
    return values_[s];
}

ActionIndex StrategyMap::at(StateIndex s) const {
    if (!has(s)) throw SynthesisError("strategy undefined at state " + std::to_string(s));
    return *choice_[s];
}

std::size_t StrategyMap::size() const {
    return static_cast<std::size_t>(
        std::count_if(choice_.begin(), choice_.end(), [](const auto& c) { return c.has_value(); }));
}

TargetSet eval_state_formula(const Mdp& mdp, const StateFormula& f) {
    std::size_t n = mdp.num_states();
    switch (f.kind()) {
    case StateFormula::Kind::True: return {StateSet::full(n), f.to_string()};
    case StateFormula::Kind::Atom: {
        auto p = mdp.find_proposition(f.name());
        if (!p) throw ValidationError("unknown proposition '" + f.name() + "'");
        StateSet set(n);
        for (StateIndex s = 0; s < n; ++s)
            if (mdp.has_label(s, *p)) set.insert(s);
        return {std::move(set), f.to_string()};
    }
    case StateFormula::Kind::Not: return {eval_state_formula(mdp, f.operand()).states.complement(), f.to_string()};
    case StateFormula::Kind::And:
        return {eval_state_formula(mdp, f.lhs()).states & eval_state_formula(mdp, f.rhs()).states, f.to_string()};
    case StateFormula::Kind::Or:
        return {eval_state_formula(mdp, f.lhs()).states | eval_state_formula(mdp, f.rhs()).states, f.to_string()};
    }
    return {};
}

StateSet prob0(const Mdp& mdp, const StateSet& allowed, const StateSet& target, Direction dir) {
    StateSet active = allowed - target;
    return dir == Direction::Max ? prob0_max_impl(mdp, active, target) : prob0_min_impl(mdp, active, target);
}

StateSet prob1(const Mdp& mdp, const StateSet& allowed, const StateSet& target, Direction dir) {
    StateSet active = allowed - target;
    return dir == Direction::Max ? prob1_max_impl(mdp, active, target) : prob1_min_impl(mdp, active, target);
}

StateSet prob0_max(const Mdp& mdp, const StateSet& target) {
    return prob0(mdp, StateSet::full(mdp.num_states()), target, Direction::Max);
}
StateSet prob1_max(const Mdp& mdp, const StateSet& target) {
    return prob1(mdp, StateSet::full(mdp.num_states()), target, Direction::Max);
}
StateSet prob0_min(const Mdp& mdp, const StateSet& target) {
    return prob0(mdp, StateSet::full(mdp.num_states()), target, Direction::Min);
}
StateSet prob1_min(const Mdp& mdp, const StateSet& target) {
    return prob1(mdp, StateSet::full(mdp.num_states()), target, Direction::Min);
}

double backup(const Mdp& mdp, const std::vector<double>& x, StateIndex s, ActionIndex action) {
    const Choice* c = mdp.find_choice(s, action);
    if (c == nullptr)
        throw ValidationError("action " + std::to_string(action) + " not enabled at state " + std::to_string(s));
    return choice_value(mdp, *c, x);
}

ValueVector until_values(const Mdp& mdp, const StateSet& allowed, const StateSet& target, Direction dir,
                         const SolveOptions& opts) {
    check_epsilon(opts);
    StateIndex root = root_of(mdp, opts);
    std::size_t n = mdp.num_states();
    StateSet domain = reach(mdp, root);
    StateSet yes = prob1(mdp, allowed, target, dir) & domain;
    StateSet no = prob0(mdp, allowed, target, dir) & domain;
    StateSet unknown = domain - yes - no;

    std::vector<double> x(n, 0.0);
    for (StateIndex s : yes) x[s] = 1.0;

    detail::Adjacency adj(n);
    for (StateIndex s : unknown)
        for (const Choice& c : mdp.choices(s))
            for (const Branch& b : mdp.branches(c))
                if (unknown.contains(b.to)) adj[s].push_back(b.to);

    auto update = [&](StateIndex s) {
        double best = dir == Direction::Max ? 0.0 : 1.0;
        for (const Choice& c : mdp.choices(s)) {
            double v = choice_value(mdp, c, x);
            best = dir == Direction::Max ? std::max(best, v) : std::min(best, v);
        }
        return std::clamp(best, 0.0, 1.0);
    };

    for (const auto& comp : detail::strongly_connected_components(adj, unknown)) {
        bool trivial = comp.size() == 1 &&
                       std::find(adj[comp[0]].begin(), adj[comp[0]].end(), comp[0]) == adj[comp[0]].end();
        for (std::size_t sweep = 0;; ++sweep) {
            if (sweep >= opts.max_iterations)
                throw ConvergenceError("value iteration did not converge within " +
                                       std::to_string(opts.max_iterations) + " iterations");
            double delta = 0.0;
            for (StateIndex s : comp) {
                double v = update(s);
                delta = std::max(delta, std::abs(v - x[s]));
                x[s] = v;
            }
            if (opts.observer) opts.observer(x);
            if (trivial || delta < opts.epsilon) break;
        }
    }
    return {std::move(domain), std::move(x), opts.objective_id, opts.epsilon, root};
}

ValueVector max_reach_values(const Mdp& mdp, const TargetSet& target, const SolveOptions& opts) {
    return until_values(mdp, StateSet::full(mdp.num_states()), target.states, Direction::Max, opts);
}

ValueVector min_reach_values(const Mdp& mdp, const TargetSet& target, const SolveOptions& opts) {
    return until_values(mdp, StateSet::full(mdp.num_states()), target.states, Direction::Min, opts);
}

ValueVector bounded_until_values(const Mdp& mdp, const StateSet& allowed, const StateSet& target,
                                 std::size_t bound, Direction dir, const SolveOptions& opts) {
    check_epsilon(opts);
    StateIndex root = root_of(mdp, opts);
    StateSet domain = reach(mdp, root);
    std::vector<double> x(mdp.num_states(), 0.0);
    for (StateIndex s : domain)
        if (target.contains(s)) x[s] = 1.0;
    StateSet active = (allowed - target) & domain;
    for (std::size_t step = 0; step < bound; ++step) {
        std::vector<double> next = x;
        for (StateIndex s : active) {
            if (mdp.is_deadlock(s)) continue;
            double best = dir == Direction::Max ? 0.0 : 1.0;
            for (const Choice& c : mdp.choices(s)) {
                double v = choice_value(mdp, c, x);
                best = dir == Direction::Max ? std::max(best, v) : std::min(best, v);
            }
            next[s] = std::clamp(best, 0.0, 1.0);
        }
        x = std::move(next);
        if (opts.observer) opts.observer(x);
    }
    return {std::move(domain), std::move(x), opts.objective_id, opts.epsilon, root};
}

ValueVector next_values(const Mdp& mdp, const StateSet& target, Direction dir, const SolveOptions& opts) {
    check_epsilon(opts);
    StateIndex root = root_of(mdp, opts);
    StateSet domain = reach(mdp, root);
    std::vector<double> indicator(mdp.num_states(), 0.0);
    for (StateIndex s : target) indicator[s] = 1.0;
    std::vector<double> x(mdp.num_states(), 0.0);
    for (StateIndex s : domain) {
        if (mdp.is_deadlock(s)) {
            x[s] = indicator[s];
            continue;
        }
        double best = dir == Direction::Max ? 0.0 : 1.0;
        for (const Choice& c : mdp.choices(s)) {
            double v = choice_value(mdp, c, indicator);
            best = dir == Direction::Max ? std::max(best, v) : std::min(best, v);
        }
        x[s] = std::clamp(best, 0.0, 1.0);
    }
    return {std::move(domain), std::move(x), opts.objective_id, opts.epsilon, root};
}

bool EndComponent::contains(StateIndex s) const { return std::binary_search(states.begin(), states.end(), s); }

const std::vector<ActionIndex>& EndComponent::actions_of(StateIndex s) const {
    auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) throw ValidationError("state not in end component");
    return actions[static_cast<std::size_t>(it - states.begin())];
}

std::vector<EndComponent> mec_decomposition(const Mdp& mdp, const StateSet& restrict_to) {
    std::size_t n = mdp.num_states();
    StateSet alive = restrict_to;
    // Retained choices per state, as pointers into the model.
    std::vector<std::vector<const Choice*>> kept(n);
    for (StateIndex s : alive)
        for (const Choice& c : mdp.choices(s)) kept[s].push_back(&c);

    std::vector<std::vector<StateIndex>> comps;
    std::vector<std::size_t> comp_of(n, 0);
    for (;;) {
        detail::Adjacency adj(n);
        for (StateIndex s : alive)
            for (const Choice* c : kept[s])
                for (const Branch& b : mdp.branches(*c)) adj[s].push_back(b.to);
        comps = detail::strongly_connected_components(adj, alive);
        for (std::size_t i = 0; i < comps.size(); ++i)
            for (StateIndex s : comps[i]) comp_of[s] = i;

        bool changed = false;
        for (StateIndex s : alive.members()) {
            auto& list = kept[s];
            auto stays = [&](const Choice* c) {
                for (const Branch& b : mdp.branches(*c))
                    if (!alive.contains(b.to) || comp_of[b.to] != comp_of[s]) return false;
                return true;
            };
            auto old = list.size();
            list.erase(std::remove_if(list.begin(), list.end(), [&](const Choice* c) { return !stays(c); }),
                       list.end());
            if (list.size() != old) changed = true;
            if (list.empty() && !mdp.is_deadlock(s)) {
                alive.erase(s);
                changed = true;
            }
        }
        if (!changed) break;
    }

    std::vector<EndComponent> result;
    for (const auto& comp : comps) {
        EndComponent ec;
        ec.states = comp;
        for (StateIndex s : comp) {
            std::vector<ActionIndex> acts;
            for (const Choice* c : kept[s]) acts.push_back(c->action);
            ec.actions.push_back(std::move(acts));
        }
        result.push_back(std::move(ec));
    }
    std::sort(result.begin(), result.end(),
              [](const EndComponent& a, const EndComponent& b) { return a.states.front() < b.states.front(); });
    return result;
}

StateSet accepting_region(const Mdp& mdp, const StateSet& b_set) {
    StateSet region(mdp.num_states());
    for (const EndComponent& ec : mec_decomposition(mdp, b_set))
        for (StateIndex s : ec.states) region.insert(s);
    return region;
}

ValueVector persistence_values(const Mdp& mdp, const TargetSet& b_set, const SolveOptions& opts) {
    TargetSet t{accepting_region(mdp, b_set.states), "accepting(" + b_set.source + ")"};
    return max_reach_values(mdp, t, opts);
}

StrategyMap extract_strategy(const Mdp& mdp, const ValueVector& x, const TargetSet& target, Direction dir,
                             const std::vector<EndComponent>& hold) {
    std::size_t n = mdp.num_states();
    const StateSet& domain = x.domain();
    const std::vector<double>& v = x.raw();
    StrategyMap strategy(n);

    for (const EndComponent& ec : hold)
        for (std::size_t i = 0; i < ec.states.size(); ++i)
            if (domain.contains(ec.states[i]) && !ec.actions[i].empty())
                strategy.set(ec.states[i], ec.actions[i].front());

    auto lowest = [&](StateIndex s) {
        if (!strategy.has(s) && !mdp.is_deadlock(s)) strategy.set(s, mdp.choices(s).front().action);
    };

    if (dir == Direction::Min) {
        StateSet avoid = prob0_min(mdp, target.states);
        for (StateIndex s : domain) {
            if (strategy.has(s) || mdp.is_deadlock(s)) continue;
            if (target.states.contains(s)) {
                lowest(s);
            } else if (avoid.contains(s)) {
                for (const Choice& c : mdp.choices(s))
                    if (post_within(mdp, c, avoid)) {
                        strategy.set(s, c.action);
                        break;
                    }
                lowest(s);
            } else {
                double best = std::numeric_limits<double>::infinity();
                for (const Choice& c : mdp.choices(s)) best = std::min(best, choice_value(mdp, c, v));
                for (const Choice& c : mdp.choices(s))
                    if (choice_value(mdp, c, v) <= best + kArgmaxTolerance) {
                        strategy.set(s, c.action);
                        break;
                    }
            }
        }
        return strategy;
    }

    // Max: grow an attractor from the target over near-optimal actions, so that
    // states in cycles of equal value still make progress.
    StateSet zero = prob0_max(mdp, target.states);
    StateSet assigned(n);
    for (StateIndex s : target.states & domain) {
        assigned.insert(s);
        lowest(s);
    }
    StateSet open(n);
    for (StateIndex s : domain)
        if (!assigned.contains(s) && !zero.contains(s) && !mdp.is_deadlock(s)) open.insert(s);
    auto pred = predecessors(mdp, open);
    std::vector<double> best(n, 0.0);
    for (StateIndex s : open)
        for (const Choice& c : mdp.choices(s)) best[s] = std::max(best[s], choice_value(mdp, c, v));

    auto pick = [&](StateIndex s, double tolerance) -> const Choice* {
        for (const Choice& c : mdp.choices(s))
            if (choice_value(mdp, c, v) >= best[s] - tolerance && post_meets(mdp, c, assigned)) return &c;
        return nullptr;
    };
    auto commit = [&](const std::vector<std::pair<StateIndex, const Choice*>>& layer) {
        for (auto [s, c] : layer) {
            if (!strategy.has(s)) strategy.set(s, c->action);
            assigned.insert(s);
            open.erase(s);
        }
    };

    const double relaxed = std::max(kArgmaxTolerance, 10.0 * x.epsilon());
    std::vector<StateIndex> frontier = assigned.members();
    while (!open.empty()) {
        std::vector<std::pair<StateIndex, const Choice*>> layer;
        StateSet seen(n);
        for (StateIndex t : frontier)
            for (const PredEdge& e : pred[t]) seen.insert(e.from);
        for (StateIndex s : seen)
            if (open.contains(s))
                if (const Choice* c = pick(s, kArgmaxTolerance)) layer.emplace_back(s, c);
        for (double tolerance : {relaxed, std::numeric_limits<double>::infinity()}) {
            if (!layer.empty()) break;
            for (StateIndex s : open)
                if (const Choice* c = pick(s, tolerance)) layer.emplace_back(s, c);
        }
        if (layer.empty()) break;
        commit(layer);
        frontier.clear();
        for (auto [s, c] : layer) frontier.push_back(s);
    }
    for (StateIndex s : domain) lowest(s);
    return strategy;
}

bool verify_context(const Mdp& mdp, StateIndex s, const ValueVector& x, const Interval& interval,
                    std::vector<std::string>* warnings) {
    (void)mdp;
    double value = x.at(s);
    bool inside = interval.contains(value);
    if (warnings != nullptr) {
        double slack = 10.0 * x.epsilon();
        // A closed 0 or 1 endpoint cannot be crossed by a probability, so it is not a boundary.
        bool near_lo = !(interval.lo == 0.0 && !interval.lo_open) && std::abs(value - interval.lo) < slack;
        bool near_hi = !(interval.hi == 1.0 && !interval.hi_open) && std::abs(value - interval.hi) < slack;
        if (near_lo || near_hi)
            warnings->push_back("state " + std::to_string(s) + ": value " + format_number(value) +
                                " is within 10*epsilon of the boundary of " + interval.to_string());
    }
    return inside;
}

namespace {

// Pmin[F G B] = 1 - Pmax[G F !B]; the latter is reaching an end component
// that touches !B and then cycling through its !B states.
ObjectiveSolution solve_min_persistence(const Mdp& mdp, const StateSet& b_set, const SolveOptions& opts) {
    std::size_t n = mdp.num_states();
    StateSet not_b = b_set.complement();
    std::vector<EndComponent> bad;
    StateSet bad_region(n);
    for (EndComponent& ec : mec_decomposition(mdp, StateSet::full(n))) {
        bool touches = std::any_of(ec.states.begin(), ec.states.end(), [&](StateIndex s) { return not_b.contains(s); });
        if (!touches) continue;
        for (StateIndex s : ec.states) bad_region.insert(s);
        bad.push_back(std::move(ec));
    }
    TargetSet target{bad_region, "recurrent(!B)"};
    ValueVector y = max_reach_values(mdp, target, opts);

    // Inside each bad component, an attractor to its !B states over retained actions.
    std::vector<EndComponent> hold;
    for (const EndComponent& ec : bad) {
        EndComponent h{ec.states, std::vector<std::vector<ActionIndex>>(ec.states.size())};
        StateSet in(n), done(n);
        for (StateIndex s : ec.states) {
            in.insert(s);
            if (not_b.contains(s)) done.insert(s);
        }
        for (std::size_t i = 0; i < ec.states.size(); ++i)
            if (done.contains(ec.states[i]) && !ec.actions[i].empty()) h.actions[i] = {ec.actions[i].front()};
        for (bool changed = true; changed;) {
            changed = false;
            StateSet layer(n);
            for (std::size_t i = 0; i < ec.states.size(); ++i) {
                StateIndex s = ec.states[i];
                if (done.contains(s)) continue;
                for (ActionIndex a : ec.actions[i])
                    if (post_meets(mdp, *mdp.find_choice(s, a), done)) {
                        h.actions[i] = {a};
                        layer.insert(s);
                        break;
                    }
            }
            if (!layer.empty()) {
                done |= layer;
                changed = true;
            }
        }
        hold.push_back(std::move(h));
    }

    std::vector<double> x(n, 0.0);
    for (StateIndex s : y.domain()) x[s] = 1.0 - y.raw()[s];
    ObjectiveSolution sol;
    sol.strategy = extract_strategy(mdp, y, target, Direction::Max, hold);
    sol.certain = prob0_max(mdp, bad_region) & y.domain();
    sol.values = ValueVector(y.domain(), std::move(x), opts.objective_id, opts.epsilon, y.root());
    return sol;
}

} // namespace

ObjectiveSolution solve_objective(const Mdp& mdp, Direction dir, const PathFormula& path, const SolveOptions& opts) {
    std::size_t n = mdp.num_states();
    ObjectiveSolution sol;
    switch (path.kind()) {
    case PathFormula::Kind::Eventually:
    case PathFormula::Kind::Until: {
        TargetSet target = eval_state_formula(mdp, path.target());
        StateSet allowed = eval_state_formula(mdp, path.guard()).states;
        sol.values = until_values(mdp, allowed, target.states, dir, opts);
        sol.strategy = extract_strategy(mdp, sol.values, target, dir);
        sol.certain = prob1(mdp, allowed, target.states, dir) & sol.values.domain();
        return sol;
    }
    case PathFormula::Kind::EventuallyAlways: {
        TargetSet b = eval_state_formula(mdp, path.target());
        if (dir == Direction::Min) return solve_min_persistence(mdp, b.states, opts);
        std::vector<EndComponent> accepting = mec_decomposition(mdp, b.states);
        StateSet region(n);
        for (const EndComponent& ec : accepting)
            for (StateIndex s : ec.states) region.insert(s);
        TargetSet t{region, "accepting(" + b.source + ")"};
        sol.values = max_reach_values(mdp, t, opts);
        sol.strategy = extract_strategy(mdp, sol.values, t, Direction::Max, accepting);
        sol.certain = prob1_max(mdp, region) & sol.values.domain();
        return sol;
    }
    default: throw ValidationError("strategies are synthesized only for F, U and F G formulas");
    }
}

ValueVector query_values(const Mdp& mdp, Direction dir, const PathFormula& path, const SolveOptions& opts) {
    switch (path.kind()) {
    case PathFormula::Kind::Next:
        return next_values(mdp, eval_state_formula(mdp, path.target()).states, dir, opts);
    case PathFormula::Kind::BoundedUntil:
        return bounded_until_values(mdp, eval_state_formula(mdp, path.guard()).states,
                                    eval_state_formula(mdp, path.target()).states, path.bound(), dir, opts);
    default: return solve_objective(mdp, dir, path, opts).values;
    }
}

} // namespace captl
