#include "captl/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <json.hpp>
#include <set>

#include "captl/errors.hpp"

namespace captl {

const char* to_string(Algorithm a) { return a == Algorithm::Pctl ? "pctl" : "persistence"; }

const Decision* Protocol::find(std::size_t q, StateIndex s) const {
    auto it = entries.find({q, s});
    return it == entries.end() ? nullptr : &it->second;
}

std::optional<std::size_t> ProductDtmc::find(const ProductState& v) const {
    auto it = index_.find(v);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t ProductDtmc::add_state(const ProductState& v) {
    auto [it, inserted] = index_.emplace(v, states_.size());
    if (inserted) {
        states_.push_back(v);
        choices_.emplace_back();
    }
    return it->second;
}

std::size_t ProductDtmc::num_choices() const {
    std::size_t total = 0;
    for (const auto& cs : choices_) total += cs.size();
    return total;
}

std::size_t ProductDtmc::num_transitions() const {
    std::size_t total = 0;
    for (const auto& cs : choices_)
        for (const ProductChoice& c : cs) total += c.branches.size();
    return total;
}

bool ProductDtmc::is_deterministic() const {
    for (const auto& cs : choices_)
        if (cs.size() != 1) return false;
    return true;
}

Dtmc ProductDtmc::to_chain() const {
    Dtmc chain;
    chain.initial = initial();
    chain.rows.resize(num_states());
    for (std::size_t v = 0; v < num_states(); ++v) {
        if (choices_[v].size() != 1)
            throw SynthesisError("product state " + std::to_string(v) + " has " + std::to_string(choices_[v].size()) +
                                 " enabled choices; expected exactly one");
        chain.rows[v] = choices_[v].front().branches;
    }
    return chain;
}

namespace {

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
    return out;
}

std::size_t context_index(const CaptlRequirement& req, const Context& w) {
    return static_cast<std::size_t>(req.find_context(w.id) - req.contexts().data());
}

SolveOptions for_objective(const SolveOptions& opts, const Objective& q) {
    SolveOptions o = opts;
    o.objective_id = q.id;
    o.root.reset();
    return o;
}

} // namespace

PctlResult synth_pctl(const Mdp& mdp, const CaptlRequirement& req, const SolveOptions& opts) {
    const auto& objectives = req.objectives();
    std::size_t m = objectives.size();
    std::vector<std::optional<ObjectiveSolution>> solutions(m);
    std::vector<std::optional<ValueVector>> context_values(m);

    auto solution = [&](std::size_t q) -> const ObjectiveSolution& {
        if (!solutions[q]) solutions[q] = solve_objective(mdp, objectives[q].direction, objectives[q].path,
                                                          for_objective(opts, objectives[q]));
        return *solutions[q];
    };
    // Contexts bound Pmax of the source formula, which is the objective's own vector for Pmax objectives.
    auto context_vector = [&](std::size_t q) -> const ValueVector& {
        if (objectives[q].direction == Direction::Max) return solution(q).values;
        if (!context_values[q])
            context_values[q] = query_values(mdp, Direction::Max, objectives[q].path, for_objective(opts, objectives[q]));
        return *context_values[q];
    };
    std::vector<std::vector<Context>> outgoing(m);
    for (std::size_t q = 0; q < m; ++q) outgoing[q] = contexts_of(req, objectives[q].id);

    PctlResult result;
    result.protocol.algorithm = Algorithm::Pctl;
    std::set<std::pair<std::size_t, StateIndex>> explored;
    std::deque<std::pair<std::size_t, StateIndex>> worklist;
    auto visit = [&](std::size_t q, StateIndex s) {
        if (explored.insert({q, s}).second) worklist.push_back({q, s});
    };
    visit(req.initial_index(), mdp.initial());

    while (!worklist.empty()) {
        auto [q, s] = worklist.front();
        worklist.pop_front();
        bool handed_off = false;
        for (;;) {
            const ValueVector& x = context_vector(q);
            std::vector<const Context*> satisfied;
            for (const Context& w : outgoing[q])
                if (verify_context(mdp, s, x, w.interval, &result.warnings)) satisfied.push_back(&w);
            if (satisfied.empty()) break;
            if (satisfied.size() > 1) {
                std::vector<std::string> ids;
                for (const Context* w : satisfied) ids.push_back(w->id);
                result.warnings.push_back("state " + std::to_string(s) + ", objective '" + objectives[q].id +
                                          "': contexts " + join(ids, ", ") + " all hold; taking " + ids.front());
            }
            std::size_t target = req.index_of(satisfied.front()->target);
            result.protocol.entries[{q, s}] = Decision::change(context_index(req, *satisfied.front()), target);
            q = target;
            if (!explored.insert({q, s}).second) {
                handed_off = true;
                break;
            }
        }
        if (handed_off) continue;

        const ObjectiveSolution& sol = solution(q);
        if (sol.certain.contains(s)) result.accepted.push_back({q, s});
        if (mdp.is_deadlock(s)) continue;
        ActionIndex a = sol.strategy.at(s);
        result.protocol.entries[{q, s}] = Decision::play(a);
        for (StateIndex t : post(mdp, s, a)) visit(q, t);
    }

    InducedChain induced = compose_protocol(mdp, req, result.protocol);
    StateSet target(induced.chain.num_states());
    for (const auto& key : result.accepted)
        if (auto it = induced.index.find(key); it != induced.index.end()) target.insert(it->second);
    result.protocol.satisfaction_prob =
        target.empty() ? 0.0 : dtmc_reach_prob(induced.chain, target)[induced.chain.initial];
    std::sort(result.accepted.begin(), result.accepted.end());
    return result;
}

Partition partition_states(const Mdp& mdp, const CaptlRequirement& req, const SolveOptions& opts) {
    if (auto violations = validate_persistence(req); !violations.empty())
        throw ValidationError("requirement is not a persistence requirement: " + join(violations, "; "));
    const auto& objectives = req.objectives();
    std::size_t m = objectives.size();
    std::size_t n = mdp.num_states();

    Partition partition;
    partition.reachable = reach(mdp, mdp.initial());
    partition.objectives.resize(m);
    std::vector<bool> queued(m, false);
    std::deque<std::size_t> worklist{req.initial_index()};
    queued[req.initial_index()] = true;

    while (!worklist.empty()) {
        std::size_t q = worklist.front();
        worklist.pop_front();
        partition.order.push_back(q);
        auto started = std::chrono::steady_clock::now();
        ObjectivePartition part;
        part.solution = solve_objective(mdp, Direction::Max, objectives[q].path, for_objective(opts, objectives[q]));
        part.blocks.assign(m, StateSet(n));
        part.fired.assign(n, std::nullopt);
        auto outgoing = contexts_of(req, objectives[q].id);
        for (StateIndex s : partition.reachable) {
            const Context* fired = nullptr;
            for (const Context& w : outgoing)
                if (verify_context(mdp, s, part.solution.values, w.interval, &partition.warnings)) {
                    fired = &w;
                    break;
                }
            if (fired == nullptr) {
                part.blocks[q].insert(s);
                continue;
            }
            part.blocks[req.index_of(fired->target)].insert(s);
            part.fired[s] = context_index(req, *fired);
        }
        for (std::size_t t = 0; t < m; ++t)
            if (t != q && !part.blocks[t].empty() && !queued[t]) {
                queued[t] = true;
                worklist.push_back(t);
            }
        part.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        partition.objectives[q] = std::move(part);
    }
    return partition;
}

ProductDtmc build_product(const Mdp& mdp, const CaptlRequirement& req, const std::vector<StrategyMap>& strategies,
                          const Partition& partition) {
    ProductDtmc product;
    std::deque<std::size_t> queue{product.add_state({mdp.initial(), req.initial_index(), Turn::Two})};
    auto target = [&](const ProductState& v) {
        std::size_t before = product.num_states();
        std::size_t id = product.add_state(v);
        if (product.num_states() != before) queue.push_back(id);
        return id;
    };
    while (!queue.empty()) {
        std::size_t v = queue.front();
        queue.pop_front();
        ProductState ps = product.state(v);
        const auto& part = partition.objectives[ps.q];
        if (!part)
            throw SynthesisError("objective '" + req.objectives()[ps.q].id + "' reached but never partitioned");
        if (ps.turn == Turn::Two) {
            if (auto w = part->fired[ps.s]) {
                std::size_t q2 = req.index_of(req.contexts()[*w].target);
                product.add_choice(v, {ProductChoice::Tag::Context, *w, {{target({ps.s, q2, Turn::Two}), 1.0}}});
            } else {
                product.add_choice(v, {ProductChoice::Tag::Tau, 0, {{target({ps.s, ps.q, Turn::One}), 1.0}}});
            }
            continue;
        }
        if (mdp.is_deadlock(ps.s)) {
            product.add_choice(v, {ProductChoice::Tag::Idle, 0, {{target({ps.s, ps.q, Turn::Two}), 1.0}}});
            continue;
        }
        if (ps.q >= strategies.size() || !strategies[ps.q].has(ps.s))
            throw SynthesisError("no strategy action for objective '" + req.objectives()[ps.q].id + "' at state " +
                                 std::to_string(ps.s));
        ActionIndex a = strategies[ps.q].at(ps.s);
        const Choice* c = mdp.find_choice(ps.s, a);
        if (c == nullptr)
            throw SynthesisError("strategy action '" + mdp.action_names()[a] + "' not enabled at state " +
                                 std::to_string(ps.s));
        ProductChoice pc{ProductChoice::Tag::Action, a, {}};
        for (const Branch& b : mdp.branches(*c)) pc.branches.push_back({target({b.to, ps.q, Turn::Two}), b.prob});
        product.add_choice(v, std::move(pc));
    }
    return product;
}

StateSet product_accepting(const Mdp& mdp, const CaptlRequirement& req, const ProductDtmc& product) {
    std::vector<StateSet> b_sets;
    for (const Objective& q : req.objectives()) b_sets.push_back(eval_state_formula(mdp, q.path.target()).states);
    StateSet accepting(product.num_states());
    for (std::size_t v = 0; v < product.num_states(); ++v)
        if (b_sets[product.state(v).q].contains(product.state(v).s)) accepting.insert(v);
    return accepting;
}

double dtmc_persistence_prob(const ProductDtmc& product, const StateSet& accepting) {
    return dtmc_persistence_prob(product.to_chain(), accepting);
}

PersistenceResult synth_persistence(const Mdp& mdp, const CaptlRequirement& req, const SolveOptions& opts) {
    PersistenceResult result;
    result.partition = partition_states(mdp, req, opts);
    const Partition& partition = result.partition;
    std::size_t m = req.objectives().size();
    std::vector<StrategyMap> strategies(m);
    for (std::size_t q = 0; q < m; ++q)
        if (partition.objectives[q]) strategies[q] = partition.objectives[q]->solution.strategy;
    result.product = build_product(mdp, req, strategies, partition);

    Protocol& protocol = result.protocol;
    protocol.algorithm = Algorithm::Persistence;
    for (std::size_t q : partition.order) {
        const ObjectivePartition& part = *partition.objectives[q];
        for (StateIndex s : partition.reachable) {
            if (auto w = part.fired[s]) {
                protocol.entries[{q, s}] = Decision::change(*w, req.index_of(req.contexts()[*w].target));
            } else if (!mdp.is_deadlock(s)) {
                protocol.entries[{q, s}] = Decision::play(strategies[q].at(s));
            }
        }
    }
    protocol.satisfaction_prob =
        dtmc_persistence_prob(result.product, product_accepting(mdp, req, result.product));
    return result;
}

InducedChain compose_protocol(const Mdp& mdp, const CaptlRequirement& req, const Protocol& protocol) {
    InducedChain induced;
    std::deque<std::size_t> queue;
    auto intern = [&](std::size_t q, StateIndex s) {
        auto [it, inserted] = induced.index.emplace(std::make_pair(q, s), induced.states.size());
        if (inserted) {
            induced.states.push_back({q, s});
            induced.chain.rows.emplace_back();
            queue.push_back(it->second);
        }
        return it->second;
    };
    intern(req.initial_index(), mdp.initial());
    induced.chain.initial = 0;
    while (!queue.empty()) {
        std::size_t v = queue.front();
        queue.pop_front();
        auto [q, s] = induced.states[v];
        const Decision* d = protocol.find(q, s);
        std::vector<Branch> row;
        if (d == nullptr) {
            if (!mdp.is_deadlock(s))
                throw SynthesisError("protocol undefined at objective '" + req.objectives()[q].id + "', state " +
                                     std::to_string(s));
        } else if (d->kind == Decision::Kind::Switch) {
            row.push_back({intern(d->target, s), 1.0});
        } else {
            const Choice* c = mdp.find_choice(s, d->action);
            if (c == nullptr)
                throw SynthesisError("protocol action not enabled at state " + std::to_string(s));
            for (const Branch& b : mdp.branches(*c)) row.push_back({intern(q, b.to), b.prob});
        }
        induced.chain.rows[v] = std::move(row);
    }
    return induced;
}

std::string serialize_protocol(const Mdp& mdp, const CaptlRequirement& req, const Protocol& protocol) {
    using ojson = nlohmann::ordered_json;
    ojson doc;
    doc["algorithm"] = to_string(protocol.algorithm);
    doc["c"] = protocol.satisfaction_prob;
    ojson entries = ojson::array();
    for (const auto& [key, d] : protocol.entries) {
        ojson decision;
        if (d.kind == Decision::Kind::Action) {
            decision["kind"] = "action";
            decision["action"] = mdp.action_names()[d.action];
        } else {
            decision["kind"] = "switch";
            decision["context"] = req.contexts()[d.context].id;
            decision["target"] = req.objectives()[d.target].id;
        }
        entries.push_back({{"objective", req.objectives()[key.first].id}, {"state", key.second}, {"decision", decision}});
    }
    doc["entries"] = std::move(entries);
    return doc.dump(1) + "\n";
}

namespace {

std::string state_text(const Mdp& mdp, StateIndex s) {
    return mdp.display_name(s).empty() ? std::to_string(s) : mdp.display_name(s);
}

std::string prob_text(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", p);
    return buf;
}

} // namespace

std::string product_to_dot(const Mdp& mdp, const CaptlRequirement& req, const ProductDtmc& product) {
    std::string out = "digraph product {\n  rankdir=LR;\n";
    for (std::size_t v = 0; v < product.num_states(); ++v) {
        const ProductState& ps = product.state(v);
        bool two = ps.turn == Turn::Two;
        out += "  v" + std::to_string(v) + " [label=\"" + state_text(mdp, ps.s) + ", " + req.objectives()[ps.q].id +
               (two ? ", 2" : ", 1") + "\", shape=" + (two ? "doublecircle" : "circle") + "];\n";
    }
    for (std::size_t v = 0; v < product.num_states(); ++v)
        for (const ProductChoice& c : product.choices(v))
            for (const Branch& b : c.branches) {
                out += "  v" + std::to_string(v) + " -> v" + std::to_string(b.to) + " [label=\"";
                switch (c.tag) {
                case ProductChoice::Tag::Action:
                    out += mdp.action_names()[c.label] + " " + prob_text(b.prob) + "\"";
                    break;
                case ProductChoice::Tag::Context: out += "w:" + req.contexts()[c.label].id + "\""; break;
                case ProductChoice::Tag::Tau: out += "tau\", style=dashed"; break;
                case ProductChoice::Tag::Idle: out += "idle\""; break;
                }
                out += "];\n";
            }
    out += "}\n";
    return out;
}

std::string induced_to_dot(const Mdp& mdp, const CaptlRequirement& req, const InducedChain& chain) {
    std::string out = "digraph induced {\n  rankdir=LR;\n";
    for (std::size_t v = 0; v < chain.states.size(); ++v) {
        auto [q, s] = chain.states[v];
        out += "  v" + std::to_string(v) + " [label=\"" + req.objectives()[q].id + ", " + state_text(mdp, s) +
               "\"];\n";
    }
    for (std::size_t v = 0; v < chain.states.size(); ++v)
        for (const Branch& b : chain.chain.rows[v])
            out += "  v" + std::to_string(v) + " -> v" + std::to_string(b.to) + " [label=\"" + prob_text(b.prob) +
                   "\"];\n";
    out += "}\n";
    return out;
}

} // namespace captl
