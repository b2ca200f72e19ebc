#include "generators.hpp"

#include <algorithm>
#include <numeric>

namespace captl::testing {

namespace {

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// Splits 20 units (of 0.05) into `parts` positive shares.
std::vector<int> split_units(Rng& rng, std::size_t parts) {
    std::vector<int> cuts;
    std::vector<int> pool(19);
    std::iota(pool.begin(), pool.end(), 1);
    std::shuffle(pool.begin(), pool.end(), rng);
    cuts.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(parts - 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> shares;
    int prev = 0;
    for (int c : cuts) {
        shares.push_back(c - prev);
        prev = c;
    }
    shares.push_back(20 - prev);
    return shares;
}

std::vector<Branch> random_distribution(Rng& rng, std::size_t n, std::size_t max_successors) {
    std::size_t m = uniform(rng, 1, std::min(max_successors, n));
    std::vector<StateIndex> targets(n);
    std::iota(targets.begin(), targets.end(), 0);
    std::shuffle(targets.begin(), targets.end(), rng);
    targets.resize(m);
    std::sort(targets.begin(), targets.end());
    auto shares = split_units(rng, m);
    std::vector<Branch> out;
    for (std::size_t i = 0; i < m; ++i) out.push_back({targets[i], shares[i] / 20.0});
    return out;
}

double twentieth(std::size_t k) { return static_cast<double>(k) / 20.0; }

} // namespace

Mdp random_mdp(Rng& rng, const RandomMdpParams& p) {
    std::size_t n = uniform(rng, p.min_states, p.max_states);
    MdpBuilder b(n);
    for (std::size_t a = 0; a < p.max_actions; ++a) b.add_action("a" + std::to_string(a));
    for (const auto& q : p.props) b.add_proposition(q);

    std::vector<StateIndex> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    StateSet branching(n);
    for (std::size_t i = 0; i < std::min(n, p.max_branching_states); ++i) branching.insert(order[i]);

    for (StateIndex s = 0; s < n; ++s) {
        for (const auto& q : p.props)
            if (coin(rng, p.label_prob)) b.add_label(s, q);
        if (p.names) b.set_name(s, "s" + std::to_string(s));
        if (coin(rng, p.deadlock_prob)) continue;
        if (p.absorbing_prob > 0.0 && coin(rng, p.absorbing_prob)) {
            b.add_choice(s, ActionIndex{0}, {{s, 1.0}});
            continue;
        }
        std::size_t k = branching.contains(s) ? uniform(rng, 1, p.max_actions) : 1;
        std::vector<ActionIndex> acts(p.max_actions);
        std::iota(acts.begin(), acts.end(), 0);
        std::shuffle(acts.begin(), acts.end(), rng);
        acts.resize(k);
        std::sort(acts.begin(), acts.end());
        for (ActionIndex a : acts) b.add_choice(s, a, random_distribution(rng, n, p.max_successors));
    }
    b.set_initial(0);
    return b.build();
}

Dtmc random_dtmc(Rng& rng, std::size_t states, std::size_t max_successors) {
    Dtmc chain;
    chain.rows.resize(states);
    for (auto& row : chain.rows) row = random_distribution(rng, states, max_successors);
    return chain;
}

StateFormula random_state_formula(Rng& rng, const std::vector<std::string>& props, int depth) {
    auto atom = [&]() { return StateFormula::atom(props[uniform(rng, 0, props.size() - 1)]); };
    if (depth <= 0) return coin(rng, 0.1) ? StateFormula::truth() : atom();
    switch (uniform(rng, 0, 4)) {
    case 0:
        return StateFormula::negation(random_state_formula(rng, props, depth - 1));
    case 1:
        return StateFormula::conjunction(random_state_formula(rng, props, depth - 1),
                                         random_state_formula(rng, props, depth - 1));
    case 2:
        return StateFormula::disjunction(random_state_formula(rng, props, depth - 1),
                                         random_state_formula(rng, props, depth - 1));
    default:
        return atom();
    }
}

CaptlRequirement random_persistence_requirement(Rng& rng, const std::vector<std::string>& props,
                                                std::size_t max_objectives) {
    std::size_t k = uniform(rng, 1, max_objectives);
    std::vector<Objective> objectives;
    for (std::size_t i = 0; i < k; ++i)
        objectives.push_back(
            {"q" + std::to_string(i), Direction::Max, PathFormula::eventually_always(random_state_formula(rng, props))});
    std::vector<Context> contexts;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        std::size_t d = uniform(rng, 0, std::min<std::size_t>(2, k - 1 - i));
        if (d == 0) continue;
        std::vector<std::size_t> targets;
        for (std::size_t j = i + 1; j < k; ++j) targets.push_back(j);
        std::shuffle(targets.begin(), targets.end(), rng);
        targets.resize(d);
        // Interval end points are multiples of 0.05 in (0, 1].
        std::size_t c = uniform(rng, d, 20);
        std::vector<std::size_t> inner(c - 1);
        std::iota(inner.begin(), inner.end(), 1);
        std::shuffle(inner.begin(), inner.end(), rng);
        inner.resize(d - 1);
        std::sort(inner.begin(), inner.end());
        std::vector<std::size_t> bounds{0};
        bounds.insert(bounds.end(), inner.begin(), inner.end());
        bounds.push_back(c);
        std::vector<Context> mine;
        for (std::size_t t = 0; t < d; ++t) {
            Interval iv{twentieth(bounds[t]), false, twentieth(bounds[t + 1]), true};
            mine.push_back({"w" + std::to_string(i) + "_" + std::to_string(targets[t]), objectives[i].id,
                            objectives[targets[t]].id, objectives[i].path, iv});
        }
        std::shuffle(mine.begin(), mine.end(), rng);
        contexts.insert(contexts.end(), mine.begin(), mine.end());
    }
    return CaptlRequirement(std::move(objectives), std::move(contexts), "q0");
}

CaptlRequirement random_general_requirement(Rng& rng, const std::vector<std::string>& props,
                                            std::size_t max_objectives) {
    std::size_t k = uniform(rng, 1, max_objectives);
    std::vector<Objective> objectives;
    for (std::size_t i = 0; i < k; ++i) {
        StateFormula f = random_state_formula(rng, props, static_cast<int>(uniform(rng, 0, 3)));
        Direction dir = coin(rng, 0.5) ? Direction::Max : Direction::Min;
        PathFormula path = coin(rng, 0.5) ? PathFormula::eventually(f) : PathFormula::eventually_always(f);
        objectives.push_back({"obj" + std::to_string(i), dir, path});
    }
    std::vector<Context> contexts;
    std::size_t edges = k < 2 ? 0 : uniform(rng, 0, 2 * k);
    for (std::size_t e = 0; e < edges; ++e) {
        std::size_t from = uniform(rng, 0, k - 2);
        std::size_t to = uniform(rng, from + 1, k - 1);
        Interval iv;
        for (;;) {
            std::size_t lo = uniform(rng, 0, 20), hi = uniform(rng, lo, 20);
            iv = {twentieth(lo), coin(rng, 0.3), twentieth(hi), coin(rng, 0.6)};
            if (iv.well_formed()) break;
        }
        contexts.push_back({"ctx" + std::to_string(e), objectives[from].id, objectives[to].id, objectives[from].path, iv});
    }
    std::string initial = objectives[uniform(rng, 0, k - 1)].id;
    return CaptlRequirement(std::move(objectives), std::move(contexts), initial);
}

StateSet labelled(const Mdp& mdp, const std::string& prop) {
    StateSet out(mdp.num_states());
    auto p = mdp.find_proposition(prop);
    if (!p) return out;
    for (StateIndex s = 0; s < mdp.num_states(); ++s)
        if (mdp.has_label(s, *p)) out.insert(s);
    return out;
}

} // namespace captl::testing
