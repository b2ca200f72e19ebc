#include "captl/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <stdexcept>

#include "captl/errors.hpp"

namespace captl::oracle {

namespace {

constexpr std::size_t kExactLimit = 2000;
constexpr std::size_t kStrategyLimit = 1000000;

StateSet forward_closure(const Dtmc& chain, StateIndex from) {
    StateSet seen(chain.num_states());
    std::deque<StateIndex> queue{from};
    seen.insert(from);
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

// States of `within` with a path (inside `within`) into `goal`.
StateSet reaches(const Dtmc& chain, const StateSet& within, const StateSet& goal) {
    StateSet result = goal & within;
    for (bool changed = true; changed;) {
        changed = false;
        for (StateIndex s : within) {
            if (result.contains(s)) continue;
            for (const Branch& b : chain.rows[s])
                if (result.contains(b.to)) {
                    result.insert(s);
                    changed = true;
                    break;
                }
        }
    }
    return result;
}

// Solves A x = b in place over the rationals.
std::vector<mpq_class> gauss(std::vector<std::vector<mpq_class>> a, std::vector<mpq_class> b) {
    std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && a[pivot][col] == 0) ++pivot;
        if (pivot == n) throw std::logic_error("singular system in exact solve");
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || a[row][col] == 0) continue;
            mpq_class factor = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
            b[row] -= factor * b[col];
        }
    }
    std::vector<mpq_class> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

} // namespace

mpq_class exact_decimal(double v) {
    char buf[512];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    if (ec != std::errc()) throw std::logic_error("cannot format probability");
    std::string text(buf, ptr);
    auto dot = text.find('.');
    std::string digits = text;
    std::size_t scale = 0;
    if (dot != std::string::npos) {
        digits = text.substr(0, dot) + text.substr(dot + 1);
        scale = text.size() - dot - 1;
    }
    mpz_class num(digits, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, scale);
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

std::vector<mpq_class> exact_dtmc_reach(const Dtmc& chain, const StateSet& target) {
    std::size_t n = chain.num_states();
    if (n > kExactLimit) throw ValidationError("exact solve limited to 2000 states");
    StateSet live = forward_closure(chain, chain.initial);
    StateSet yes = target & live;
    StateSet positive = reaches(chain, live, yes);
    StateSet no = live - positive;
    StateSet sure = (live - reaches(chain, live - yes, no)) | yes;

    std::vector<StateIndex> unknown;
    std::vector<std::size_t> column(n, 0);
    for (StateIndex s : positive)
        if (!sure.contains(s)) {
            column[s] = unknown.size();
            unknown.push_back(s);
        }
    std::size_t u = unknown.size();
    std::vector<std::vector<mpq_class>> a(u, std::vector<mpq_class>(u, 0));
    std::vector<mpq_class> b(u, 0);
    for (std::size_t i = 0; i < u; ++i) {
        a[i][i] = 1;
        for (const Branch& br : chain.rows[unknown[i]]) {
            mpq_class p = exact_decimal(br.prob);
            if (sure.contains(br.to))
                b[i] += p;
            else if (positive.contains(br.to))
                a[i][column[br.to]] -= p;
        }
    }
    std::vector<mpq_class> solution = u == 0 ? std::vector<mpq_class>{} : gauss(std::move(a), std::move(b));
    std::vector<mpq_class> x(n, 0);
    for (StateIndex s : sure) x[s] = 1;
    for (std::size_t i = 0; i < u; ++i) x[unknown[i]] = solution[i];
    return x;
}

std::vector<std::vector<StateIndex>> naive_bsccs(const Dtmc& chain) {
    StateSet live = forward_closure(chain, chain.initial);
    std::vector<StateSet> closure(chain.num_states());
    for (StateIndex s : live) closure[s] = forward_closure(chain, s);
    std::vector<std::vector<StateIndex>> result;
    StateSet covered(chain.num_states());
    for (StateIndex s : live) {
        if (covered.contains(s)) continue;
        bool bottom = true;
        for (StateIndex t : closure[s])
            if (!closure[t].contains(s)) {
                bottom = false;
                break;
            }
        if (!bottom) continue;
        covered |= closure[s];
        result.push_back(closure[s].members());
    }
    return result;
}

mpq_class exact_dtmc_persistence(const Dtmc& chain, const StateSet& accepting) {
    StateSet target(chain.num_states());
    for (const auto& comp : naive_bsccs(chain))
        if (std::all_of(comp.begin(), comp.end(), [&](StateIndex s) { return accepting.contains(s); }))
            for (StateIndex s : comp) target.insert(s);
    return exact_dtmc_reach(chain, target)[chain.initial];
}

std::vector<EndComponent> naive_mecs(const Mdp& mdp, const StateSet& restrict_to) {
    std::size_t n = mdp.num_states();
    StateSet alive = restrict_to;
    std::vector<std::vector<const Choice*>> acts(n);
    for (StateIndex s : alive)
        for (const Choice& c : mdp.choices(s)) acts[s].push_back(&c);

    auto closure_of = [&](StateIndex from) {
        StateSet seen(n);
        std::deque<StateIndex> queue{from};
        seen.insert(from);
        while (!queue.empty()) {
            StateIndex s = queue.front();
            queue.pop_front();
            for (const Choice* c : acts[s])
                for (const Branch& b : mdp.branches(*c))
                    if (alive.contains(b.to) && !seen.contains(b.to)) {
                        seen.insert(b.to);
                        queue.push_back(b.to);
                    }
        }
        return seen;
    };

    std::vector<StateSet> closure(n);
    for (bool changed = true; changed;) {
        changed = false;
        for (StateIndex s : alive) {
            auto& list = acts[s];
            auto old = list.size();
            list.erase(std::remove_if(list.begin(), list.end(),
                                      [&](const Choice* c) {
                                          for (const Branch& b : mdp.branches(*c))
                                              if (!alive.contains(b.to)) return true;
                                          return false;
                                      }),
                       list.end());
            changed |= list.size() != old;
        }
        for (StateIndex s : alive) closure[s] = closure_of(s);
        for (StateIndex s : alive) {
            auto& list = acts[s];
            auto old = list.size();
            list.erase(std::remove_if(list.begin(), list.end(),
                                      [&](const Choice* c) {
                                          for (const Branch& b : mdp.branches(*c))
                                              if (!closure[b.to].contains(s)) return true;
                                          return false;
                                      }),
                       list.end());
            changed |= list.size() != old;
        }
        for (StateIndex s : alive.members())
            if (acts[s].empty() && !mdp.is_deadlock(s)) {
                alive.erase(s);
                changed = true;
            }
    }

    for (StateIndex s : alive) closure[s] = closure_of(s);
    std::vector<EndComponent> result;
    StateSet covered(n);
    for (StateIndex s : alive) {
        if (covered.contains(s)) continue;
        EndComponent ec;
        for (StateIndex t : closure[s])
            if (closure[t].contains(s)) ec.states.push_back(t);
        for (StateIndex t : ec.states) {
            covered.insert(t);
            std::vector<ActionIndex> list;
            for (const Choice* c : acts[t]) list.push_back(c->action);
            ec.actions.push_back(std::move(list));
        }
        result.push_back(std::move(ec));
    }

    // Recheck: every component is closed under its actions and strongly connected.
    for (const EndComponent& ec : result) {
        for (std::size_t i = 0; i < ec.states.size(); ++i) {
            for (ActionIndex a : ec.actions[i])
                for (const Branch& b : mdp.branches(*mdp.find_choice(ec.states[i], a)))
                    if (!ec.contains(b.to)) throw std::logic_error("end component not closed");
            for (StateIndex t : ec.states)
                if (!closure[ec.states[i]].contains(t)) throw std::logic_error("end component not connected");
        }
    }
    return result;
}

Dtmc induced_chain(const Mdp& mdp, const StrategyMap& strategy) {
    Dtmc chain;
    chain.initial = mdp.initial();
    chain.rows.resize(mdp.num_states());
    for (StateIndex s = 0; s < mdp.num_states(); ++s)
        if (strategy.has(s)) {
            const Choice* c = mdp.find_choice(s, strategy.at(s));
            if (c == nullptr) throw ValidationError("strategy plays a disabled action at " + std::to_string(s));
            auto bs = mdp.branches(*c);
            chain.rows[s].assign(bs.begin(), bs.end());
        }
    return chain;
}

mpq_class enumerate_strategy_optimum(const Mdp& mdp, QueryKind kind, const StateSet& target, Direction dir) {
    std::vector<StateIndex> states;
    for (StateIndex s : reach(mdp, mdp.initial()))
        if (!mdp.is_deadlock(s)) states.push_back(s);
    std::size_t total = 1;
    for (StateIndex s : states) {
        total *= mdp.choices(s).size();
        if (total > kStrategyLimit) throw ValidationError("too many strategies to enumerate");
    }
    std::vector<std::size_t> digit(states.size(), 0);
    std::optional<mpq_class> best;
    for (std::size_t count = 0; count < total; ++count) {
        StrategyMap strategy(mdp.num_states());
        for (std::size_t i = 0; i < states.size(); ++i) strategy.set(states[i], mdp.choices(states[i])[digit[i]].action);
        Dtmc chain = induced_chain(mdp, strategy);
        mpq_class v = kind == QueryKind::Reach ? exact_dtmc_reach(chain, target)[chain.initial]
                                               : exact_dtmc_persistence(chain, target);
        if (!best || (dir == Direction::Max ? v > *best : v < *best)) best = v;
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (++digit[i] < mdp.choices(states[i]).size()) break;
            digit[i] = 0;
        }
    }
    return *best;
}

SimulationStats simulate(const Dtmc& chain, const StateSet& target, QueryKind kind, std::size_t runs,
                         std::size_t horizon, std::uint64_t seed) {
    if (runs == 0) throw ValidationError("runs must be at least 1");
    std::size_t n = chain.num_states();
    if (horizon == 0) horizon = 10 * n;

    // 0 = transient, 1 = accepting bottom SCC, 2 = rejecting bottom SCC.
    std::vector<int> fate(n, 0);
    if (kind == QueryKind::Persist)
        for (const auto& comp : bottom_sccs(chain)) {
            bool good = std::all_of(comp.begin(), comp.end(), [&](StateIndex s) { return target.contains(s); });
            for (StateIndex s : comp) fate[s] = good ? 1 : 2;
        }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SimulationStats stats;
    stats.runs = runs;
    for (std::size_t run = 0; run < runs; ++run) {
        StateIndex s = chain.initial;
        bool success = false;
        for (std::size_t step = 0;; ++step) {
            if (kind == QueryKind::Reach && target.contains(s)) {
                success = true;
                break;
            }
            if (kind == QueryKind::Persist && fate[s] != 0) {
                success = fate[s] == 1;
                break;
            }
            if (step == horizon || chain.rows[s].empty()) break;
            double u = unit(rng);
            const auto& row = chain.rows[s];
            StateIndex next = row.back().to;
            for (const Branch& b : row) {
                if (u < b.prob) {
                    next = b.to;
                    break;
                }
                u -= b.prob;
            }
            s = next;
        }
        if (success) ++stats.successes;
    }
    stats.mean = static_cast<double>(stats.successes) / static_cast<double>(runs);
    stats.std_error = std::sqrt(stats.mean * (1.0 - stats.mean) / static_cast<double>(runs));
    stats.half_width = 3.0 * stats.std_error;
    return stats;
}

Trace collapse(const Trace& trace) {
    Trace out;
    for (const LabelSet& l : trace)
        if (out.empty() || out.back() != l) out.push_back(l);
    return out;
}

bool stutter_equivalent(const Trace& a, const Trace& b) { return collapse(a) == collapse(b); }

std::vector<TraceSample> enumerate_paths(const Dtmc& chain, const std::vector<LabelSet>& labels,
                                         std::size_t max_length) {
    std::vector<TraceSample> out;
    TraceSample current{{chain.initial}, {labels[chain.initial]}, 1};
    auto extend = [&](auto&& self) -> void {
        out.push_back(current);
        if (current.path.size() > max_length) return; // path holds transitions + 1 states
        StateIndex s = current.path.back();
        std::vector<Branch> row = chain.rows[s];
        if (row.empty()) row.push_back({s, 1.0});
        for (const Branch& b : row) {
            mpq_class saved = current.probability;
            current.path.push_back(b.to);
            current.trace.push_back(labels[b.to]);
            current.probability *= exact_decimal(b.prob);
            self(self);
            current.path.pop_back();
            current.trace.pop_back();
            current.probability = saved;
        }
    };
    extend(extend);
    return out;
}

CorrespondenceReport check_stutter_correspondence(const Mdp& mdp, const InducedChain& induced,
                                                  const ProductDtmc& product, std::size_t k) {
    auto label_of = [&](StateIndex s) {
        auto l = mdp.labels(s);
        return LabelSet(l.begin(), l.end());
    };
    std::vector<LabelSet> induced_labels, product_labels;
    for (const auto& [q, s] : induced.states) induced_labels.push_back(label_of(s));
    for (std::size_t v = 0; v < product.num_states(); ++v) product_labels.push_back(label_of(product.state(v).s));

    using Key = std::pair<Trace, std::string>;
    auto key = [](const TraceSample& t) { return Key{collapse(t.trace), t.probability.get_str()}; };
    auto turn_two = [&](const TraceSample& t) { return product.state(t.path.back()).turn == Turn::Two; };

    auto induced_paths = enumerate_paths(induced.chain, induced_labels, k);
    auto product_paths = enumerate_paths(product.to_chain(), product_labels, 2 * k);

    CorrespondenceReport report;
    report.induced_paths = induced_paths.size();
    std::set<Key> product_keys, induced_keys;
    for (const TraceSample& t : product_paths)
        if (turn_two(t)) product_keys.insert(key(t));
    for (const TraceSample& t : induced_paths) induced_keys.insert(key(t));

    auto describe = [](const TraceSample& t) {
        std::string out;
        for (StateIndex s : t.path) out += (out.empty() ? "" : " ") + std::to_string(s);
        return out + " (p=" + t.probability.get_str() + ")";
    };
    for (const TraceSample& t : induced_paths)
        if (!product_keys.count(key(t)) && report.failures.size() < 10)
            report.failures.push_back("induced path " + describe(t) + " has no product counterpart");
    for (const TraceSample& t : product_paths) {
        if (t.path.size() > k + 1 || !turn_two(t)) continue;
        ++report.product_paths;
        if (!induced_keys.count(key(t)) && report.failures.size() < 10)
            report.failures.push_back("product path " + describe(t) + " has no induced counterpart");
    }
    return report;
}

} // namespace captl::oracle
