#include <doctest.h>

#include <cmath>

#include "captl/casestudies.hpp"
#include "captl/engine.hpp"
#include "captl/errors.hpp"
#include "captl/model_io.hpp"
#include "captl/oracle.hpp"
#include "captl/requirement.hpp"
#include "support/generators.hpp"

using namespace captl;
using testing::Rng;

namespace {

// s0 -a-> {0.9 goal, 0.1 trap}, optionally -b-> {0.5 goal, 0.5 trap}; goal/trap absorbing.
Mdp toy(bool with_b) {
    MdpBuilder b(3);
    b.add_action("a");
    b.add_action("b");
    b.add_action("stay");
    b.add_proposition("goal");
    b.add_proposition("trap");
    b.add_label(1, "goal").add_label(2, "trap");
    b.add_choice(0, "a", {{1, 0.9}, {2, 0.1}});
    if (with_b) b.add_choice(0, "b", {{1, 0.5}, {2, 0.5}});
    b.add_choice(1, "stay", {{1, 1.0}});
    b.add_choice(2, "stay", {{2, 1.0}});
    return b.build();
}

TargetSet target_of(const Mdp& m, const char* formula) { return eval_state_formula(m, parse_state_formula(formula)); }

ValueVector constant_vector(double v) {
    StateSet dom(1);
    dom.insert(0);
    return ValueVector(dom, {v}, "q", 1e-6, 0);
}

bool truth(const Mdp& m, StateIndex s, const StateFormula& f) {
    switch (f.kind()) {
    case StateFormula::Kind::True:
        return true;
    case StateFormula::Kind::Atom:
        return m.has_label(s, *m.find_proposition(f.name()));
    case StateFormula::Kind::Not:
        return !truth(m, s, f.operand());
    case StateFormula::Kind::And:
        return truth(m, s, f.lhs()) && truth(m, s, f.rhs());
    case StateFormula::Kind::Or:
        return truth(m, s, f.lhs()) || truth(m, s, f.rhs());
    }
    return false;
}

double as_double(const mpq_class& q) { return q.get_d(); }

// The stop rule bounds the change per sweep, not the error; on slowly mixing
// models the error at epsilon 1e-6 reaches ~1e-5, so oracle comparisons at
// 1e-6 tolerance solve with a tighter epsilon.
SolveOptions fine() {
    SolveOptions o;
    o.epsilon = 1e-9;
    return o;
}

} // namespace

TEST_CASE("eval_state_formula") {
    Mdp m = toy(true);
    CHECK(target_of(m, "true").states.size() == 3);
    CHECK(target_of(m, "\"goal\"").states.members() == std::vector<StateIndex>{1});
    CHECK(target_of(m, "!(\"goal\" | \"trap\")").states.members() == std::vector<StateIndex>{0});
    CHECK_THROWS_WITH_AS(target_of(m, "\"nope\""), "unknown proposition 'nope'", ValidationError);

    Mdp robot = gen_robot({}).model;
    TargetSet both = target_of(robot, "\"goal\" & \"on\"");
    for (StateIndex s = 0; s < robot.num_states(); ++s)
        CHECK(both.states.contains(s) ==
              (robot.has_label(s, *robot.find_proposition("goal")) && robot.has_label(s, *robot.find_proposition("on"))));
}

TEST_CASE("property: state formulas agree with per-state truth tables") {
    Rng rng(5);
    for (int round = 0; round < 60; ++round) {
        Mdp m = testing::random_mdp(rng);
        StateFormula f = testing::random_state_formula(rng, {"a", "b", "c"}, 3);
        TargetSet t = eval_state_formula(m, f);
        for (StateIndex s = 0; s < m.num_states(); ++s) CHECK(t.states.contains(s) == truth(m, s, f));
    }
}

TEST_CASE("qualitative precomputation") {
    Mdp m = toy(true);
    CHECK(prob1_max(m, StateSet::full(3)) == StateSet::full(3));
    StateSet goal = target_of(m, "\"goal\"").states;
    CHECK(prob0_max(m, goal).members() == std::vector<StateIndex>{2});
    CHECK(prob1_max(m, goal).members() == std::vector<StateIndex>{1});
}

TEST_CASE("property: prob0/prob1 agree with tight value iteration") {
    Rng rng(15);
    testing::RandomMdpParams p;
    p.min_states = p.max_states = 15;
    p.max_actions = 3;
    SolveOptions tight;
    tight.epsilon = 1e-12;
    for (int round = 0; round < 60; ++round) {
        Mdp m = testing::random_mdp(rng, p);
        TargetSet t{testing::labelled(m, "a"), "a"};
        for (Direction dir : {Direction::Max, Direction::Min}) {
            ValueVector x = until_values(m, StateSet::full(m.num_states()), t.states, dir, [&] {
                SolveOptions o = tight;
                o.root = 0;
                return o;
            }());
            StateSet one = dir == Direction::Max ? prob1_max(m, t.states) : prob1_min(m, t.states);
            StateSet zero = dir == Direction::Max ? prob0_max(m, t.states) : prob0_min(m, t.states);
            for (StateIndex s : x.domain()) {
                CHECK((x.at(s) >= 1.0 - 1e-6) == one.contains(s));
                CHECK((x.at(s) == 0.0) == zero.contains(s));
            }
        }
    }
}

TEST_CASE("reachability on the toy model") {
    TargetSet goal = target_of(toy(false), "\"goal\"");
    CHECK(max_reach_values(toy(false), goal).at(0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(max_reach_values(toy(true), goal).at(0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(min_reach_values(toy(true), goal).at(0) == doctest::Approx(0.5).epsilon(1e-12));
    // Without a choice min and max coincide.
    CHECK(min_reach_values(toy(false), goal).at(0) == max_reach_values(toy(false), goal).at(0));

    MdpBuilder b(3);
    b.add_choice(0, "risky", {{1, 1.0}});
    b.add_choice(0, "safe", {{2, 1.0}});
    b.add_choice(1, "stay", {{1, 1.0}});
    b.add_choice(2, "stay", {{2, 1.0}});
    b.add_proposition("t");
    b.add_label(1, "t");
    Mdp avoid = b.build();
    CHECK(min_reach_values(avoid, target_of(avoid, "\"t\"")).at(0) == 0.0);
}

TEST_CASE("values are defined exactly on reach(root)") {
    Mdp m = toy(true);
    SolveOptions o;
    o.root = 1;
    ValueVector x = max_reach_values(m, target_of(m, "\"goal\""), o);
    CHECK(x.domain().members() == std::vector<StateIndex>{1});
    CHECK(x.root() == 1);
    CHECK_THROWS_AS(x.at(0), ValidationError);
}

TEST_CASE("iteration cap raises ConvergenceError") {
    // Geometric retry loop: needs many sweeps to converge to 1/2.
    MdpBuilder b(3);
    b.add_choice(0, "a", {{0, 0.9}, {1, 0.05}, {2, 0.05}});
    b.add_choice(1, "a", {{1, 1.0}});
    b.add_choice(2, "a", {{2, 1.0}});
    b.add_proposition("t");
    b.add_label(1, "t");
    Mdp m = b.build();
    SolveOptions o;
    o.max_iterations = 3;
    CHECK_THROWS_AS(max_reach_values(m, target_of(m, "\"t\""), o), ConvergenceError);
    CHECK(max_reach_values(m, target_of(m, "\"t\"")).at(0) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("property: reachability matches strategy enumeration") {
    Rng rng(25);
    testing::RandomMdpParams p;
    p.min_states = 10;
    p.max_states = 25;
    p.max_branching_states = 8;
    for (int round = 0; round < 40; ++round) {
        Mdp m = testing::random_mdp(rng, p);
        TargetSet t{testing::labelled(m, "a") & testing::labelled(m, "b"), "a & b"};
        double vmax = max_reach_values(m, t, fine()).at(0);
        double vmin = min_reach_values(m, t, fine()).at(0);
        CHECK(std::abs(vmax - as_double(oracle::enumerate_strategy_optimum(m, oracle::QueryKind::Reach, t.states,
                                                                             Direction::Max))) <= 1e-6);
        CHECK(std::abs(vmin - as_double(oracle::enumerate_strategy_optimum(m, oracle::QueryKind::Reach, t.states,
                                                                             Direction::Min))) <= 1e-6);
    }
}

TEST_CASE("property: min <= max and monotone iterates") {
    Rng rng(26);
    testing::RandomMdpParams p;
    p.max_states = 20;
    p.max_actions = 3;
    for (int round = 0; round < 40; ++round) {
        Mdp m = testing::random_mdp(rng, p);
        TargetSet t{testing::labelled(m, "c"), "c"};
        std::vector<double> last;
        bool monotone = true;
        SolveOptions o;
        o.observer = [&](const std::vector<double>& x) {
            if (!last.empty())
                for (std::size_t i = 0; i < x.size(); ++i) monotone &= x[i] >= last[i];
            last = x;
        };
        ValueVector hi = max_reach_values(m, t, o);
        CHECK(monotone);
        ValueVector lo = min_reach_values(m, t);
        for (StateIndex s : hi.domain()) {
            CHECK(lo.at(s) <= hi.at(s) + 1e-9);
            CHECK(hi.at(s) >= 0.0);
            CHECK(hi.at(s) <= 1.0);
        }
        StateSet one = prob1_max(m, t.states), zero = prob0_max(m, t.states);
        for (StateIndex s : hi.domain()) {
            if (one.contains(s)) CHECK(hi.at(s) >= 1.0 - 10 * o.epsilon);
            if (zero.contains(s)) CHECK(hi.at(s) == 0.0);
        }
    }
}

TEST_CASE("bounded until and next") {
    Mdp m = toy(true);
    StateSet all = StateSet::full(3), goal = target_of(m, "\"goal\"").states;
    CHECK(bounded_until_values(m, all, goal, 0, Direction::Max).at(0) == 0.0);
    CHECK(bounded_until_values(m, all, goal, 1, Direction::Max).at(0) == doctest::Approx(0.9));
    CHECK(bounded_until_values(m, all, goal, 5, Direction::Min).at(0) == doctest::Approx(0.5));
    CHECK(next_values(m, goal, Direction::Max).at(0) == doctest::Approx(0.9));
    CHECK(next_values(m, goal, Direction::Min).at(0) == doctest::Approx(0.5));
    CHECK(next_values(m, goal, Direction::Min).at(1) == 1.0);
}

TEST_CASE("end components") {
    MdpBuilder b(5);
    b.add_choice(0, "go", {{1, 0.5}, {3, 0.5}});
    b.add_choice(1, "go", {{2, 1.0}});
    b.add_choice(2, "go", {{1, 1.0}});
    b.add_choice(3, "go", {{4, 1.0}});
    b.add_choice(4, "go", {{3, 1.0}});
    b.add_choice(4, "out", {{0, 1.0}});
    Mdp m = b.build();
    // Half of 0's mass enters {1, 2} for good, so 0 lies in no end component
    // and "out" is pruned from 4.
    auto mecs = mec_decomposition(m, StateSet::full(5));
    REQUIRE(mecs.size() == 2);
    CHECK(mecs[0].states == std::vector<StateIndex>{1, 2});
    CHECK(mecs[1].states == std::vector<StateIndex>{3, 4});
    CHECK(mecs[1].actions_of(4) == std::vector<ActionIndex>{0});
    StateSet without_four = StateSet::full(5);
    without_four.erase(4);
    mecs = mec_decomposition(m, without_four);
    REQUIRE(mecs.size() == 1);
    CHECK(mecs[0].states == std::vector<StateIndex>{1, 2});

    MdpBuilder single(1);
    single.add_choice(0, "loop", {{0, 1.0}});
    auto one = mec_decomposition(single.build(), StateSet::full(1));
    REQUIRE(one.size() == 1);
    CHECK(one[0].states == std::vector<StateIndex>{0});
}

TEST_CASE("property: MEC decomposition matches the naive fixed point") {
    Rng rng(20);
    testing::RandomMdpParams p;
    p.min_states = p.max_states = 20;
    p.max_actions = 3;
    p.max_successors = 2;
    for (int round = 0; round < 60; ++round) {
        Mdp m = testing::random_mdp(rng, p);
        StateSet restrict_to = round % 2 ? StateSet::full(m.num_states()) : testing::labelled(m, "a");
        auto fast = mec_decomposition(m, restrict_to);
        auto slow = oracle::naive_mecs(m, restrict_to);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(fast[i].states == slow[i].states);
            CHECK(fast[i].actions == slow[i].actions);
        }
    }
}

TEST_CASE("persistence values") {
    Mdp m = toy(true);
    TargetSet goal = target_of(m, "\"goal\"");
    CHECK(persistence_values(m, goal).at(0) == doctest::Approx(max_reach_values(m, goal).at(0)));

    // A B-state whose only exit leaves B contributes nothing.
    MdpBuilder b(4);
    b.add_proposition("B");
    b.add_label(1, "B").add_label(2, "B");
    b.add_choice(0, "a", {{1, 0.5}, {2, 0.5}});
    b.add_choice(1, "a", {{3, 1.0}});
    b.add_choice(2, "a", {{2, 1.0}});
    b.add_choice(3, "a", {{3, 1.0}});
    Mdp t = b.build();
    CHECK(persistence_values(t, target_of(t, "\"B\"")).at(0) == doctest::Approx(0.5));
    CHECK(accepting_region(t, target_of(t, "\"B\"").states).members() == std::vector<StateIndex>{2});
}

TEST_CASE("property: persistence matches enumeration and its strategy realizes it") {
    Rng rng(2020);
    testing::RandomMdpParams p;
    p.min_states = 10;
    p.max_states = 20;
    p.max_branching_states = 8;
    for (int round = 0; round < 40; ++round) {
        Mdp m = testing::random_mdp(rng, p);
        TargetSet b{testing::labelled(m, "a") | testing::labelled(m, "b"), "a | b"};
        PathFormula fg = PathFormula::eventually_always(parse_state_formula("\"a\" | \"b\""));
        ObjectiveSolution sol = solve_objective(m, Direction::Max, fg, fine());
        double x0 = sol.values.at(0);
        CHECK(std::abs(x0 - as_double(oracle::enumerate_strategy_optimum(m, oracle::QueryKind::Persist, b.states,
                                                                           Direction::Max))) <= 1e-6);
        Dtmc induced = oracle::induced_chain(m, sol.strategy);
        CHECK(as_double(oracle::exact_dtmc_persistence(induced, b.states)) >= x0 - 10 * 1e-6);
    }
}

TEST_CASE("property: absorbing B makes persistence equal to reachability") {
    Rng rng(31);
    testing::RandomMdpParams p;
    p.max_states = 15;
    for (int round = 0; round < 40; ++round) {
        Mdp m = testing::random_mdp(rng, p);
        // Make the a-states absorbing by rebuilding them as self-loops.
        StateSet a = testing::labelled(m, "a");
        MdpBuilder b(m.num_states());
        for (const auto& name : m.action_names()) b.add_action(name);
        for (const auto& q : m.propositions()) b.add_proposition(q);
        for (StateIndex s = 0; s < m.num_states(); ++s) {
            for (PropIndex q : m.labels(s)) b.add_label(s, q);
            if (a.contains(s)) {
                b.add_choice(s, ActionIndex{0}, {{s, 1.0}});
                continue;
            }
            for (const Choice& c : m.choices(s)) {
                auto br = m.branches(c);
                b.add_choice(s, c.action, {br.begin(), br.end()});
            }
        }
        Mdp absorbing = b.build();
        TargetSet t{a, "a"};
        ValueVector fg = persistence_values(absorbing, t), f = max_reach_values(absorbing, t);
        for (StateIndex s : f.domain()) CHECK(std::abs(fg.at(s) - f.at(s)) <= 2e-6);
    }
}

TEST_CASE("strategy extraction tie-breaks") {
    Mdp m = toy(true);
    TargetSet goal = target_of(m, "\"goal\"");
    StrategyMap sigma = extract_strategy(m, max_reach_values(m, goal), goal, Direction::Max);
    CHECK(sigma.at(0) == *m.find_action("a"));

    MdpBuilder b(2);
    b.add_action("first");
    b.add_action("second");
    b.add_proposition("t");
    b.add_label(1, "t");
    b.add_choice(0, "second", {{1, 1.0}});
    b.add_choice(0, "first", {{1, 1.0}});
    b.add_choice(1, "first", {{1, 1.0}});
    Mdp tie = b.build();
    TargetSet t = target_of(tie, "\"t\"");
    CHECK(extract_strategy(tie, max_reach_values(tie, t), t, Direction::Max).at(0) == 0);
    CHECK(extract_strategy(tie, min_reach_values(tie, t), t, Direction::Min).at(0) == 0);
}

TEST_CASE("verify_context") {
    Mdp m = toy(false);
    Interval w01{0.75, false, 0.85, true};
    CHECK(verify_context(m, 0, constant_vector(0.8), w01));
    CHECK_FALSE(verify_context(m, 0, constant_vector(0.85), w01));
    CHECK_FALSE(verify_context(m, 0, constant_vector(0.7), Interval::below(0.7)));
    CHECK(verify_context(m, 0, constant_vector(0.0), Interval::below(0.7)));
    CHECK(verify_context(m, 0, constant_vector(0.7), Interval::at_most(0.7)));

    std::vector<std::string> warnings;
    verify_context(m, 0, constant_vector(0.8499999), w01, &warnings);
    CHECK(warnings.size() == 1);
    warnings.clear();
    verify_context(m, 0, constant_vector(0.0), Interval::below(0.7), &warnings);
    CHECK(warnings.empty());
    CHECK_THROWS_AS(verify_context(m, 1, constant_vector(0.5), w01), ValidationError);
}

TEST_CASE("DTMC persistence") {
    Dtmc one{{{{0, 1.0}}}, 0};
    StateSet all = StateSet::full(1);
    CHECK(dtmc_persistence_prob(one, all) == 1.0);
    CHECK(dtmc_persistence_prob(one, StateSet(1)) == 0.0);
    // A bottom SCC that is only partly accepting does not count.
    Dtmc cycle{{{{1, 1.0}}, {{0, 1.0}}}, 0};
    StateSet half(2);
    half.insert(0);
    CHECK(dtmc_persistence_prob(cycle, half) == 0.0);
    CHECK(bottom_sccs(cycle) == std::vector<std::vector<StateIndex>>{{0, 1}});

    Mdp branching = toy(true);
    CHECK_THROWS_AS(as_dtmc(branching), SynthesisError);
}

TEST_CASE("property: DTMC analysis matches exact rational solves") {
    Rng rng(30);
    for (int round = 0; round < 40; ++round) {
        Dtmc chain = testing::random_dtmc(rng, 30, 3);
        StateSet target(30);
        for (StateIndex s = 0; s < 30; ++s)
            if (std::bernoulli_distribution(0.3)(rng)) target.insert(s);
        auto fast = dtmc_reach_prob(chain, target);
        auto exact = oracle::exact_dtmc_reach(chain, target);
        // Both sides are defined on the states reachable from the initial one.
        std::vector<StateIndex> live{chain.initial};
        StateSet seen(30);
        seen.insert(chain.initial);
        for (std::size_t i = 0; i < live.size(); ++i)
            for (const Branch& br : chain.rows[live[i]])
                if (!seen.contains(br.to)) {
                    seen.insert(br.to);
                    live.push_back(br.to);
                }
        for (StateIndex s : live) CHECK(std::abs(fast[s] - as_double(exact[s])) <= 1e-9);
        CHECK(std::abs(dtmc_persistence_prob(chain, target) - as_double(oracle::exact_dtmc_persistence(chain, target))) <=
              1e-9);
        CHECK(bottom_sccs(chain) == oracle::naive_bsccs(chain));
    }
}
