#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "captl/casestudies.hpp"
#include "captl/errors.hpp"

using namespace captl;

namespace {

bool labelled(const Mdp& m, StateIndex s, const char* prop) { return m.has_label(s, *m.find_proposition(prop)); }

bool enabled(const Mdp& m, StateIndex s, const char* action) {
    auto a = m.find_action(action);
    return a && m.find_choice(s, *a) != nullptr;
}

void check_stochastic(const Mdp& m) {
    for (StateIndex s = 0; s < m.num_states(); ++s)
        for (const Choice& c : m.choices(s)) {
            double sum = 0.0;
            for (const Branch& b : m.branches(c)) {
                CHECK(b.prob > 0.0);
                sum += b.prob;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
}

// Battery digit of a robot display name "g%d_h%d_x%d_y%d".
int battery(const Mdp& m, StateIndex s) {
    int g = 0, h = 0, x = 0, y = 0;
    REQUIRE(std::sscanf(m.display_name(s).c_str(), "g%d_h%d_x%d_y%d", &g, &h, &x, &y) == 4);
    return h;
}

} // namespace

TEST_CASE("robot model shape") {
    CaseStudy cs = gen_robot({});
    const Mdp& m = cs.model;
    CHECK(cardinality(m).num_states == 141);
    CHECK(m.display_name(m.initial()) == "g0_h10_x1_y1");
    CHECK(m.deadlocks().empty());
    CHECK(validate_persistence(cs.requirement).empty());
    check_stochastic(m);
    CHECK(m == gen_robot({}).model);

    for (StateIndex s = 0; s < m.num_states(); ++s) {
        // The battery never grows, and "h>3" tracks it.
        CHECK(labelled(m, s, "h>3") == (battery(m, s) > 3));
        for (const Choice& c : m.choices(s))
            for (const Branch& b : m.branches(c)) CHECK(battery(m, b.to) <= battery(m, s));
        CHECK(enabled(m, s, "done") == (labelled(m, s, "goal") && labelled(m, s, "on")));
        if (labelled(m, s, "error")) {
            CHECK(m.choices(s).size() == 1);
            CHECK(enabled(m, s, "error"));
        }
    }
}

TEST_CASE("robot parameters") {
    RobotParams p;
    p.width = 4;
    p.height = 2;
    p.obstacle_prob = 0.0;
    CaseStudy cs = gen_robot(p);
    check_stochastic(cs.model);
    for (StateIndex s = 0; s < cs.model.num_states(); ++s)
        for (const Choice& c : cs.model.choices(s)) CHECK(cs.model.branches(c).size() == 1);

    RobotParams bad;
    bad.width = 0;
    CHECK_THROWS_AS(gen_robot(bad), ValidationError);
    bad = {};
    bad.obstacle_prob = 1.5;
    CHECK_THROWS_AS(gen_robot(bad), ValidationError);
    bad = {};
    bad.start = {4, 1};
    CHECK_THROWS_AS(gen_robot(bad), ValidationError);
    bad = {};
    bad.goals = {{0, 0}};
    CHECK_THROWS_AS(gen_robot(bad), ValidationError);
}

TEST_CASE("MEDA model shape") {
    CaseStudy cs = gen_meda({});
    const Mdp& m = cs.model;
    CHECK(m.deadlocks().empty());
    CHECK(validate_persistence(cs.requirement).empty());
    check_stochastic(m);
    CHECK(m.num_states() == gen_meda({}).model.num_states());

    std::size_t mixing = 0;
    for (StateIndex s = 0; s < m.num_states(); ++s) {
        if (enabled(m, s, "mix")) {
            ++mixing;
            CHECK(labelled(m, s, "inBlock"));
        }
        if (labelled(m, s, "mixed") || labelled(m, s, "salvaged") || labelled(m, s, "aborted")) {
            CHECK(m.choices(s).size() == 1);
            CHECK(enabled(m, s, "done"));
        }
    }
    CHECK(mixing > 0);
}

TEST_CASE("MEDA context classification") {
    CaptlRequirement r = gen_meda({}).requirement;
    const Context* w01 = r.find_context("w01");
    REQUIRE(w01 != nullptr);
    CHECK(w01->interval.contains(0.8));
    CHECK_FALSE(w01->interval.contains(0.85));
    CHECK(w01->interval.contains(0.7));
    CHECK_FALSE(r.find_context("w02")->interval.contains(0.7));
    CHECK(r.find_context("w12")->interval.contains(0.69));
}

TEST_CASE("MEDA parameters") {
    MedaParams p;
    p.width = 3;
    p.height = 3;
    p.dispenser_b = {2, 2};
    p.max_errors = 0;
    CaseStudy small = gen_meda(p);
    check_stochastic(small.model);
    CHECK(small.model.num_states() < gen_meda({}).model.num_states());

    MedaParams bad;
    bad.dispenser_a = {9, 1};
    CHECK_THROWS_AS(gen_meda(bad), ValidationError);
    bad = {};
    bad.flush_error = -0.1;
    CHECK_THROWS_AS(gen_meda(bad), ValidationError);
    bad = {};
    bad.max_errors = -1;
    CHECK_THROWS_AS(gen_meda(bad), ValidationError);
}

TEST_CASE("parse_size") {
    CHECK(parse_size("3x3") == std::pair{3, 3});
    CHECK(parse_size("8x5") == std::pair{8, 5});
    CHECK(parse_size("12x7") == std::pair{12, 7});
    for (const char* bad : {"", "x3", "3x", "3", "3x3x3", "ax3", "0x3", "-1x2", "3 x 3"})
        CHECK_THROWS_AS(parse_size(bad), ValidationError);
}
