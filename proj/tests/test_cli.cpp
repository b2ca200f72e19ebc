#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "captl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = captl::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string data(const char* name) { return std::string(CAPTL_TEST_DATA) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("captl_cli_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const char* name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("synth on the toy model") {
    Run r = run({"synth", "--model", data("toy.json"), "--req", data("toy.captl")});
    CHECK(r.code == 0);
    CHECK(r.out == "c=0.900000\n");

    Run pctl = run({"synth", "--model", data("toy.json"), "--req", data("toy_general.captl"), "--algorithm", "pctl"});
    CHECK(pctl.code == 0);
    CHECK(pctl.out.rfind("c=", 0) == 0);

    // A general requirement is not a persistence requirement.
    Run rejected = run({"synth", "--model", data("toy.json"), "--req", data("toy_general.captl")});
    CHECK(rejected.code == 1);
    CHECK(rejected.err.find("error:") != std::string::npos);

    Run overlap = run({"synth", "--model", data("toy.json"), "--req", data("overlap.captl"), "--algorithm", "pctl"});
    CHECK(overlap.code == 0);
    CHECK(overlap.err.find("warning:") != std::string::npos);
}

TEST_CASE("verify") {
    Run r = run({"verify", "--model", data("toy.json"), "--query", "Pmax<0.95 [ F \"goal\" ]"});
    CHECK(r.code == 0);
    CHECK(r.out == "0.900000\nSAT\n");
    CHECK(run({"verify", "--model", data("toy.json"), "--query", "Pmin [ F \"goal\" ]"}).out == "0.500000\n");
    CHECK(run({"verify", "--model", data("toy.json"), "--query", "Pmin>0.6 [ F \"goal\" ]"}).out == "0.500000\nUNSAT\n");

    Run unknown = run({"verify", "--model", data("toy.json"), "--query", "Pmax [ F \"nowhere\" ]"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("nowhere") != std::string::npos);
    CHECK(run({"verify", "--model", data("missing.json"), "--query", "Pmax [ F \"goal\" ]"}).code == 1);
    CHECK(run({"verify", "--model", data("toy.json"), "--query", "Pmax [ F"}).code == 1);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"synth", "--model", data("toy.json")}).code == 1);
    CHECK(run({"synth", "--case", "submarine"}).code == 1);
    CHECK(run({"synth", "--model", data("toy.json"), "--req", data("toy.captl"), "--algorithm", "magic"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("partition covers every reachable state once per objective") {
    Run r = run({"partition", "--model", data("toy.json"), "--req", data("toy.captl")});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "state,objective,block,x_value");
    CHECK(rows[1] == "0,q0,q0,0.900000");
    CHECK(rows[2] == "1,q0,q0,1.000000");
    CHECK(rows[3] == "2,q0,q0,0.000000");

    Run robot = run({"partition", "--case", "robot", "--size", "3x3"});
    REQUIRE(robot.code == 0);
    std::map<std::string, std::size_t> per_objective;
    for (std::size_t i = 1; i < lines(robot.out).size(); ++i) ++per_objective[split(lines(robot.out)[i])[1]];
    CHECK(per_objective.size() == 4);
    for (const auto& [q, n] : per_objective) CHECK(n == 141);
}

TEST_CASE("stats rows describe a deterministic product") {
    TempDir tmp;
    Run r = run({"stats", "--case", "robot", "--size", "3x3", "--out", tmp / "s.csv"});
    REQUIRE(r.code == 0);
    auto rows = lines(slurp(tmp / "s.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "model,st,tr,ch,prod_st,prod_tr,prod_ch,t_model,t_q0,t_q1,t_q2,t_q3,t_product,t_verify,t_total,c");
    auto cells = split(rows[1]);
    REQUIRE(cells.size() == 16);
    CHECK(cells[0] == "robot 3x3");
    CHECK(cells[1] == "141");
    CHECK(cells[4] == cells[6]);
    CHECK(cells[15] == "1.000000");

    Run big = run({"stats", "--case", "robot", "--size", "6x6"});
    REQUIRE(big.code == 0);
    CHECK(split(lines(big.out)[1])[9] == "-");
}

TEST_CASE("gen then synth") {
    TempDir tmp;
    Run g = run({"gen", "--case", "robot", "--size", "3x3", "--model", tmp / "m.json", "--req", tmp / "r.captl"});
    REQUIRE(g.code == 0);
    CHECK(g.out == "states=141 transitions=396 choices=294\n");

    Run s = run({"synth", "--model", tmp / "m.json", "--req", tmp / "r.captl", "--out", tmp / "p1.json", "--dot",
                 tmp / "p.dot", "--stats", tmp / "p.csv"});
    REQUIRE(s.code == 0);
    double c = std::stod(s.out.substr(2));
    CHECK(c > 0.0);
    CHECK(c <= 1.0);
    CHECK(slurp(tmp / "p.dot").rfind("digraph", 0) == 0);
    CHECK(lines(slurp(tmp / "p.csv")).size() == 2);

    Run again = run({"synth", "--case", "robot", "--size", "3x3", "--out", tmp / "p2.json"});
    REQUIRE(again.code == 0);
    CHECK(again.out == s.out);
    CHECK(slurp(tmp / "p1.json") == slurp(tmp / "p2.json"));
    CHECK_FALSE(slurp(tmp / "p1.json").empty());

    CHECK(run({"gen", "--case", "robot", "--size", "3by3", "--model", tmp / "x.json", "--req", tmp / "x.captl"}).code == 1);
}

TEST_CASE("export-dot and simulate") {
    Run dot = run({"export-dot", "--model", data("toy.json"), "--req", data("toy.captl")});
    CHECK(dot.code == 0);
    CHECK(dot.out.rfind("digraph", 0) == 0);

    Run sim = run({"simulate", "--model", data("toy.json"), "--req", data("toy.captl"), "--runs", "2000", "--seed", "7"});
    REQUIRE(sim.code == 0);
    auto out = lines(sim.out);
    REQUIRE(out.size() == 6);
    CHECK(out[0] == "c=0.900000");
    CHECK(out[1] == "runs=2000");
    CHECK(out[5] == "within_3sigma=yes");
    CHECK(run({"simulate", "--model", data("toy.json"), "--req", data("toy.captl"), "--runs", "2000", "--seed", "7"}).out ==
          sim.out);
    CHECK(run({"simulate", "--model", data("toy.json"), "--req", data("toy.captl"), "--runs", "0"}).code == 1);

    Run pctl = run({"simulate", "--model", data("toy.json"), "--req", data("toy_general.captl"), "--algorithm", "pctl",
                    "--runs", "2000"});
    CHECK(pctl.code == 0);
    CHECK(pctl.out.find("within_3sigma=yes") != std::string::npos);
}
