#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "captl/casestudies.hpp"
#include "captl/errors.hpp"
#include "captl/model_io.hpp"
#include "captl/oracle.hpp"

namespace captl::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct IoError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
}

// Writes to `path`, or to `out` when no path was given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) out << text;
    else write_file(path, text);
}

struct Flags {
    std::string model;
    std::string req;
    std::string algorithm = "persistence";
    double epsilon = 1e-6;
    std::size_t max_iter = 1000000;
    std::string out;
    std::string dot;
    std::string query;
    std::size_t runs = 10000;
    std::uint64_t seed = 1;
    std::size_t horizon = 0;
    std::string kase;
    std::string size;
    std::string stats;
};

SolveOptions solve_options(const Flags& f) {
    if (!(f.epsilon > 0.0 && f.epsilon < 1.0)) throw ValidationError("--epsilon must lie in (0, 1)");
    if (f.max_iter == 0) throw ValidationError("--max-iter must be positive");
    SolveOptions opts;
    opts.epsilon = f.epsilon;
    opts.max_iterations = f.max_iter;
    return opts;
}

Algorithm algorithm_of(const Flags& f) {
    if (f.algorithm == "pctl") return Algorithm::Pctl;
    if (f.algorithm == "persistence") return Algorithm::Persistence;
    throw ValidationError("unknown algorithm '" + f.algorithm + "', expected pctl or persistence");
}

CaseStudy generate(const Flags& f) {
    auto [w, h] = parse_size(f.size.empty() ? (f.kase == "meda" ? "8x5" : "3x3") : f.size);
    if (f.kase == "robot") {
        RobotParams p;
        p.width = w;
        p.height = h;
        return gen_robot(p);
    }
    if (f.kase == "meda") {
        MedaParams p;
        p.width = w;
        p.height = h;
        return gen_meda(p);
    }
    throw ValidationError("unknown case '" + f.kase + "', expected robot or meda");
}

struct Inputs {
    Mdp mdp;
    CaptlRequirement req;
    std::string label;
    double construction;
};

// Model and requirement from files, or from a generator when --case is given.
Inputs load_inputs(const Flags& f) {
    auto started = Clock::now();
    if (!f.kase.empty()) {
        CaseStudy cs = generate(f);
        double t = seconds_since(started);
        return {std::move(cs.model), std::move(cs.requirement), f.kase + " " + (f.size.empty() ? "default" : f.size), t};
    }
    if (f.model.empty() || f.req.empty()) throw ValidationError("--model and --req are required");
    Mdp mdp = parse_model(read_file(f.model));
    double t = seconds_since(started);
    return {std::move(mdp), parse_requirement(read_file(f.req)), f.model, t};
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

struct Synthesized {
    Protocol protocol;
    std::optional<PersistenceResult> persistence;
    std::optional<PctlResult> pctl;
};

Synthesized synthesize(const Inputs& in, Algorithm algo, const SolveOptions& opts, std::ostream& err) {
    print_warnings(model_warnings(in.mdp), err);
    Synthesized s;
    if (algo == Algorithm::Persistence) {
        s.persistence = synth_persistence(in.mdp, in.req, opts);
        print_warnings(s.persistence->partition.warnings, err);
        s.protocol = s.persistence->protocol;
    } else {
        s.pctl = synth_pctl(in.mdp, in.req, opts);
        print_warnings(s.pctl->warnings, err);
        s.protocol = s.pctl->protocol;
    }
    return s;
}

int cmd_synth(const Flags& f, std::ostream& out, std::ostream& err) {
    Inputs in = load_inputs(f);
    SolveOptions opts = solve_options(f);
    Synthesized s = synthesize(in, algorithm_of(f), opts, err);
    if (!f.out.empty()) write_file(f.out, serialize_protocol(in.mdp, in.req, s.protocol));
    if (!f.dot.empty())
        write_file(f.dot, s.persistence ? product_to_dot(in.mdp, in.req, s.persistence->product)
                                        : induced_to_dot(in.mdp, in.req, compose_protocol(in.mdp, in.req, s.protocol)));
    if (!f.stats.empty()) write_file(f.stats, stats_csv(in.req, {measure(in.mdp, in.req, opts, in.label, in.construction)}));
    out << "c=" << fixed6(s.protocol.satisfaction_prob) << '\n';
    return 0;
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
    if (f.model.empty() || f.query.empty()) throw ValidationError("--model and --query are required");
    Mdp mdp = parse_model(read_file(f.model));
    print_warnings(model_warnings(mdp), err);
    Query q = parse_query(f.query);
    ValueVector x = query_values(mdp, q.direction, q.path, solve_options(f));
    double v = x.at(mdp.initial());
    out << fixed6(v) << '\n';
    if (q.bound) out << (q.bound->contains(v) ? "SAT" : "UNSAT") << '\n';
    return 0;
}

int cmd_partition(const Flags& f, std::ostream& out, std::ostream& err) {
    Inputs in = load_inputs(f);
    print_warnings(model_warnings(in.mdp), err);
    Partition p = partition_states(in.mdp, in.req, solve_options(f));
    print_warnings(p.warnings, err);
    std::string csv = "state,objective,block,x_value\n";
    for (std::size_t q : p.order) {
        const ObjectivePartition& part = *p.objectives[q];
        for (StateIndex s : p.reachable) {
            std::size_t block = q;
            for (std::size_t t = 0; t < part.blocks.size(); ++t)
                if (part.blocks[t].contains(s)) block = t;
            csv += std::to_string(s) + ',' + in.req.objectives()[q].id + ',' + in.req.objectives()[block].id + ',' +
                   fixed6(part.solution.values.at(s)) + '\n';
        }
    }
    emit(f.out, csv, out);
    return 0;
}

int cmd_export_dot(const Flags& f, std::ostream& out, std::ostream& err) {
    Inputs in = load_inputs(f);
    Synthesized s = synthesize(in, algorithm_of(f), solve_options(f), err);
    std::string dot = s.persistence ? product_to_dot(in.mdp, in.req, s.persistence->product)
                                    : induced_to_dot(in.mdp, in.req, compose_protocol(in.mdp, in.req, s.protocol));
    emit(f.dot.empty() ? f.out : f.dot, dot, out);
    return 0;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
    Inputs in = load_inputs(f);
    if (f.runs == 0) throw ValidationError("--runs must be positive");
    Synthesized s = synthesize(in, algorithm_of(f), solve_options(f), err);
    oracle::SimulationStats stats;
    if (s.persistence) {
        const ProductDtmc& product = s.persistence->product;
        stats = oracle::simulate(product.to_chain(), product_accepting(in.mdp, in.req, product),
                                 oracle::QueryKind::Persist, f.runs, f.horizon, f.seed);
    } else {
        InducedChain induced = compose_protocol(in.mdp, in.req, s.protocol);
        StateSet target(induced.states.size());
        for (const auto& pair : s.pctl->accepted)
            if (auto it = induced.index.find(pair); it != induced.index.end()) target.insert(it->second);
        stats = oracle::simulate(induced.chain, target, oracle::QueryKind::Reach, f.runs, f.horizon, f.seed);
    }
    double c = s.protocol.satisfaction_prob;
    out << "c=" << fixed6(c) << '\n'
        << "runs=" << stats.runs << '\n'
        << "successes=" << stats.successes << '\n'
        << "estimate=" << fixed6(stats.mean) << '\n'
        << "std_error=" << fixed6(stats.std_error) << '\n'
        << "within_3sigma=" << (std::abs(stats.mean - c) <= stats.half_width + 1e-12 ? "yes" : "no") << '\n';
    return 0;
}

int cmd_stats(const Flags& f, std::ostream& out, std::ostream& err) {
    Inputs in = load_inputs(f);
    print_warnings(model_warnings(in.mdp), err);
    std::string csv = stats_csv(in.req, {measure(in.mdp, in.req, solve_options(f), in.label, in.construction)});
    emit(f.stats.empty() ? f.out : f.stats, csv, out);
    return 0;
}

int cmd_gen(const Flags& f, std::ostream& out, std::ostream&) {
    if (f.kase.empty()) throw ValidationError("--case is required");
    if (f.model.empty() || f.req.empty()) throw ValidationError("--model and --req are required");
    CaseStudy cs = generate(f);
    write_file(f.model, serialize_model(cs.model));
    write_file(f.req, print_requirement(cs.requirement));
    Cardinality card = cardinality(cs.model);
    out << "states=" << card.num_states << " transitions=" << card.num_nonzero_transitions
        << " choices=" << card.num_choices << '\n';
    return 0;
}

} // namespace

RunStats measure(const Mdp& mdp, const CaptlRequirement& req, const SolveOptions& opts, std::string label,
                 double construction) {
    RunStats row;
    row.label = std::move(label);
    row.model = cardinality(mdp);
    row.construction = construction;
    auto started = Clock::now();
    Partition partition = partition_states(mdp, req, opts);
    row.objectives.assign(req.objectives().size(), std::nullopt);
    std::vector<StrategyMap> strategies(req.objectives().size());
    for (std::size_t q : partition.order) {
        row.objectives[q] = partition.objectives[q]->seconds;
        strategies[q] = partition.objectives[q]->solution.strategy;
    }
    auto product_started = Clock::now();
    ProductDtmc product = build_product(mdp, req, strategies, partition);
    row.product = seconds_since(product_started);
    auto verify_started = Clock::now();
    row.c = dtmc_persistence_prob(product, product_accepting(mdp, req, product));
    row.verification = seconds_since(verify_started);
    row.total = construction + seconds_since(started);
    row.product_states = product.num_states();
    row.product_transitions = product.num_transitions();
    row.product_choices = product.num_choices();
    return row;
}

std::string stats_csv(const CaptlRequirement& req, const std::vector<RunStats>& rows) {
    std::string csv = "model,st,tr,ch,prod_st,prod_tr,prod_ch,t_model";
    for (const auto& q : req.objectives()) csv += ",t_" + q.id;
    csv += ",t_product,t_verify,t_total,c\n";
    for (const RunStats& r : rows) {
        csv += r.label + ',' + std::to_string(r.model.num_states) + ',' + std::to_string(r.model.num_nonzero_transitions) +
               ',' + std::to_string(r.model.num_choices) + ',' + std::to_string(r.product_states) + ',' +
               std::to_string(r.product_transitions) + ',' + std::to_string(r.product_choices) + ',' +
               fixed6(r.construction);
        for (const auto& t : r.objectives) csv += ',' + (t ? fixed6(*t) : std::string("-"));
        csv += ',' + fixed6(r.product) + ',' + fixed6(r.verification) + ',' + fixed6(r.total) + ',' + fixed6(r.c) + '\n';
    }
    return csv;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Context-aware protocol synthesis for MDPs", "captl"};
    app.require_subcommand(1);
    Flags f;

    auto add_inputs = [&](CLI::App* sub) {
        sub->add_option("--model", f.model, "Model file (JSON)");
        sub->add_option("--req", f.req, "Requirement file");
        sub->add_option("--case", f.kase, "Generate the input instead: robot or meda");
        sub->add_option("--size", f.size, "Generated grid size WxH");
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--epsilon", f.epsilon, "Convergence threshold")->capture_default_str();
        sub->add_option("--max-iter", f.max_iter, "Iteration cap")->capture_default_str();
    };
    auto add_algorithm = [&](CLI::App* sub) {
        sub->add_option("--algorithm", f.algorithm, "pctl or persistence")->capture_default_str();
    };

    using Handler = std::function<int(const Flags&, std::ostream&, std::ostream&)>;
    std::vector<std::pair<CLI::App*, Handler>> commands;

    auto* synth = app.add_subcommand("synth", "Synthesize a protocol and print c");
    add_inputs(synth);
    add_solver(synth);
    add_algorithm(synth);
    synth->add_option("--out", f.out, "Protocol JSON output");
    synth->add_option("--dot", f.dot, "DOT output (product or induced chain)");
    synth->add_option("--stats", f.stats, "Stats CSV output");
    commands.emplace_back(synth, cmd_synth);

    auto* verify = app.add_subcommand("verify", "Evaluate one query at the initial state");
    verify->add_option("--model", f.model, "Model file (JSON)");
    verify->add_option("--query", f.query, "Query, e.g. Pmax [ F \"goal\" ]");
    add_solver(verify);
    commands.emplace_back(verify, cmd_verify);

    auto* partition = app.add_subcommand("partition", "Per-objective block membership as CSV");
    add_inputs(partition);
    add_solver(partition);
    partition->add_option("--out", f.out, "CSV output (default standard output)");
    commands.emplace_back(partition, cmd_partition);

    auto* dot = app.add_subcommand("export-dot", "Write the product or induced chain as DOT");
    add_inputs(dot);
    add_solver(dot);
    add_algorithm(dot);
    dot->add_option("--dot,--out", f.dot, "DOT output (default standard output)");
    commands.emplace_back(dot, cmd_export_dot);

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo check of the synthesized protocol");
    add_inputs(simulate);
    add_solver(simulate);
    add_algorithm(simulate);
    simulate->add_option("--runs", f.runs, "Number of runs")->capture_default_str();
    simulate->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    simulate->add_option("--horizon", f.horizon, "Steps per run (0: 10 x states)")->capture_default_str();
    commands.emplace_back(simulate, cmd_simulate);

    auto* stats = app.add_subcommand("stats", "Sizes and phase times as CSV");
    add_inputs(stats);
    add_solver(stats);
    stats->add_option("--stats,--out", f.stats, "CSV output (default standard output)");
    commands.emplace_back(stats, cmd_stats);

    auto* gen = app.add_subcommand("gen", "Generate a case-study model and requirement");
    gen->add_option("--case", f.kase, "robot or meda")->required();
    gen->add_option("--size", f.size, "Grid size WxH");
    gen->add_option("--model", f.model, "Model output")->required();
    gen->add_option("--req", f.req, "Requirement output")->required();
    commands.emplace_back(gen, cmd_gen);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        for (auto& [sub, handler] : commands)
            if (sub->parsed()) return handler(f, out, err);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

} // namespace captl::cli
