// Copyright 2026 The v2gq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "v2gq/bench.hpp"
#include "v2gq/error.hpp"
#include "v2gq/generate.hpp"
#include "v2gq/instance_io.hpp"
#include "v2gq/qubo.hpp"
#include "v2gq/solvers.hpp"

namespace {

constexpr int kExitInfeasible = 6;

struct Common {
    std::uint64_t seed = 0;
    int levels = 2;
    int soc_levels = 2;
    int gen_levels = 2;
    std::string penalty_mode = "slack_bits";
    double lambda_scale = 2.0;
    std::string out;

    v2gq::DiscretizationLevels discretization() const { return {levels, soc_levels, gen_levels}; }

    v2gq::PenaltyConfig penalty() const {
        v2gq::PenaltyConfig p;
        auto mode = v2gq::inequality_mode_from_string(penalty_mode);
        if (!mode) throw v2gq::InputError("unknown penalty mode '" + penalty_mode + "'");
        p.mode = *mode;
        p.lambda_scale = lambda_scale;
        return p;
    }
};

void add_discretization(CLI::App* app, Common& c) {
    app->add_option("--levels", c.levels, "power levels K")->check(CLI::Range(2, 64));
    app->add_option("--soc-levels", c.soc_levels, "state-of-charge levels")->check(CLI::Range(2, 64));
    app->add_option("--gen-levels", c.gen_levels, "generation levels J")->check(CLI::Range(2, 64));
    app->add_option("--penalty-mode", c.penalty_mode, "slack_bits or paper_verbatim")
            ->check(CLI::IsMember({"slack_bits", "paper_verbatim"}));
    app->add_option("--lambda-scale", c.lambda_scale, "multiple of the dominance bound")
            ->check(CLI::PositiveNumber);
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
    } else {
        v2gq::write_text_file(out, text);
    }
}

void print_report(const v2gq::ObjectiveReport& rep) {
    std::cout << "objective " << rep.objective << "\n";
    std::cout << "feasible " << (rep.feasible ? "yes" : "no") << "\n";
    for (const auto& l : rep.violated) std::cout << "violated " << l << "\n";
    for (const auto& l : rep.exclusion_violations) std::cout << "exclusion " << l << "\n";
    for (const auto& l : rep.bound_violations) std::cout << "bound " << l << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"v2gq: V2G and mobile charging scheduling, QUBO transpilation and solvers"};
    app.require_subcommand(1);
    Common c;

    // generate
    auto* gen = app.add_subcommand("generate", "synthesize a random instance");
    std::string kind = "v2g";
    std::string mode = "cost";
    v2gq::GeneratorConfig gcfg;
    bool aligned = false;
    gen->add_option("--kind", kind)->check(CLI::IsMember({"v2g", "csp"}));
    gen->add_option("--vehicles", gcfg.vehicles);
    gen->add_option("--horizon", gcfg.horizon);
    gen->add_option("--nodes", gcfg.nodes);
    gen->add_option("--mode", mode)->check(CLI::IsMember({"cost", "contingency", "weighted"}));
    gen->add_option("--critical-fraction", gcfg.critical_fraction);
    gen->add_flag("--resilience", gcfg.resilience);
    gen->add_flag("--aligned", aligned, "ratings that make encoded SOC transitions exact");
    gen->add_option("--seed", c.seed);
    gen->add_option("--out", c.out, "output file (default stdout)");
    add_discretization(gen, c);

    // build
    auto* build = app.add_subcommand("build", "dump the structured model");
    std::string instance_path;
    build->add_option("instance", instance_path)->required();
    build->add_option("--out", c.out);

    // transpile
    auto* tr = app.add_subcommand("transpile", "export the QUBO");
    tr->add_option("instance", instance_path)->required();
    tr->add_option("--out", c.out, "QUBO file (default stdout)");
    add_discretization(tr, c);

    // solve
    auto* solve = app.add_subcommand("solve", "solve an instance");
    std::string method = "sa";
    solve->add_option("instance", instance_path)->required();
    solve->add_option("--method", method)->check(CLI::IsMember({"bruteforce", "sa", "greedy", "hybrid"}));
    solve->add_option("--seed", c.seed);
    solve->add_option("--out", c.out, "assignment file");
    add_discretization(solve, c);

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark sweep");
    std::string config_path;
    bench->add_option("config", config_path)->required();
    bench->add_option("--out", c.out, "output directory (overrides the config)");

    // verify
    auto* verify = app.add_subcommand("verify", "feasibility audit of an assignment");
    std::string assignment_path;
    verify->add_option("instance", instance_path)->required();
    verify->add_option("assignment", assignment_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) {
            gcfg.kind = kind == "csp" ? v2gq::InstanceKind::csp : v2gq::InstanceKind::v2g;
            gcfg.mode = mode == "contingency" ? v2gq::ObjectiveMode::contingency
                        : mode == "weighted"  ? v2gq::ObjectiveMode::weighted
                                              : v2gq::ObjectiveMode::cost;
            if (aligned) gcfg.aligned = c.discretization();
            emit(c.out, v2gq::serialize_instance(v2gq::generate_instance(gcfg, c.seed)));
        } else if (*build) {
            const auto inst = v2gq::load_instance(instance_path);
            emit(c.out, v2gq::dump(v2gq::build_instance_model(inst)));
        } else if (*tr) {
            const auto inst = v2gq::load_instance(instance_path);
            const auto model = v2gq::build_instance_model(inst);
            const auto enc = v2gq::plan_encodings(model, c.discretization());
            const auto t = v2gq::transpile(model, c.penalty(), enc);
            std::ostringstream os;
            v2gq::write_qubo(os, t.qubo);
            emit(c.out, os.str());
            std::cerr << "bits " << t.qubo.num_bits << " dominance_bound " << t.dominance_bound << "\n";
        } else if (*solve) {
            const auto inst = v2gq::load_instance(instance_path);
            const auto model = v2gq::build_instance_model(inst);
            const auto enc = v2gq::plan_encodings(model, c.discretization());
            v2gq::Assignment a;
            if (method == "hybrid") {
                v2gq::HybridConfig hc;
                hc.penalty = c.penalty();
                hc.seed = c.seed;
                a = v2gq::hybrid_solve(model, enc, hc).assignment;
            } else {
                const auto t = v2gq::transpile(model, c.penalty(), enc);
                v2gq::SolveResult r;
                if (method == "bruteforce") {
                    r = v2gq::brute_force(t.qubo);
                } else if (method == "sa") {
                    r = v2gq::simulated_anneal(t.qubo, v2gq::default_schedule(t.qubo, c.seed));
                } else {
                    std::mt19937_64 rng(c.seed);
                    v2gq::Bits start(t.qubo.num_bits);
                    for (auto& b : start) b = static_cast<std::uint8_t>(rng() & 1u);
                    r = v2gq::greedy_descent(t.qubo, start);
                }
                std::cout << "bits " << t.qubo.num_bits << "\nqubo_energy " << r.best_energy << "\n";
                a = v2gq::decode(r.best_bits, t.map).assignment;
            }
            print_report(v2gq::evaluate(model, a));
            if (!c.out.empty()) v2gq::write_text_file(c.out, v2gq::serialize_assignment(a));
        } else if (*bench) {
            auto cfg = v2gq::load_benchmark_config(config_path);
            if (!c.out.empty()) cfg.output_dir = c.out;
            const auto rows = v2gq::run_benchmark(cfg);
            v2gq::emit_results(rows, cfg.output_dir);
            std::cout << rows.size() << " rows written to " << cfg.output_dir.string() << "\n";
        } else if (*verify) {
            const auto inst = v2gq::load_instance(instance_path);
            const auto model = v2gq::build_instance_model(inst);
            const auto rep = v2gq::evaluate(model, v2gq::load_assignment(assignment_path));
            print_report(rep);
            return rep.feasible ? 0 : kExitInfeasible;
        }
    } catch (const v2gq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
