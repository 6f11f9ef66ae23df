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

#include "v2gq/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "v2gq/error.hpp"
#include "v2gq/instance_io.hpp"
#include "v2gq/solvers.hpp"

namespace v2gq {

using json = nlohmann::json;

namespace {

const std::vector<std::string> kSolvers{"bruteforce", "sa", "greedy", "hybrid"};

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& source) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(source + ": field '" + key + "': " + e.what());
    }
}

GeneratedSet parse_generated(const json& j, const BenchmarkConfig& cfg, const std::string& source) {
    GeneratedSet g;
    const std::string kind = get_or<std::string>(j, "kind", "v2g", source);
    if (kind != "v2g" && kind != "csp") throw ParseError(source + ": generate.kind must be v2g or csp");
    g.config.kind = kind == "csp" ? InstanceKind::csp : InstanceKind::v2g;
    g.config.vehicles = get_or<int>(j, "vehicles", 1, source);
    g.config.horizon = get_or<int>(j, "horizon", 2, source);
    g.config.nodes = get_or<int>(j, "nodes", 2, source);
    g.config.step_hours = get_or<double>(j, "step_hours", 1.0, source);
    const std::string mode = get_or<std::string>(j, "mode", "cost", source);
    if (mode == "cost") {
        g.config.mode = ObjectiveMode::cost;
    } else if (mode == "contingency") {
        g.config.mode = ObjectiveMode::contingency;
    } else if (mode == "weighted") {
        g.config.mode = ObjectiveMode::weighted;
    } else {
        throw ParseError(source + ": unknown generate.mode '" + mode + "'");
    }
    g.config.w1 = get_or<double>(j, "w1", 0.5, source);
    g.config.w2 = get_or<double>(j, "w2", 0.5, source);
    g.config.critical_fraction = get_or<double>(j, "critical_fraction", 0.5, source);
    g.config.resilience = get_or<bool>(j, "resilience", false, source);
    g.config.travel_factor = get_or<double>(j, "travel_factor", 2.0, source);
    if (get_or<bool>(j, "aligned", false, source)) g.config.aligned = cfg.levels;
    g.count = get_or<int>(j, "count", 1, source);
    g.seed = get_or<std::uint64_t>(j, "seed", 0, source);
    if (g.count < 1) throw InputError("generate.count must be at least 1");
    return g;
}

struct Case {
    std::string id;
    Instance instance;
};

std::vector<Case> collect_cases(const BenchmarkConfig& cfg) {
    std::vector<Case> cases;
    for (const auto& p : cfg.instances) cases.push_back({p.stem().string(), load_instance(p)});
    for (std::size_t s = 0; s < cfg.generate.size(); ++s) {
        const GeneratedSet& g = cfg.generate[s];
        for (int k = 0; k < g.count; ++k) {
            const std::uint64_t seed = g.seed + static_cast<std::uint64_t>(k);
            cases.push_back({"gen" + std::to_string(s) + "-" + std::to_string(seed),
                             generate_instance(g.config, seed)});
        }
    }
    return cases;
}

double gap_of(double objective, double oracle) {
    const double g = (objective - oracle) / std::max(1.0, std::abs(oracle));
    return g < 0.0 && g > -1e-9 ? 0.0 : g;
}

}  // namespace

void validate(const BenchmarkConfig& cfg) {
    if (cfg.solvers.empty()) throw InputError("benchmark config: solver list is empty");
    if (cfg.seeds.empty()) throw InputError("benchmark config: seed list is empty");
    if (cfg.penalty_modes.empty()) throw InputError("benchmark config: no penalty mode");
    if (cfg.instances.empty() && cfg.generate.empty()) {
        throw InputError("benchmark config: no instances or generator sets");
    }
    for (const SolverSpec& s : cfg.solvers) {
        if (std::find(kSolvers.begin(), kSolvers.end(), s.name) == kSolvers.end()) {
            throw InputError("benchmark config: unknown solver '" + s.name + "'");
        }
    }
    if (!(cfg.lambda_scale > 0.0)) throw InputError("benchmark config: lambda_scale must be positive");
}

BenchmarkConfig parse_benchmark_config(std::string_view text, const std::string& source,
                                       const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t at = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(at), '\n');
        throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(source + ": top level must be an object");
    BenchmarkConfig cfg;
    if (j.contains("levels")) {
        const json& l = j.at("levels");
        cfg.levels.K = get_or<int>(l, "K", 2, source);
        cfg.levels.K_soc = get_or<int>(l, "K_soc", 2, source);
        cfg.levels.J = get_or<int>(l, "J", 2, source);
    }
    cfg.lambda_scale = get_or<double>(j, "lambda_scale", 2.0, source);
    cfg.brute_force_max_bits = get_or<std::size_t>(j, "brute_force_max_bits", 22, source);
    cfg.oracle_max_bits = get_or<std::size_t>(j, "oracle_max_bits", 26, source);
    for (const auto& p : get_or<std::vector<std::string>>(j, "instances", {}, source)) {
        const std::filesystem::path path(p);
        cfg.instances.push_back(path.is_absolute() ? path : base_dir / path);
    }
    if (j.contains("generate")) {
        if (!j.at("generate").is_array()) throw ParseError(source + ": field 'generate' must be an array");
        for (const json& g : j.at("generate")) cfg.generate.push_back(parse_generated(g, cfg, source));
    }
    if (!j.contains("solvers")) throw ParseError(source + ": missing field 'solvers'");
    for (const json& s : j.at("solvers")) {
        SolverSpec spec;
        if (s.is_string()) {
            spec.name = s.get<std::string>();
        } else {
            spec.name = get_or<std::string>(s, "name", "", source);
            if (s.contains("sweeps")) spec.sweeps = s.at("sweeps").get<int>();
            if (s.contains("restarts")) spec.restarts = s.at("restarts").get<int>();
        }
        cfg.solvers.push_back(std::move(spec));
    }
    if (!j.contains("seeds")) throw ParseError(source + ": missing field 'seeds'");
    cfg.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {}, source);
    if (j.contains("penalty_mode")) {
        std::vector<std::string> modes;
        if (j.at("penalty_mode").is_string()) {
            modes.push_back(j.at("penalty_mode").get<std::string>());
        } else {
            modes = get_or<std::vector<std::string>>(j, "penalty_mode", {}, source);
        }
        cfg.penalty_modes.clear();
        for (const auto& m : modes) {
            auto mode = inequality_mode_from_string(m);
            if (!mode) throw ParseError(source + ": unknown penalty_mode '" + m + "'");
            cfg.penalty_modes.push_back(*mode);
        }
    }
    const std::filesystem::path out(get_or<std::string>(j, "output_dir", "bench_out", source));
    cfg.output_dir = out.is_absolute() ? out : base_dir / out;
    validate(cfg);
    return cfg;
}

BenchmarkConfig load_benchmark_config(const std::filesystem::path& path) {
    return parse_benchmark_config(read_text_file(path), path.string(), path.parent_path());
}

std::vector<ResultRow> run_benchmark(const BenchmarkConfig& cfg) {
    validate(cfg);
    std::vector<ResultRow> rows;
    for (const Case& c : collect_cases(cfg)) {
        StructuredModel model;
        EncodingTable enc;
        std::string build_error;
        std::optional<double> oracle;
        try {
            model = build_instance_model(c.instance);
            enc = plan_encodings(model, cfg.levels);
            if (encoded_bit_count(model, enc) <= cfg.oracle_max_bits) {
                const ReferenceResult ref = exact_discrete_reference(model, enc, cfg.oracle_max_bits);
                if (ref.feasible) oracle = ref.objective;
            }
        } catch (const std::exception& e) {
            build_error = e.what();
        }
        for (InequalityMode mode : cfg.penalty_modes) {
            PenaltyConfig pen;
            pen.mode = mode;
            pen.lambda_scale = cfg.lambda_scale;
            std::optional<TranspiledModel> t;
            std::string transpile_error = build_error;
            if (transpile_error.empty()) {
                try {
                    t = transpile(model, pen, enc);
                } catch (const std::exception& e) {
                    transpile_error = e.what();
                }
            }
            for (const SolverSpec& solver : cfg.solvers) {
                for (std::uint64_t seed : cfg.seeds) {
                    ResultRow row;
                    row.instance = c.id;
                    row.solver = solver.name;
                    row.seed = seed;
                    row.penalty_mode = mode;
                    if (!transpile_error.empty()) {
                        row.error = transpile_error;
                        rows.push_back(std::move(row));
                        continue;
                    }
                    row.bits = t->qubo.num_bits;
                    const auto start = std::chrono::steady_clock::now();
                    try {
                        Assignment assignment;
                        if (solver.name == "hybrid") {
                            HybridConfig hc;
                            hc.penalty = pen;
                            hc.seed = seed;
                            const HybridResult h = hybrid_solve(model, enc, hc);
                            assignment = h.assignment;
                            if (h.feasible) {
                                row.qubo_energy = qubo_energy(t->qubo, encode_assignment(model, *t, assignment));
                            }
                        } else {
                            SolveResult r;
                            if (solver.name == "bruteforce") {
                                r = brute_force(t->qubo, cfg.brute_force_max_bits);
                            } else if (solver.name == "sa") {
                                AnnealSchedule s = default_schedule(t->qubo, seed);
                                if (solver.sweeps) s.sweeps = *solver.sweeps;
                                if (solver.restarts) s.restarts = *solver.restarts;
                                r = simulated_anneal(t->qubo, s);
                            } else {
                                std::mt19937_64 rng(seed);
                                Bits start_bits(t->qubo.num_bits);
                                for (auto& b : start_bits) b = static_cast<std::uint8_t>(rng() & 1u);
                                r = greedy_descent(t->qubo, start_bits);
                            }
                            row.qubo_energy = r.best_energy;
                            assignment = decode(r.best_bits, t->map).assignment;
                        }
                        const ObjectiveReport rep = evaluate(model, assignment);
                        row.objective = rep.objective;
                        row.feasible = rep.feasible;
                        if (row.feasible && oracle) row.gap = gap_of(rep.objective, *oracle);
                    } catch (const std::exception& e) {
                        row.error = e.what();
                    }
                    row.wall_time_ms = std::chrono::duration<double, std::milli>(
                                               std::chrono::steady_clock::now() - start)
                                               .count();
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.instance, a.solver, a.seed, a.penalty_mode) <
               std::tie(b.instance, b.solver, b.seed, b.penalty_mode);
    });
    return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << "instance,solver,seed,penalty_mode,bits,objective,qubo_energy,feasible,gap,error,wall_time_ms\n";
    for (const ResultRow& r : rows) {
        os << csv_field(r.instance) << ',' << csv_field(r.solver) << ',' << r.seed << ','
           << to_string(r.penalty_mode) << ',' << r.bits << ',' << opt(r.objective) << ','
           << opt(r.qubo_energy) << ',' << (r.feasible ? "true" : "false") << ',' << opt(r.gap) << ','
           << csv_field(r.error) << ',' << fmt(std::round(r.wall_time_ms * 1000.0) / 1000.0) << '\n';
    }
    return os.str();
}

std::string summary_csv(const std::vector<ResultRow>& rows) {
    struct Acc {
        std::size_t rows = 0;
        std::size_t feasible = 0;
        std::size_t gaps = 0;
        double gap_sum = 0.0;
    };
    std::map<std::pair<std::string, std::string>, Acc> acc;
    for (const ResultRow& r : rows) {
        Acc& a = acc[{r.solver, std::string(to_string(r.penalty_mode))}];
        ++a.rows;
        a.feasible += r.feasible ? 1 : 0;
        if (r.gap) {
            ++a.gaps;
            a.gap_sum += *r.gap;
        }
    }
    std::ostringstream os;
    os << "solver,penalty_mode,rows,feasible_rate,mean_gap\n";
    for (const auto& [key, a] : acc) {
        os << csv_field(key.first) << ',' << key.second << ',' << a.rows << ','
           << fmt(static_cast<double>(a.feasible) / static_cast<double>(a.rows)) << ','
           << (a.gaps ? fmt(a.gap_sum / static_cast<double>(a.gaps)) : std::string()) << '\n';
    }
    return os.str();
}

void emit_results(const std::vector<ResultRow>& rows, const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError("cannot create '" + directory.string() + "': " + ec.message());
    write_text_file(directory / "results.csv", results_csv(rows));
    write_text_file(directory / "summary.csv", summary_csv(rows));
}

}  // namespace v2gq
