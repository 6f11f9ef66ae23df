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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "v2gq/generate.hpp"
#include "v2gq/qubo.hpp"

namespace v2gq {

struct SolverSpec {
    std::string name;  // bruteforce | sa | greedy | hybrid
    std::optional<int> sweeps;
    std::optional<int> restarts;
};

struct GeneratedSet {
    GeneratorConfig config;
    int count = 1;
    std::uint64_t seed = 0;  // instance k uses seed + k
};

struct BenchmarkConfig {
    std::vector<std::filesystem::path> instances;
    std::vector<GeneratedSet> generate;
    std::vector<SolverSpec> solvers;
    std::vector<std::uint64_t> seeds;
    std::vector<InequalityMode> penalty_modes{InequalityMode::slack_bits};
    DiscretizationLevels levels;
    double lambda_scale = 2.0;
    std::size_t brute_force_max_bits = 22;
    std::size_t oracle_max_bits = 26;
    std::filesystem::path output_dir = "bench_out";
};

/// Throws InputError for an empty solver or seed list, an unknown solver, or no instances.
void validate(const BenchmarkConfig& config);

/// JSON config. Relative instance paths and output_dir resolve against `base_dir`.
BenchmarkConfig parse_benchmark_config(std::string_view text, const std::string& source,
                                       const std::filesystem::path& base_dir);
BenchmarkConfig load_benchmark_config(const std::filesystem::path& path);

struct ResultRow {
    std::string instance;
    std::string solver;
    std::uint64_t seed = 0;
    InequalityMode penalty_mode = InequalityMode::slack_bits;
    std::size_t bits = 0;
    std::optional<double> objective;
    std::optional<double> qubo_energy;
    bool feasible = false;
    std::optional<double> gap;  // (objective - oracle) / max(1, |oracle|)
    std::string error;
    double wall_time_ms = 0.0;
};

/// Rows in canonical order: instance, solver, seed, penalty mode. Per-row
/// failures land in the error column.
std::vector<ResultRow> run_benchmark(const BenchmarkConfig& config);

/// Column order: instance,solver,seed,penalty_mode,bits,objective,qubo_energy,
/// feasible,gap,error,wall_time_ms. wall_time_ms is last so it can be cut off.
std::string results_csv(const std::vector<ResultRow>& rows);
/// solver,penalty_mode,rows,feasible_rate,mean_gap per (solver, mode).
std::string summary_csv(const std::vector<ResultRow>& rows);

/// Writes results.csv and summary.csv into `directory`, creating it.
void emit_results(const std::vector<ResultRow>& rows, const std::filesystem::path& directory);

}  // namespace v2gq
