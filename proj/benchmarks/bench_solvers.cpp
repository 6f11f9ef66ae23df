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

#include <benchmark/benchmark.h>

#include <random>

#include "v2gq/generate.hpp"
#include "v2gq/qubo.hpp"
#include "v2gq/solvers.hpp"

namespace {

v2gq::QuboProblem random_qubo(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    v2gq::QuboProblem q;
    q.num_bits = n;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i; j < n; ++j) q.add(i, j, u(rng));
    }
    return q;
}

v2gq::TranspiledModel aligned_v2g(int vehicles, int horizon) {
    v2gq::GeneratorConfig cfg;
    cfg.vehicles = vehicles;
    cfg.horizon = horizon;
    cfg.aligned = v2gq::DiscretizationLevels{2, 3, 2};
    const auto inst = v2gq::generate_instance(cfg, 11);
    const auto model = v2gq::build_instance_model(inst);
    return v2gq::transpile(model, {}, v2gq::plan_encodings(model, *cfg.aligned));
}

void BM_BruteForce(benchmark::State& state) {
    const auto q = random_qubo(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(v2gq::brute_force(q).best_energy);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BruteForce)->DenseRange(10, 20, 5)->Unit(benchmark::kMillisecond);

void BM_Anneal(benchmark::State& state) {
    const auto q = random_qubo(static_cast<std::size_t>(state.range(0)), 2);
    auto sched = v2gq::default_schedule(q, 3);
    sched.restarts = 1;
    for (auto _ : state) benchmark::DoNotOptimize(v2gq::simulated_anneal(q, sched).best_energy);
}
BENCHMARK(BM_Anneal)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);

void BM_Greedy(benchmark::State& state) {
    const auto q = random_qubo(static_cast<std::size_t>(state.range(0)), 4);
    const v2gq::Bits start(q.num_bits, 0);
    for (auto _ : state) benchmark::DoNotOptimize(v2gq::greedy_descent(q, start).best_energy);
}
BENCHMARK(BM_Greedy)->RangeMultiplier(2)->Range(16, 256);

void BM_TranspileV2G(benchmark::State& state) {
    v2gq::GeneratorConfig cfg;
    cfg.vehicles = static_cast<int>(state.range(0));
    cfg.horizon = 6;
    cfg.aligned = v2gq::DiscretizationLevels{3, 3, 2};
    const auto inst = v2gq::generate_instance(cfg, 5);
    const auto model = v2gq::build_instance_model(inst);
    const auto enc = v2gq::plan_encodings(model, *cfg.aligned);
    for (auto _ : state) benchmark::DoNotOptimize(v2gq::transpile(model, {}, enc).qubo.num_bits);
}
BENCHMARK(BM_TranspileV2G)->DenseRange(1, 4);

void BM_AnnealAlignedV2G(benchmark::State& state) {
    const auto t = aligned_v2g(1, static_cast<int>(state.range(0)));
    const auto sched = v2gq::default_schedule(t.qubo, 9);
    for (auto _ : state) benchmark::DoNotOptimize(v2gq::simulated_anneal(t.qubo, sched).best_energy);
}
BENCHMARK(BM_AnnealAlignedV2G)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
