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

// Randomized properties. Generators are plain functions of an mt19937_64.

#include "catch_amalgamated.hpp"

#include "support.hpp"
#include "v2gq/csp.hpp"
#include "v2gq/generate.hpp"
#include "v2gq/qubo.hpp"
#include "v2gq/scenario.hpp"
#include "v2gq/solvers.hpp"

using namespace v2gq;
using namespace v2gq::test;
using Catch::Approx;

namespace {

VehicleSpec random_vehicle(Rng& rng, const std::string& id) {
    VehicleSpec v;
    v.id = id;
    v.p_ch_max = uniform(rng, 1, 10);
    v.p_dis_max = uniform(rng, 1, 10);
    v.eta_ch = uniform(rng, 0.7, 1.0);
    v.eta_dis = uniform(rng, 0.7, 1.0);
    v.soc_min = uniform(rng, 1, 5);
    v.soc_max = v.soc_min + uniform(rng, 5, 50);
    v.soc_init = uniform(rng, v.soc_min, v.soc_max);
    return v;
}

TransportGraph random_graph(Rng& rng, int n) {
    TransportGraph g;
    for (int k = 0; k < n; ++k) g.nodes.push_back("n" + std::to_string(k));
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (uniform(rng, 0, 1) < 0.5) g.edges.push_back(Edge{g.nodes[a], g.nodes[b], integer(rng, 1, 4)});
        }
    }
    return g;
}

Instance aligned(Rng& rng, InstanceKind kind, int K, int K_soc) {
    GeneratorConfig cfg;
    cfg.kind = kind;
    cfg.vehicles = 1;
    cfg.horizon = 2;
    cfg.nodes = 2;
    cfg.aligned = DiscretizationLevels{K, K_soc, 2};
    return generate_instance(cfg, rng());
}

}  // namespace

TEST_CASE("property: round trip through the battery loses energy") {
    Rng rng(1);
    for (int k = 0; k < 200; ++k) {
        VehicleSpec v = random_vehicle(rng, "ev");
        if (v.eta_ch * v.eta_dis >= 1.0) continue;
        v.soc_init = v.soc_min;
        const double e_in = uniform(rng, 0.1, 1.0) * (v.soc_max - v.soc_min) / v.eta_ch;
        const TimeGrid grid{2, 1.0};
        // charge e_in, then discharge until SOC is back where it started
        const double stored = v.eta_ch * e_in;
        const std::vector<PowerStep> sched{{e_in, 0.0}, {0.0, stored * v.eta_dis}};
        const auto tr = simulate_soc(v, grid, sched);
        CHECK(tr.soc[2] == Approx(tr.soc[0]));
        CHECK(sched[1].p_dis < e_in);
    }
}

TEST_CASE("property: objective is additive over vehicles") {
    Rng rng(2);
    for (int k = 0; k < 30; ++k) {
        const int T = integer(rng, 1, 4);
        V2GInstance inst = cost_instance(2, T);
        for (int t = 0; t < T; ++t) {
            inst.prices.r_ch[t] = uniform(rng, 0, 1);
            inst.prices.r_dis[t] = uniform(rng, 0, 1);
        }
        const auto m = build_v2g_model(inst);
        const Assignment zero = idle(m, inst);
        Assignment a1 = zero;
        Assignment a2 = zero;
        Assignment both = zero;
        for (int t = 0; t < T; ++t) {
            const double p = uniform(rng, 0, 2);
            const double q = uniform(rng, 0, 2);
            a1[names::pch("ev0", t)] = both[names::pch("ev0", t)] = p;
            a2[names::pdis("ev1", t)] = both[names::pdis("ev1", t)] = q;
        }
        CHECK(evaluate(m, both).objective ==
              Approx(evaluate(m, a1).objective + evaluate(m, a2).objective).margin(1e-12));
    }
}

TEST_CASE("property: higher discharge prices never hurt") {
    Rng rng(3);
    for (int k = 0; k < 15; ++k) {
        V2GInstance inst = std::get<V2GInstance>(aligned(rng, InstanceKind::v2g, 2, 3).data);
        const auto m = build_model(inst);
        const auto enc = plan_encodings(m, {2, 3, 2});
        const double before = exact_discrete_reference(m, enc).objective;
        inst.prices.r_dis[static_cast<std::size_t>(integer(rng, 0, 1))] += uniform(rng, 0, 0.5);
        const auto m2 = build_model(inst);
        CHECK(exact_discrete_reference(m2, plan_encodings(m2, {2, 3, 2})).objective <= before + 1e-12);
    }
}

TEST_CASE("property: contingency objective stays in its range") {
    Rng rng(4);
    for (int k = 0; k < 15; ++k) {
        GeneratorConfig cfg;
        cfg.mode = ObjectiveMode::contingency;
        cfg.horizon = 2;
        cfg.nodes = 2;
        cfg.aligned = DiscretizationLevels{2, 2, 2};
        const V2GInstance inst = generate_instance(cfg, rng()).v2g();
        const auto m = build_model(inst);
        const auto ref = exact_discrete_reference(m, plan_encodings(m, {2, 2, 2}));
        REQUIRE(ref.feasible);
        double hi = 0.0;
        for (int t = 0; t < 2; ++t) {
            for (std::size_t d = 0; d < 2; ++d) {
                hi += inst.limits.at(inst.limits.p_crit, t, d) * inst.limits.at(inst.limits.c_crit, t, d);
                hi += inst.limits.gen_max(t, d) * inst.limits.at(inst.limits.c_gen, t, d);
            }
        }
        for (const auto& a : {ref.assignment, idle(m, inst)}) {
            const auto rep = evaluate(m, a);
            REQUIRE(rep.feasible);
            CHECK(rep.objective >= -1e-12);
            CHECK(rep.objective <= hi + 1e-9);
        }
    }
}

TEST_CASE("property: builds are deterministic") {
    Rng rng(5);
    for (int k = 0; k < 10; ++k) {
        GeneratorConfig cfg;
        cfg.kind = InstanceKind::csp;
        cfg.vehicles = integer(rng, 1, 3);
        cfg.nodes = integer(rng, 1, 4);
        cfg.horizon = integer(rng, 1, 4);
        const Instance inst = generate_instance(cfg, rng());
        CHECK(dump(build_instance_model(inst)) == dump(build_instance_model(inst)));
    }
}

TEST_CASE("property: travel times obey the triangle inequality") {
    Rng rng(6);
    for (int k = 0; k < 50; ++k) {
        const TransportGraph g = random_graph(rng, integer(rng, 2, 6));
        for (const auto& a : g.nodes) {
            CHECK(shortest_travel_time(g, a, a) == 0);
            for (const auto& b : g.nodes) {
                const auto ab = shortest_travel_time(g, a, b);
                CHECK(ab == shortest_travel_time(g, b, a));
                for (const auto& c : g.nodes) {
                    const auto ac = shortest_travel_time(g, a, c);
                    const auto bc = shortest_travel_time(g, b, c);
                    if (ab && bc) {
                        REQUIRE(ac.has_value());
                        CHECK(*ac <= *ab + *bc);
                    }
                }
            }
        }
    }
}

TEST_CASE("property: more capacity never raises the optimum") {
    Rng rng(7);
    for (int k = 0; k < 6; ++k) {
        GeneratorConfig cfg;
        cfg.kind = InstanceKind::csp;
        cfg.vehicles = 2;
        cfg.horizon = 1;
        cfg.nodes = 2;
        cfg.aligned = DiscretizationLevels{2, 2, 2};
        CSPInstance c = generate_instance(cfg, rng()).csp();
        for (auto& [d, cap] : c.ev_cap) cap = 0;
        const auto m0 = build_csp_model(c);
        const double tight = exact_discrete_reference(m0, plan_encodings(m0, {2, 2, 2})).objective;
        c.ev_cap[c.v2g.locations[0]] = 1;
        const auto m1 = build_csp_model(c);
        const double loose = exact_discrete_reference(m1, plan_encodings(m1, {2, 2, 2})).objective;
        CHECK(loose <= tight + 1e-12);
    }
}

TEST_CASE("property: encodings round trip") {
    Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        const int levels = integer(rng, 2, 9);
        const auto e = k % 2 ? make_power_encoding(uniform(rng, 0.5, 20), levels)
                             : make_range_encoding(uniform(rng, 0, 5), uniform(rng, 6, 60), levels, "s");
        for (int level = 0; level < levels; ++level) {
            const Bits b = encode_level(e, level);
            CHECK(decode_group(e, b) == e.value(level));
            CHECK(e.level_of(decode_group(e, b)) == level);
        }
    }
}

TEST_CASE("property: transpiled coefficients are upper triangular") {
    Rng rng(9);
    for (int k = 0; k < 10; ++k) {
        const Instance inst = aligned(rng, k % 2 ? InstanceKind::csp : InstanceKind::v2g, 2, 2);
        const auto m = build_instance_model(inst);
        for (auto mode : {InequalityMode::slack_bits, InequalityMode::paper_verbatim}) {
            PenaltyConfig cfg;
            cfg.mode = mode;
            const auto t = transpile(m, cfg, plan_encodings(m, {2, 2, 2}));
            for (const auto& [ij, v] : t.qubo.coefficients) {
                CHECK(ij.first <= ij.second);
                CHECK(ij.second < t.qubo.num_bits);
                CHECK(v != 0.0);
            }
            // every model variable mapped once, bits disjoint
            std::vector<int> used(t.qubo.num_bits, 0);
            for (const auto& b : t.map.vars) for (auto bit : b.bits) ++used[bit];
            for (const auto& s : t.map.slacks) for (auto bit : s.bits) ++used[bit];
            CHECK(t.map.vars.size() == m.num_variables());
            CHECK(std::all_of(used.begin(), used.end(), [](int u) { return u == 1; }));
        }
    }
}

TEST_CASE("property: feasible assignments cost no penalty in slack mode") {
    Rng rng(10);
    for (int k = 0; k < 20; ++k) {
        const Instance inst = aligned(rng, k % 2 ? InstanceKind::csp : InstanceKind::v2g, 2, 3);
        const auto m = build_instance_model(inst);
        const auto enc = plan_encodings(m, {2, 3, 2});
        const auto ref = exact_discrete_reference(m, enc);
        REQUIRE(ref.feasible);
        const auto t = transpile(m, PenaltyConfig{}, enc);
        const auto audit = penalty_audit(m, t, encode_assignment(m, t, ref.assignment));
        CHECK(audit.feasible);
        CHECK(audit.total_penalty == Approx(0.0).margin(1e-9));
        CHECK(audit.qubo_energy == Approx(ref.objective).margin(1e-9));
    }
}

TEST_CASE("property: stochastic objective is the expectation") {
    Rng rng(11);
    for (int k = 0; k < 10; ++k) {
        const CSPInstance base = line_csp(1, 2);
        const int count = integer(rng, 1, 4);
        const ScenarioSet set = sample_scenarios(base, {0.3, 0.0, 0.3, 0.2}, rng(), count);
        const auto m = build_stochastic_csp(base, set);
        std::vector<double> values(m.num_variables());
        for (std::size_t i = 0; i < values.size(); ++i) {
            const Variable& v = m.variable(i);
            values[i] = v.kind == VarKind::binary ? static_cast<double>(rng() & 1u) : uniform(rng, v.lo, v.hi);
        }
        const Assignment joint = to_assignment(m, values);
        double expected = 0.0;
        for (const Scenario& s : set.scenarios) {
            const auto part = build_csp_model(apply_scenario(base, s));
            Assignment a;
            for (const Variable& v : part.variables()) a[v.name] = joint.at(scenario_prefix(s) + v.name);
            expected += s.probability * evaluate(part, a).objective;
        }
        CHECK(evaluate(m, joint).objective == Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("property: solvers are deterministic in their seed") {
    Rng rng(12);
    const Instance inst = aligned(rng, InstanceKind::csp, 2, 2);
    const auto m = build_instance_model(inst);
    const auto enc = plan_encodings(m, {2, 2, 2});
    HybridConfig cfg;
    cfg.seed = 4;
    const auto a = hybrid_solve(m, enc, cfg);
    const auto b = hybrid_solve(m, enc, cfg);
    CHECK(a.assignment == b.assignment);
    CHECK(a.rounds == b.rounds);
}
