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

#include "catch_amalgamated.hpp"

#include "support.hpp"
#include "v2gq/error.hpp"
#include "v2gq/qubo.hpp"
#include "v2gq/scenario.hpp"
#include "v2gq/solvers.hpp"

using namespace v2gq;
using namespace v2gq::test;
using Catch::Approx;

namespace {

std::string strip(std::string text, const std::string& prefix) {
    for (auto pos = text.find(prefix); pos != std::string::npos; pos = text.find(prefix, pos)) {
        text.erase(pos, prefix.size());
    }
    return text;
}

Scenario scenario(std::string id, double p) {
    Scenario s;
    s.id = std::move(id);
    s.probability = p;
    return s;
}

// Minimum over a -> c travel times by Floyd-Warshall on available edges.
int floyd(const TransportGraph& g, const std::string& from, const std::string& to) {
    const std::size_t n = g.nodes.size();
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    auto id = [&](const std::string& s) {
        return static_cast<std::size_t>(std::find(g.nodes.begin(), g.nodes.end(), s) - g.nodes.begin());
    };
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (const Edge& e : g.edges) {
        if (!e.available) continue;
        d[id(e.a)][id(e.b)] = std::min(d[id(e.a)][id(e.b)], e.travel_time);
        d[id(e.b)][id(e.a)] = std::min(d[id(e.b)][id(e.a)], e.travel_time);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d[id(from)][id(to)];
}

}  // namespace

TEST_CASE("scenario: equiprobable sampling") {
    const CSPInstance base = line_csp(2, 3);
    SamplingConfig cfg{0.2, 0.1, 0.3, 0.1};
    const auto set = sample_scenarios(base, cfg, 7, 4);
    REQUIRE(set.scenarios.size() == 4);
    for (const auto& s : set.scenarios) CHECK(s.probability == 0.25);
    CHECK_NOTHROW(validate(set));
    CHECK(sample_scenarios(base, cfg, 7, 4) == set);
    CHECK_FALSE(sample_scenarios(base, cfg, 8, 4) == set);
    CHECK_THROWS_AS(sample_scenarios(base, cfg, 7, 0), InputError);
}

TEST_CASE("scenario: zero magnitudes reproduce the base") {
    const CSPInstance base = line_csp(2, 3);
    const auto set = sample_scenarios(base, SamplingConfig{}, 3, 3);
    for (const auto& s : set.scenarios) {
        CHECK(s.overrides.empty());
        CHECK(apply_scenario(base, s) == base);
    }
}

TEST_CASE("scenario: set validation") {
    ScenarioSet set;
    CHECK_THROWS_AS(validate(set), InvariantError);
    set.scenarios = {scenario("a", 0.5), scenario("b", 0.4)};
    CHECK_THROWS_AS(validate(set), InvariantError);
    set.scenarios[1].probability = 0.5;
    CHECK_NOTHROW(validate(set));
    set.w2 = 0.5;
    CHECK_THROWS_AS(validate(set), InvariantError);
}

TEST_CASE("scenario: expected objective") {
    V2GInstance inst = located_instance(0, 1, {"a"}, 10.0, 1.0);
    ScenarioSet set;
    set.w1 = 0.0;
    set.w2 = 1.0;
    set.scenarios = {scenario("lo", 0.5), scenario("hi", 0.5)};
    set.scenarios[1].overrides.p_crit[{0, 0}] = 20.0;
    const auto m = build_stochastic_v2g(inst, set);
    CHECK(evaluate(m, Assignment{}).objective == Approx(15.0));
}

TEST_CASE("scenario: energy-only weights") {
    V2GInstance inst = located_instance(1, 1, {"a"}, 10.0, 1.0);
    inst.prices = {{0.2}, {0.4}};
    ScenarioSet set;
    set.scenarios = {scenario("s", 1.0)};
    set.w1 = 1.0;
    set.w2 = 0.0;
    const auto m = build_stochastic_v2g(inst, set);
    Assignment a;
    for (const auto& [k, v] : idle(build_weighted_model(inst), inst)) a["s/" + k] = v;
    a["s/" + names::z("ev0", 0, "a")] = 1;
    a["s/" + names::y("ev0", 0)] = 1;
    a["s/" + names::pdis("ev0", 0, "a")] = 2;
    a["s/" + names::soc("ev0", 1)] = 3;
    const auto rep = evaluate(m, a);
    CHECK(rep.feasible);
    CHECK(rep.objective == Approx(-0.8));
}

TEST_CASE("scenario: single scenario equals the deterministic model") {
    V2GInstance inst = located_instance(2, 2, {"a", "b"}, 3.0, 2.0);
    inst.objective = {ObjectiveMode::weighted, 0.3, 0.7};
    ScenarioSet set;
    set.scenarios = {scenario("s", 1.0)};
    set.w1 = 0.3;
    set.w2 = 0.7;
    CHECK(strip(dump(build_stochastic_v2g(inst, set)), "s/") == dump(build_weighted_model(inst)));

    const CSPInstance csp = line_csp(1, 3);
    CHECK(strip(dump(build_stochastic_csp(csp, set)), "s/") == dump(build_csp_model(csp)));
}

TEST_CASE("scenario: two-scenario linearity") {
    const CSPInstance csp = line_csp(1, 2);
    ScenarioSet set;
    set.scenarios = {scenario("p", 0.3), scenario("q", 0.7)};
    set.scenarios[1].overrides.p_crit[{1, 1}] = 5.0;
    const auto m = build_stochastic_csp(csp, set);
    const auto mp = build_csp_model(apply_scenario(csp, set.scenarios[0]));
    const auto mq = build_csp_model(apply_scenario(csp, set.scenarios[1]));
    Assignment ap = idle(mp, csp.v2g);
    Assignment aq = idle(mq, csp.v2g);
    ap[names::z("ev0", 1, "a")] = 1;
    aq[names::z("ev0", 1, "a")] = 1;
    aq[names::y("ev0", 1)] = 1;
    aq[names::pdis("ev0", 1, "a")] = 1;
    aq[names::soc("ev0", 2)] = 4;
    Assignment joint;
    for (const auto& [k, v] : ap) joint["p/" + k] = v;
    for (const auto& [k, v] : aq) joint["q/" + k] = v;
    const double expected = 0.3 * evaluate(mp, ap).objective + 0.7 * evaluate(mq, aq).objective;
    CHECK(evaluate(m, joint).objective == Approx(expected).epsilon(1e-12));
}

TEST_CASE("scenario: edge outage turns a relocation into a violation") {
    CSPInstance c = line_csp(1, 4);
    c.v2g.locations = {"a", "c"};
    c.graph.nodes = {"a", "b", "c"};
    c.graph.edges = {Edge{"a", "c", 1}, Edge{"a", "b", 1}, Edge{"b", "c", 1}};
    RoutePlan plan;
    plan.routes.push_back({{{0, "a"}, {2, "c"}}, {{0, 0}}});
    CHECK(validate_route_plan(c, plan).travel.empty());

    Scenario out = scenario("w", 1.0);
    out.overrides.edge_travel_time[0] = std::nullopt;
    const CSPInstance reduced = apply_scenario(c, out);
    const int rt = floyd(reduced.graph, "a", "c");
    CHECK(rt == 2);
    CHECK(shortest_travel_time(reduced.graph, "a", "c") == rt);
    const auto rep = validate_route_plan(reduced, plan);
    REQUIRE(rep.travel.size() == 1);
    CHECK(rep.travel[0].t1 == 0);

    ScenarioSet set;
    set.scenarios = {out};
    const auto m = build_stochastic_csp(c, set);
    const auto base_model = build_csp_model(c);
    Assignment a;
    for (const auto& [k, v] : plan_to_assignment(base_model, c, plan)) a["w/" + k] = v;
    const auto violated = evaluate(m, a).violated;
    CHECK(std::find(violated.begin(), violated.end(), "w/mob[ev0,0,a,2,c]") != violated.end());
    CHECK(evaluate(base_model, plan_to_assignment(base_model, c, plan)).feasible);
}

TEST_CASE("scenario: override of a missing edge is rejected") {
    const CSPInstance c = line_csp(1, 2);
    ScenarioSet set;
    set.scenarios = {scenario("w", 1.0)};
    set.scenarios[0].overrides.edge_travel_time[5] = 2;
    CHECK_THROWS_AS(build_stochastic_csp(c, set), InvariantError);
    set.scenarios[0].overrides = {};
    set.scenarios[0].overrides.p_crit[{9, 0}] = 1.0;
    CHECK_THROWS_AS(build_stochastic_csp(c, set), InvariantError);
}

TEST_CASE("scenario: first-stage routing shares z") {
    const CSPInstance c = line_csp(1, 2);
    ScenarioSet set;
    set.scenarios = {scenario("p", 0.5), scenario("q", 0.5)};
    set.first_stage_routing = true;
    const auto m = build_stochastic_csp(c, set);
    CHECK(m.find(names::z("ev0", 0, "a")).has_value());
    CHECK_FALSE(m.find("p/" + names::z("ev0", 0, "a")).has_value());
    CHECK(m.find("p/" + names::x("ev0", 0)).has_value());
}

TEST_CASE("scenario: zero-probability scenario keeps the optimum") {
    V2GInstance inst = located_instance(1, 1, {"a"}, 1.0, 2.0);
    inst.fleet[0] = vehicle("ev0", 2.0, 2.0);
    inst.fleet[0].soc_min = 1.0;
    inst.fleet[0].soc_max = 3.0;
    inst.prices = {{0.1}, {0.3}};
    ScenarioSet one;
    one.w1 = 0.5;
    one.w2 = 0.5;
    one.scenarios = {scenario("s", 1.0)};
    ScenarioSet two = one;
    two.scenarios.push_back(scenario("ghost", 0.0));
    two.scenarios[1].overrides.p_crit[{0, 0}] = 0.0;

    auto optimum = [](const StructuredModel& m) {
        const auto enc = plan_encodings(m, {2, 3, 2});
        const auto t = transpile(m, PenaltyConfig{}, enc);
        const auto r = brute_force(t.qubo);
        const auto rep = evaluate(m, decode(r.best_bits, t.map).assignment);
        REQUIRE(rep.feasible);
        CHECK(rep.objective == Approx(exact_discrete_reference(m, enc).objective));
        return rep.objective;
    };
    CHECK(optimum(build_stochastic_v2g(inst, two)) == Approx(optimum(build_stochastic_v2g(inst, one))));
}
