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
#include "v2gq/v2g.hpp"

using namespace v2gq;
using namespace v2gq::test;
using Catch::Approx;

namespace {

std::size_t count_prefix(const StructuredModel& m, const std::string& prefix) {
    return static_cast<std::size_t>(std::count_if(m.variables().begin(), m.variables().end(),
                                                  [&](const Variable& v) { return v.name.rfind(prefix, 0) == 0; }));
}

// charge 2 kW at t0, discharge 2 kW at t1
Assignment arbitrage(const StructuredModel& m, const V2GInstance& inst) {
    Assignment a = idle(m, inst);
    a[names::x("ev0", 0)] = 1;
    a[names::pch("ev0", 0)] = 2;
    a[names::soc("ev0", 1)] = 7;
    a[names::y("ev0", 1)] = 1;
    a[names::pdis("ev0", 1)] = 2;
    a[names::soc("ev0", 2)] = 5;
    return a;
}

}  // namespace

TEST_CASE("v2g: arbitrage objective") {
    const auto inst = cost_instance(1, 2, {0.2, 0.1}, {0.3, 0.4});
    const auto m = build_v2g_model(inst);
    const auto rep = evaluate(m, arbitrage(m, inst));
    CHECK(rep.feasible);
    CHECK(rep.objective == Approx(0.2 * 2 - 0.4 * 2));
}

TEST_CASE("v2g: idle schedule costs nothing") {
    const auto inst = cost_instance(2, 3, {0.2, 0.1, 0.3}, {0.3, 0.4, 0.1});
    const auto m = build_v2g_model(inst);
    const auto rep = evaluate(m, idle(m, inst));
    CHECK(rep.feasible);
    CHECK(rep.objective == 0.0);
}

TEST_CASE("v2g: variable and exclusion counts") {
    const auto m = build_v2g_model(cost_instance(2, 3));
    CHECK(count_prefix(m, "pch[") == 6);
    CHECK(count_prefix(m, "pdis[") == 6);
    CHECK(count_prefix(m, "x[") == 6);
    CHECK(count_prefix(m, "y[") == 6);
    CHECK(count_prefix(m, "soc[") == 8);
    CHECK(m.exclusions().size() == 6);
}

TEST_CASE("v2g: build errors") {
    auto empty = cost_instance(0, 2);
    CHECK_THROWS_AS(build_v2g_model(empty), InvariantError);
    auto bad = cost_instance(1, 2);
    bad.prices.r_dis.pop_back();
    CHECK_THROWS_AS(build_v2g_model(bad), InvariantError);
    auto soc = cost_instance(1, 2);
    soc.fleet[0].soc_min = 11;
    try {
        build_v2g_model(soc);
        FAIL("expected an error");
    } catch (const InvariantError& e) {
        CHECK(e.field() == "fleet[0].soc_min");
    }
}

TEST_CASE("v2g: timestep scales energy") {
    auto inst = cost_instance(1, 1, {0.2}, {0.3});
    inst.grid.step_hours = 0.5;
    const auto m = build_v2g_model(inst);
    Assignment a = idle(m, inst);
    a[names::x("ev0", 0)] = 1;
    a[names::pch("ev0", 0)] = 2;
    a[names::soc("ev0", 1)] = 6;
    const auto rep = evaluate(m, a);
    CHECK(rep.feasible);
    CHECK(rep.objective == Approx(0.2));
}

TEST_CASE("v2g: resilience load balance at the boundary") {
    auto inst = cost_instance(1, 1);
    inst.fleet[0].p_dis_max = 4;
    inst.locations = {"a"};
    inst.limits.p_gen = {{5.0}};
    inst.limits.p_demand = {7.0};
    inst.limits.sr_req = {1.0};
    const auto m = add_resilience_constraints(build_v2g_model(inst), inst);
    Assignment a = idle(m, inst);
    a[names::y("ev0", 0)] = 1;
    a[names::pdis("ev0", 0)] = 3;
    a[names::soc("ev0", 1)] = 2;
    const auto rep = evaluate(m, a);
    CHECK(rep.feasible);
    a[names::pdis("ev0", 0)] = 2.5;
    a[names::soc("ev0", 1)] = 2.5;
    const auto short_rep = evaluate(m, a);
    CHECK(short_rep.violated == std::vector<std::string>{"balance[0]"});
}

TEST_CASE("v2g: one location per step") {
    auto inst = cost_instance(1, 1);
    inst.locations = {"a", "b"};
    const auto m = add_resilience_constraints(build_v2g_model(inst), inst);
    Assignment a = idle(m, inst);
    a[names::z("ev0", 0, "a")] = 1;
    a[names::z("ev0", 0, "b")] = 1;
    CHECK(evaluate(m, a).violated == std::vector<std::string>{"conn[ev0,0]"});
}

TEST_CASE("v2g: reactive line limit") {
    auto inst = cost_instance(2, 1);
    inst.locations = {"a"};
    for (auto& v : inst.fleet) v.q_dis_ratio = 0.5;
    inst.limits.q_line_max = 1.9;
    const auto m = add_resilience_constraints(build_v2g_model(inst), inst);
    Assignment a = idle(m, inst);
    for (const auto& v : inst.fleet) {
        a[names::y(v.id, 0)] = 1;
        a[names::pdis(v.id, 0)] = 2;
        a[names::soc(v.id, 1)] = 3;
    }
    const auto rep = evaluate(m, a);
    CHECK(rep.violated == std::vector<std::string>{"line_q[0]"});
    const auto& c = m.constraints();
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k].label == "line_q[0]") CHECK(rep.residuals[k] == Approx(0.1));
    }
}

TEST_CASE("v2g: contingency term") {
    auto inst = located_instance(1, 1, {"a"}, 5.0, 10.0);
    inst.fleet[0].p_dis_max = 4;
    const auto m = build_contingency_model(inst);
    Assignment a = idle(m, inst);
    a[names::z("ev0", 0, "a")] = 1;
    a[names::y("ev0", 0)] = 1;
    a[names::pdis("ev0", 0, "a")] = 3;
    a[names::soc("ev0", 1)] = 2;
    const auto rep = evaluate(m, a);
    CHECK(rep.feasible);
    CHECK(rep.objective == Approx(20.0));
}

TEST_CASE("v2g: contingency with no fleet leaves all load unserved") {
    auto inst = located_instance(0, 2, {"a", "b"}, 3.0, 2.0);
    inst.limits.p_gen = {{1.0, 0.0}, {0.0, 2.0}};
    inst.limits.c_gen = {{0.5, 0.5}, {0.5, 0.5}};
    const auto m = build_contingency_model(inst);
    CHECK(m.num_variables() == 0);
    const auto rep = evaluate(m, Assignment{});
    CHECK(rep.objective == Approx(4 * 3.0 * 2.0 + 3.0 * 0.5));
}

TEST_CASE("v2g: full coverage costs nothing") {
    auto inst = located_instance(1, 1, {"a"}, 2.0, 10.0);
    const auto m = build_contingency_model(inst);
    Assignment a = idle(m, inst);
    a[names::z("ev0", 0, "a")] = 1;
    a[names::y("ev0", 0)] = 1;
    a[names::pdis("ev0", 0, "a")] = 2;
    a[names::soc("ev0", 1)] = 3;
    const auto rep = evaluate(m, a);
    CHECK(rep.feasible);
    CHECK(rep.objective == Approx(0.0).margin(1e-12));
    // over-delivery is not rewarded, it is infeasible
    a[names::pdis("ev0", 0, "a")] = 2.0;
    inst.limits.p_crit = {{1.0}};
    const auto m2 = build_contingency_model(inst);
    CHECK(evaluate(m2, a).violated == std::vector<std::string>{"unserved[0,a]"});
}

TEST_CASE("v2g: weighted mode mixes both costs") {
    auto inst = located_instance(1, 1, {"a"}, 2.0, 10.0);
    inst.objective = {ObjectiveMode::weighted, 0.25, 0.75};
    inst.prices = {{0.2}, {0.4}};
    const auto m = build_weighted_model(inst);
    Assignment a = idle(m, inst);
    a[names::z("ev0", 0, "a")] = 1;
    a[names::y("ev0", 0)] = 1;
    a[names::pdis("ev0", 0, "a")] = 1;
    a[names::soc("ev0", 1)] = 4;
    CHECK(evaluate(m, a).objective == Approx(0.25 * -0.4 + 0.75 * 10.0));
    inst.objective.w2 = 0.5;
    CHECK_THROWS_AS(build_weighted_model(inst), InvariantError);
}

TEST_CASE("v2g: evaluate flags the charge/discharge exclusion") {
    const auto inst = cost_instance(1, 2);
    const auto m = build_v2g_model(inst);
    Assignment a = idle(m, inst);
    a[names::x("ev0", 1)] = 1;
    a[names::y("ev0", 1)] = 1;
    const auto rep = evaluate(m, a);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.exclusion_violations == std::vector<std::string>{"xy[ev0,1]"});
}

TEST_CASE("v2g: broken SOC recursion") {
    const auto inst = cost_instance(1, 2, {0.2, 0.1}, {0.3, 0.4});
    const auto m = build_v2g_model(inst);
    Assignment a = arbitrage(m, inst);
    a[names::soc("ev0", 1)] = 7.5;
    const auto rep = evaluate(m, a);
    CHECK_FALSE(rep.feasible);
    const auto& c = m.constraints();
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k].label == names::soc("ev0", 0)) CHECK(rep.residuals[k] == Approx(0.5));
    }
    CHECK(std::find(rep.violated.begin(), rep.violated.end(), names::soc("ev0", 0)) != rep.violated.end());
}

TEST_CASE("v2g: simulate_soc") {
    VehicleSpec v = vehicle("ev0");
    v.eta_ch = 0.9;
    v.eta_dis = 0.9;
    const TimeGrid grid{2, 1.0};
    const std::vector<PowerStep> sched{{2.0, 0.0}, {0.0, 1.8}};
    const auto tr = simulate_soc(v, grid, sched);
    REQUIRE(tr.soc.size() == 3);
    CHECK(tr.soc[1] == Approx(6.8));
    CHECK(tr.soc[2] == Approx(4.8));
    CHECK(tr.bound_violations.empty());

    const std::vector<PowerStep> idle_sched(2);
    const auto flat = simulate_soc(v, grid, idle_sched);
    CHECK(flat.soc == std::vector<double>{5.0, 5.0, 5.0});

    const std::vector<PowerStep> drain{{0.0, 9.0}, {0.0, 0.0}};
    CHECK(simulate_soc(v, grid, drain).bound_violations == std::vector<int>{1, 2});
    CHECK_THROWS_AS(simulate_soc(v, grid, std::span<const PowerStep>(sched).first(1)), InputError);
}

TEST_CASE("v2g: identical instances give identical models") {
    const auto inst = cost_instance(2, 3, {0.2, 0.1, 0.3}, {0.3, 0.4, 0.1});
    CHECK(dump(build_v2g_model(inst)) == dump(build_v2g_model(inst)));
}
