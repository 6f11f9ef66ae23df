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

#include <sstream>

#include "catch_amalgamated.hpp"

#include "support.hpp"
#include "v2gq/error.hpp"
#include "v2gq/qubo.hpp"

using namespace v2gq;
using namespace v2gq::test;
using Catch::Approx;

namespace {

std::vector<double> values_of(const OneHotEncoding& e) {
    std::vector<double> out;
    for (int k = 0; k < e.levels; ++k) out.push_back(e.value(k));
    return out;
}

double coef(const QuboProblem& q, std::uint32_t i, std::uint32_t j) {
    auto it = q.coefficients.find({i, j});
    return it == q.coefficients.end() ? 0.0 : it->second;
}

StructuredModel pair_model(Relation rel, ConstraintClass cls) {
    StructuredModel m;
    const auto b1 = m.add_binary("b1");
    const auto b2 = m.add_binary("b2");
    m.add_constraint(Constraint{{{b1, 1.0}, {b2, 1.0}}, rel, 1.0, "pair", cls});
    return m;
}

// 1 vehicle, one step, power levels {0, 1}, SOC levels {1, 2, 3}
V2GInstance small_v2g() {
    V2GInstance inst = cost_instance(1, 1, {0.1}, {0.3});
    inst.fleet[0] = vehicle("ev0", 2.0, 2.0);
    inst.fleet[0].soc_max = 3.0;
    return inst;
}

}  // namespace

TEST_CASE("qubo: power encoding levels") {
    CHECK(values_of(make_power_encoding(10, 5)) == std::vector<double>{0, 2, 4, 6, 8});
    CHECK(values_of(make_power_encoding(10, 2)) == std::vector<double>{0, 5});
    CHECK(make_power_encoding(10, 5).bit_names.size() == 4);
    CHECK_THROWS_AS(make_power_encoding(10, 1), InputError);
    CHECK_THROWS_AS(make_power_encoding(0, 3), InputError);
}

TEST_CASE("qubo: SOC encoding levels") {
    VehicleSpec v = vehicle("ev0");
    v.soc_min = 2;
    v.soc_max = 10;
    CHECK(values_of(make_soc_encoding(v, 5)) == std::vector<double>{2, 4, 6, 8, 10});
    CHECK(values_of(make_soc_encoding(v, 2)) == std::vector<double>{2, 10});
    const auto e = make_soc_encoding(v, 5);
    const Bits zero(4, 0);
    CHECK(decode_group(e, zero) == 2.0);
    v.soc_max = 2;
    CHECK_THROWS_AS(make_soc_encoding(v, 3), InputError);
}

TEST_CASE("qubo: encode and decode levels") {
    const auto e = make_power_encoding(10, 5);
    for (int k = 0; k < e.levels; ++k) {
        CHECK(decode_group(e, encode_level(e, k)) == e.value(k));
        CHECK(e.level_of(e.value(k)) == k);
    }
    CHECK_FALSE(e.level_of(3.0).has_value());
    bool multi = false;
    const Bits two{1, 0, 1, 0};
    CHECK(decode_group(e, two, &multi) == 2.0);
    CHECK(multi);
}

TEST_CASE("qubo: squared equality expansion") {
    const auto m = pair_model(Relation::eq, ConstraintClass::generic);
    PenaltyConfig cfg;
    cfg.class_weight[ConstraintClass::generic] = 10;
    const auto t = transpile(m, cfg, plan_encodings(m, {}));
    CHECK(t.qubo.num_bits == 2);
    CHECK(coef(t.qubo, 0, 0) == -10);
    CHECK(coef(t.qubo, 1, 1) == -10);
    CHECK(coef(t.qubo, 0, 1) == 20);
    CHECK(t.qubo.offset == 10);
}

TEST_CASE("qubo: empty model") {
    StructuredModel m;
    m.add_objective_constant(3.5);
    const auto t = transpile(m, PenaltyConfig{}, plan_encodings(m, {}));
    CHECK(t.qubo.num_bits == 0);
    CHECK(t.qubo.coefficients.empty());
    CHECK(t.qubo.offset == 3.5);
}

TEST_CASE("qubo: capacity under both inequality modes") {
    const auto m = pair_model(Relation::le, ConstraintClass::capacity);
    PenaltyConfig cfg;
    cfg.class_weight[ConstraintClass::capacity] = 10;
    cfg.mode = InequalityMode::paper_verbatim;
    const auto v = transpile(m, cfg, plan_encodings(m, {}));
    CHECK(coef(v.qubo, 0, 0) == -10);
    CHECK(coef(v.qubo, 1, 1) == -10);
    CHECK(coef(v.qubo, 0, 1) == 20);
    CHECK(v.qubo.offset == 10);
    CHECK(qubo_energy(v.qubo, Bits{0, 0}) == 10);

    cfg.mode = InequalityMode::slack_bits;
    const auto s = transpile(m, cfg, plan_encodings(m, {}));
    CHECK(qubo_energy(s.qubo, Bits{0, 0}) == 0);
    CHECK(qubo_energy(s.qubo, Bits{1, 0}) == 0);
    CHECK(qubo_energy(s.qubo, Bits{1, 1}) > 0);
}

TEST_CASE("qubo: energy evaluation") {
    QuboProblem q;
    q.num_bits = 2;
    q.add(0, 0, 1);
    q.add(1, 1, 3);
    q.add(1, 0, -2);
    q.offset = 0.5;
    CHECK(coef(q, 0, 1) == -2);
    CHECK(qubo_energy(q, Bits{1, 1}) == 2.5);
    CHECK(qubo_energy(q, Bits{0, 0}) == 0.5);
    CHECK(qubo_energy(q, Bits{1, 0}) == 1.5);
    CHECK_THROWS_AS(qubo_energy(q, Bits{1}), InputError);
}

TEST_CASE("qubo: decode of a power variable") {
    StructuredModel m;
    m.add_variable("p", VarKind::continuous, 0, 10, VarRole::power);
    const auto t = transpile(m, PenaltyConfig{}, plan_encodings(m, {5, 2, 2}));
    REQUIRE(t.qubo.num_bits == 4);
    CHECK(decode(Bits{0, 0, 1, 0}, t.map).assignment.at("p") == 6);
    CHECK(decode(Bits{0, 0, 0, 0}, t.map).assignment.at("p") == 0);
    const auto multi = decode(Bits{1, 0, 1, 0}, t.map);
    CHECK(multi.assignment.at("p") == 2);
    CHECK(multi.multi_hot == std::vector<std::string>{"p"});
}

TEST_CASE("qubo: unencoded continuous variable is named") {
    StructuredModel m;
    m.add_variable("mystery", VarKind::continuous, 0, 1);
    try {
        plan_encodings(m, {});
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("mystery") != std::string::npos);
    }
    CHECK_THROWS_AS(transpile(m, PenaltyConfig{}, EncodingTable{}), InputError);
}

TEST_CASE("qubo: dominance bound") {
    StructuredModel m;
    const auto p = m.add_variable("p", VarKind::continuous, 0, 10, VarRole::power);
    const auto b = m.add_binary("b");
    m.add_objective(p, -0.5);
    m.add_objective(b, 3);
    // all bits of p set: 2 * (1 + 2 + 3 + 4) = 20
    CHECK(dominance_bound(m, plan_encodings(m, {5, 2, 2})) == Approx(1 + 0.5 * 20 + 3));
}

TEST_CASE("qubo: feasible assignment has zero penalty") {
    V2GInstance inst = cost_instance(1, 2, {0.2, 0.1}, {0.3, 0.4});
    inst.fleet[0].p_ch_max = inst.fleet[0].p_dis_max = 4;
    const auto m = build_v2g_model(inst);
    const auto enc = plan_encodings(m, {2, 10, 2});
    const auto t = transpile(m, PenaltyConfig{}, enc);
    Assignment a = idle(m, inst);
    a[names::x("ev0", 0)] = 1;
    a[names::pch("ev0", 0)] = 2;
    a[names::soc("ev0", 1)] = 7;
    a[names::y("ev0", 1)] = 1;
    a[names::pdis("ev0", 1)] = 2;
    a[names::soc("ev0", 2)] = 5;
    const Bits bits = encode_assignment(m, t, a);
    CHECK(decode(bits, t.map).assignment == a);
    const auto audit = penalty_audit(m, t, bits);
    CHECK(audit.feasible);
    for (const auto& e : audit.entries) {
        INFO(e.label);
        CHECK(e.energy == Approx(0.0).margin(1e-9));
        CHECK(e.satisfied);
    }
    CHECK(audit.qubo_energy == Approx(-0.4));
}

TEST_CASE("qubo: broken SOC step is reported") {
    const V2GInstance inst = small_v2g();
    const auto m = build_v2g_model(inst);
    const auto enc = plan_encodings(m, {2, 3, 2});
    PenaltyConfig cfg;
    cfg.class_weight[ConstraintClass::soc_dynamics] = 7;
    const auto t = transpile(m, cfg, enc);
    Assignment a = idle(m, inst);
    a[names::x("ev0", 0)] = 1;
    a[names::pch("ev0", 0)] = 1;
    a[names::soc("ev0", 1)] = 2;  // one SOC level short
    const std::vector<PowerStep> sched{{1.0, 0.0}};
    const double expected_soc = simulate_soc(inst.fleet[0], inst.grid, sched).soc[1];
    const double residual = a[names::soc("ev0", 1)] - expected_soc;
    const auto audit = penalty_audit(m, t, encode_assignment(m, t, a));
    CHECK_FALSE(audit.feasible);
    for (const auto& e : audit.entries) {
        if (e.label == names::soc("ev0", 0)) {
            CHECK_FALSE(e.satisfied);
            CHECK(e.energy == Approx(7 * residual * residual));
        } else {
            INFO(e.label);
            CHECK(e.energy == Approx(0.0).margin(1e-9));
        }
    }
}

TEST_CASE("qubo: audit total matches the energy") {
    const V2GInstance inst = small_v2g();
    const auto m = build_v2g_model(inst);
    for (auto mode : {InequalityMode::slack_bits, InequalityMode::paper_verbatim}) {
        PenaltyConfig cfg;
        cfg.mode = mode;
        const auto t = transpile(m, cfg, plan_encodings(m, {3, 3, 2}));
        Rng rng(11);
        for (int k = 0; k < 5; ++k) {
            Bits bits(t.qubo.num_bits);
            for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
            const auto audit = penalty_audit(m, t, bits);
            CHECK(audit.total_penalty == Approx(audit.qubo_energy - audit.objective).margin(1e-6));
        }
    }
}

TEST_CASE("qubo: coefficient file round trip") {
    const V2GInstance inst = small_v2g();
    const auto m = build_v2g_model(inst);
    const auto t = transpile(m, PenaltyConfig{}, plan_encodings(m, {3, 3, 2}));
    std::ostringstream os;
    write_qubo(os, t.qubo);
    std::istringstream is(os.str());
    const QuboProblem back = read_qubo(is);
    CHECK(back.num_bits == t.qubo.num_bits);
    CHECK(back.offset == t.qubo.offset);
    CHECK(back.coefficients == t.qubo.coefficients);
    for (const auto& [ij, v] : back.coefficients) CHECK(ij.first <= ij.second);
}

TEST_CASE("qubo: malformed coefficient file") {
    std::istringstream missing("0 0 1\n");
    CHECK_THROWS_AS(read_qubo(missing), ParseError);
    std::istringstream bad("#bits 2 offset 0\n0 0 1\n1 0 2\n");
    try {
        read_qubo(bad);
        FAIL("expected an error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("qubo: inequality handling") {
    StructuredModel m;
    const auto p = m.add_variable("p", VarKind::continuous, 0, 4, VarRole::power);
    m.add_constraint(Constraint{{{p, 1.0}}, Relation::le, 2.0, "cap_p", ConstraintClass::generic});
    const auto enc = plan_encodings(m, {4, 2, 2});
    PenaltyConfig cfg;
    cfg.class_weight[ConstraintClass::generic] = 1;
    const auto slack = transpile(m, cfg, enc);
    cfg.mode = InequalityMode::paper_verbatim;
    const auto verbatim = transpile(m, cfg, enc);
    // p = 1 is strictly inside: free with slack bits, squared residual 1 verbatim
    Assignment a{{"p", 1.0}};
    CHECK(penalty_audit(m, slack, encode_assignment(m, slack, a)).total_penalty == Approx(0).margin(1e-12));
    CHECK(penalty_audit(m, verbatim, encode_assignment(m, verbatim, a)).total_penalty == Approx(1));
    CHECK_FALSE(slack.map.slacks.empty());
}
