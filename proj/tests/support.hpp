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

// Small builders shared by the test binaries.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "v2gq/csp.hpp"
#include "v2gq/model.hpp"
#include "v2gq/v2g.hpp"

namespace v2gq::test {

inline VehicleSpec vehicle(std::string id, double p_max = 2.0, double soc_init = 5.0) {
    VehicleSpec v;
    v.id = std::move(id);
    v.p_ch_max = p_max;
    v.p_dis_max = p_max;
    v.soc_min = 1.0;
    v.soc_max = 10.0;
    v.soc_init = soc_init;
    return v;
}

inline V2GInstance cost_instance(int vehicles, int T, std::vector<double> r_ch = {},
                                 std::vector<double> r_dis = {}) {
    V2GInstance inst;
    inst.grid.horizon_steps = T;
    for (int i = 0; i < vehicles; ++i) inst.fleet.push_back(vehicle("ev" + std::to_string(i)));
    inst.prices.r_ch = r_ch.empty() ? std::vector<double>(T, 0.1) : std::move(r_ch);
    inst.prices.r_dis = r_dis.empty() ? std::vector<double>(T, 0.1) : std::move(r_dis);
    return inst;
}

/// Located instance: uniform critical load and cost at every location.
inline V2GInstance located_instance(int vehicles, int T, std::vector<std::string> locs,
                                    double p_crit, double c_crit) {
    V2GInstance inst = cost_instance(vehicles, T);
    inst.locations = std::move(locs);
    const std::size_t nd = inst.locations.size();
    inst.limits.p_crit.assign(T, std::vector<double>(nd, p_crit));
    inst.limits.c_crit.assign(T, std::vector<double>(nd, c_crit));
    inst.objective.mode = ObjectiveMode::contingency;
    return inst;
}

/// Every variable at its lower bound, SOC held at the initial value.
inline Assignment idle(const StructuredModel& m, const V2GInstance& inst) {
    Assignment a;
    for (const Variable& v : m.variables()) a[v.name] = v.lo;
    for (const VehicleSpec& v : inst.fleet) {
        for (int t = 0; t <= inst.grid.horizon_steps; ++t) {
            auto it = a.find(names::soc(v.id, t));
            if (it != a.end()) it->second = v.soc_init;
        }
    }
    return a;
}

/// Two-location CSP with one edge of the given travel time.
inline CSPInstance line_csp(int vehicles, int T, int travel = 1) {
    CSPInstance c;
    c.v2g = located_instance(vehicles, T, {"a", "b"}, 2.0, 1.0);
    c.graph.nodes = {"a", "b"};
    c.graph.edges.push_back(Edge{"a", "b", travel, 1.0, false, true});
    for (int i = 0; i < vehicles; ++i) {
        c.c_tran.push_back(1.0);
        c.initial_location.push_back("a");
    }
    return c;
}

using Rng = std::mt19937_64;

inline double uniform(Rng& r, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(r);
}
inline int integer(Rng& r, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(r);
}

}  // namespace v2gq::test
