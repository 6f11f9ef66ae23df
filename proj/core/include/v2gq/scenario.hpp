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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "v2gq/csp.hpp"
#include "v2gq/model.hpp"
#include "v2gq/v2g.hpp"

namespace v2gq {

/// Sparse replacements applied on top of a base instance.
struct ScenarioOverrides {
    std::map<std::pair<int, std::size_t>, double> p_crit;  // (t, location index)
    std::map<std::pair<int, std::size_t>, double> p_gen;
    std::map<int, double> p_demand;
    std::map<std::size_t, std::optional<int>> edge_travel_time;  // nullopt: edge out
    std::map<std::size_t, bool> vehicle_available;

    bool empty() const {
        return p_crit.empty() && p_gen.empty() && p_demand.empty() && edge_travel_time.empty() &&
               vehicle_available.empty();
    }

    bool operator==(const ScenarioOverrides&) const = default;
};

struct Scenario {
    std::string id;
    double probability = 0.0;
    ScenarioOverrides overrides;

    bool operator==(const Scenario&) const = default;
};

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    double w1 = 1.0;
    double w2 = 0.0;
    /// Share the connection binaries z across scenarios (here-and-now routing)
    /// instead of giving every scenario its own copy.
    bool first_stage_routing = false;

    bool operator==(const ScenarioSet&) const = default;
};

/// Throws InvariantError unless the probabilities are non-negative and sum to
/// one within 1e-9 and w1 + w2 = 1.
void validate(const ScenarioSet& set);

struct SamplingConfig {
    double load_sigma = 0.0;  // log-normal spread of critical load and demand
    double gen_sigma = 0.0;   // log-normal spread of local generation
    double edge_outage_probability = 0.0;
    double vehicle_outage_probability = 0.0;
};

/// `count` equiprobable scenarios; a pure function of its arguments.
ScenarioSet sample_scenarios(const CSPInstance& base, const SamplingConfig& config,
                             std::uint64_t seed, int count, double w1 = 1.0, double w2 = 0.0);

/// Throws InvariantError when an override references a nonexistent index.
V2GInstance apply_scenario(const V2GInstance& base, const Scenario& scenario);
CSPInstance apply_scenario(const CSPInstance& base, const Scenario& scenario);

/// Prefix carried by every per-scenario variable and constraint.
std::string scenario_prefix(const Scenario& scenario);

/// Expected weighted objective, one model copy per scenario.
StructuredModel build_stochastic_v2g(const V2GInstance& instance, const ScenarioSet& set,
                                     const ModelOptions& opts = {});

/// Expected restoration cost, one model copy per scenario with that
/// scenario's loads, generation and transport graph.
StructuredModel build_stochastic_csp(const CSPInstance& instance, const ScenarioSet& set,
                                     const ModelOptions& opts = {});

/// Names of the variables shared across scenarios under first-stage routing.
std::vector<std::string> first_stage_names(const V2GInstance& instance);

}  // namespace v2gq
