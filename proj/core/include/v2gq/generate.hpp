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
#include <optional>
#include <string>

#include "v2gq/instance_io.hpp"
#include "v2gq/qubo.hpp"

namespace v2gq {

enum class InstanceKind { v2g, csp };

struct GeneratorConfig {
    InstanceKind kind = InstanceKind::v2g;
    int vehicles = 1;
    int horizon = 2;
    int nodes = 2;  // locations; the transport graph has one node per location
    double step_hours = 1.0;
    ObjectiveMode mode = ObjectiveMode::cost;
    double w1 = 0.5;
    double w2 = 0.5;
    /// Share of locations carrying critical load.
    double critical_fraction = 0.5;
    /// Locations, demand, reserve and generation for cost-mode V2G instances.
    bool resilience = false;
    /// Travel time per unit distance on the unit square.
    double travel_factor = 2.0;
    double connect_radius = 0.6;
    /// When set, choose ratings so that every SOC transition between encoded
    /// levels is exact: SOC step 1 and integral power levels.
    std::optional<DiscretizationLevels> aligned;
};

/// Deterministic in (config, seed). Throws InputError for sizes below 1.
Instance generate_instance(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace v2gq
