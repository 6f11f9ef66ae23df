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

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "v2gq/model.hpp"

namespace v2gq {

struct TimeGrid {
    int horizon_steps = 1;
    double step_hours = 1.0;

    bool operator==(const TimeGrid&) const = default;
};

struct VehicleSpec {
    std::string id;
    double p_ch_max = 0.0;   // kW
    double p_dis_max = 0.0;  // kW
    double eta_ch = 1.0;
    double eta_dis = 1.0;
    double soc_min = 0.0;  // kWh
    double soc_max = 0.0;  // kWh
    double soc_init = 0.0;
    double q_dis_ratio = 0.0;   // kVAr per kW of discharge
    double battery_cost = 0.0;  // $/kWh throughput
    bool available = true;      // scenarios may take a vehicle out of service

    bool operator==(const VehicleSpec&) const = default;
};

struct PriceSeries {
    std::vector<double> r_ch;   // $/kWh, one per step
    std::vector<double> r_dis;  // $/kWh, one per step

    bool operator==(const PriceSeries&) const = default;
};

/// Per-step, per-location table indexed [t][d]. An empty table reads as zeros.
using StepTable = std::vector<std::vector<double>>;

struct GridLimits {
    StepTable p_gen;
    StepTable p_gen_max;  // empty: equal to p_gen
    std::vector<double> p_demand;
    std::vector<double> sr_req;
    double p_line_max = std::numeric_limits<double>::infinity();
    double q_line_max = std::numeric_limits<double>::infinity();
    StepTable c_crit;
    StepTable c_gen;
    StepTable p_crit;

    double at(const StepTable& table, int t, std::size_t d) const {
        return table.empty() ? 0.0 : table[static_cast<std::size_t>(t)][d];
    }
    double gen(int t, std::size_t d) const { return at(p_gen, t, d); }
    double gen_max(int t, std::size_t d) const {
        return p_gen_max.empty() ? gen(t, d) : at(p_gen_max, t, d);
    }
    double demand(int t) const { return p_demand.empty() ? 0.0 : p_demand[t]; }
    double reserve(int t) const { return sr_req.empty() ? 0.0 : sr_req[t]; }

    bool operator==(const GridLimits&) const = default;
};

enum class ObjectiveMode { cost, contingency, weighted };

struct ObjectiveSpec {
    ObjectiveMode mode = ObjectiveMode::cost;
    double w1 = 1.0;  // energy cost weight (weighted mode)
    double w2 = 0.0;  // unserved-load weight (weighted mode)

    bool operator==(const ObjectiveSpec&) const = default;
};

struct V2GInstance {
    TimeGrid grid;
    std::vector<VehicleSpec> fleet;
    PriceSeries prices;
    GridLimits limits;
    std::vector<std::string> locations;
    ObjectiveSpec objective;

    bool operator==(const V2GInstance&) const = default;
};

/// Build-time switches shared by the located (per-location) model builders.
struct ModelOptions {
    /// Treat P^gen[t,d] as a decision variable in [0, p_gen_max] instead of data.
    bool generation_variables = false;
};

/// Throws InvariantError naming the offending field. Fleet emptiness is
/// checked by the builders that need a fleet, not here.
void validate(const V2GInstance& instance);

// Variable and constraint naming. Stable across builds of identical instances.
namespace names {
std::string pch(const std::string& vehicle, int t);
std::string pch(const std::string& vehicle, int t, const std::string& loc);
std::string pdis(const std::string& vehicle, int t);
std::string pdis(const std::string& vehicle, int t, const std::string& loc);
std::string x(const std::string& vehicle, int t);
std::string y(const std::string& vehicle, int t);
std::string z(const std::string& vehicle, int t, const std::string& loc);
std::string soc(const std::string& vehicle, int t);
std::string pgen(int t, const std::string& loc);
}  // namespace names

/// Cost-mode model: gated charge/discharge power, SOC recursion, SOC box as
/// variable bounds, and the charge/discharge exclusion. Rejects an empty fleet.
StructuredModel build_v2g_model(const V2GInstance& instance);

/// Adds load balance with spinning reserve, single-location connectivity and
/// the active/reactive line limits to a model from build_v2g_model.
StructuredModel add_resilience_constraints(StructuredModel model, const V2GInstance& instance);

/// Interruption-cost model with per-location discharge gated by connection
/// binaries. An empty fleet is allowed: all critical load is then unserved.
StructuredModel build_contingency_model(const V2GInstance& instance, const ModelOptions& opts = {});

/// w1 * energy cost + w2 * unserved-load cost over the contingency structure.
StructuredModel build_weighted_model(const V2GInstance& instance, const ModelOptions& opts = {});

/// Dispatches on instance.objective.mode. Cost mode also gets the resilience
/// constraints when the instance carries locations.
StructuredModel build_model(const V2GInstance& instance, const ModelOptions& opts = {});

struct PowerStep {
    double p_ch = 0.0;
    double p_dis = 0.0;
};

struct SocTrace {
    std::vector<double> soc;         // horizon_steps + 1 values, soc[0] = soc_init
    std::vector<int> bound_violations;  // indices into soc that leave [soc_min, soc_max]
};

SocTrace simulate_soc(const VehicleSpec& vehicle, const TimeGrid& grid,
                      std::span<const PowerStep> schedule);

namespace detail {

/// Shared body of the contingency, weighted and CSP builders. Declares the
/// per-location structure and every operational constraint; adds no objective.
struct LocatedLayout {
    bool located_charging = false;  // CSP: charge power per location too
};

StructuredModel build_located_core(const V2GInstance& instance, const ModelOptions& opts,
                                   const LocatedLayout& layout);

void add_energy_cost(StructuredModel& model, const V2GInstance& instance, double weight,
                     const LocatedLayout& layout);
void add_unserved_cost(StructuredModel& model, const V2GInstance& instance, double weight);
void add_generation_cost(StructuredModel& model, const V2GInstance& instance, double weight,
                         const ModelOptions& opts);

}  // namespace detail

}  // namespace v2gq
