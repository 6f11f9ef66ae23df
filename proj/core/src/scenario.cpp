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

#include "v2gq/scenario.hpp"

#include <cmath>
#include <random>

#include "v2gq/error.hpp"

namespace v2gq {

void validate(const ScenarioSet& set) {
    if (set.scenarios.empty()) throw InvariantError("scenarios", "must not be empty");
    double total = 0.0;
    for (std::size_t k = 0; k < set.scenarios.size(); ++k) {
        const double p = set.scenarios[k].probability;
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InvariantError("scenarios[" + std::to_string(k) + "].probability",
                                 "must lie in [0, 1]");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvariantError("scenarios", "probabilities sum to " + std::to_string(total) +
                                                  ", expected 1");
    }
    if (!(set.w1 >= 0.0 && set.w2 >= 0.0) || std::abs(set.w1 + set.w2 - 1.0) > 1e-9) {
        throw InvariantError("weights", "w1 and w2 must be non-negative and sum to 1");
    }
}

ScenarioSet sample_scenarios(const CSPInstance& base, const SamplingConfig& config,
                             std::uint64_t seed, int count, double w1, double w2) {
    if (count < 1) throw InputError("scenario count must be at least 1");
    if (config.load_sigma < 0.0 || config.gen_sigma < 0.0 ||
        config.edge_outage_probability < 0.0 || config.edge_outage_probability > 1.0 ||
        config.vehicle_outage_probability < 0.0 || config.vehicle_outage_probability > 1.0) {
        throw InputError("sampling magnitudes must be non-negative and probabilities in [0, 1]");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Mean-one log-normal factor.
    auto factor = [&](double sigma) { return std::exp(sigma * normal(rng) - 0.5 * sigma * sigma); };

    const V2GInstance& v2g = base.v2g;
    const int T = v2g.grid.horizon_steps;
    const std::size_t nd = v2g.locations.size();

    ScenarioSet set;
    set.w1 = w1;
    set.w2 = w2;
    for (int k = 0; k < count; ++k) {
        Scenario s;
        s.id = "w" + std::to_string(k);
        s.probability = 1.0 / count;
        ScenarioOverrides& o = s.overrides;
        if (config.load_sigma > 0.0) {
            for (int t = 0; t < T; ++t) {
                for (std::size_t d = 0; d < nd; ++d) {
                    const double base_load = v2g.limits.at(v2g.limits.p_crit, t, d);
                    if (base_load > 0.0) o.p_crit[{t, d}] = base_load * factor(config.load_sigma);
                }
                if (!v2g.limits.p_demand.empty()) {
                    o.p_demand[t] = v2g.limits.p_demand[t] * factor(config.load_sigma);
                }
            }
        }
        if (config.gen_sigma > 0.0) {
            for (int t = 0; t < T; ++t) {
                for (std::size_t d = 0; d < nd; ++d) {
                    const double g = v2g.limits.gen(t, d);
                    if (g > 0.0) {
                        o.p_gen[{t, d}] = std::min(g * factor(config.gen_sigma),
                                                   v2g.limits.gen_max(t, d));
                    }
                }
            }
        }
        if (config.edge_outage_probability > 0.0) {
            for (std::size_t e = 0; e < base.graph.edges.size(); ++e) {
                if (unit(rng) < config.edge_outage_probability) o.edge_travel_time[e] = std::nullopt;
            }
        }
        if (config.vehicle_outage_probability > 0.0) {
            for (std::size_t i = 0; i < v2g.fleet.size(); ++i) {
                if (unit(rng) < config.vehicle_outage_probability) o.vehicle_available[i] = false;
            }
        }
        set.scenarios.push_back(std::move(s));
    }
    return set;
}

V2GInstance apply_scenario(const V2GInstance& base, const Scenario& s) {
    V2GInstance out = base;
    const int T = base.grid.horizon_steps;
    const std::size_t nd = base.locations.size();
    auto fill = [&](StepTable& table) {
        if (table.empty()) {
            table.assign(static_cast<std::size_t>(T), std::vector<double>(nd, 0.0));
        }
    };
    auto check_td = [&](const std::pair<int, std::size_t>& key, const std::string& field) {
        if (key.first < 0 || key.first >= T || key.second >= nd) {
            throw InvariantError("scenario " + s.id + "." + field,
                                 "override references a nonexistent (t, location)");
        }
    };
    if (!s.overrides.p_crit.empty()) fill(out.limits.p_crit);
    for (const auto& [key, value] : s.overrides.p_crit) {
        check_td(key, "p_crit");
        out.limits.p_crit[key.first][key.second] = value;
    }
    if (!s.overrides.p_gen.empty()) {
        if (out.limits.p_gen_max.empty()) {
            fill(out.limits.p_gen);
            out.limits.p_gen_max = out.limits.p_gen;
        }
        fill(out.limits.p_gen);
    }
    for (const auto& [key, value] : s.overrides.p_gen) {
        check_td(key, "p_gen");
        out.limits.p_gen[key.first][key.second] =
                std::min(value, out.limits.gen_max(key.first, key.second));
    }
    for (const auto& [t, value] : s.overrides.p_demand) {
        if (t < 0 || t >= T) {
            throw InvariantError("scenario " + s.id + ".p_demand", "nonexistent step");
        }
        if (out.limits.p_demand.empty()) out.limits.p_demand.assign(static_cast<std::size_t>(T), 0.0);
        out.limits.p_demand[t] = value;
    }
    for (const auto& [i, available] : s.overrides.vehicle_available) {
        if (i >= out.fleet.size()) {
            throw InvariantError("scenario " + s.id + ".vehicle_available", "nonexistent vehicle");
        }
        out.fleet[i].available = available;
    }
    return out;
}

CSPInstance apply_scenario(const CSPInstance& base, const Scenario& s) {
    CSPInstance out = base;
    out.v2g = apply_scenario(base.v2g, s);
    for (const auto& [e, tt] : s.overrides.edge_travel_time) {
        if (e >= out.graph.edges.size()) {
            throw InvariantError("scenario " + s.id + ".edges",
                                 "override references nonexistent edge " + std::to_string(e));
        }
        if (tt) {
            out.graph.edges[e].travel_time = *tt;
        } else {
            out.graph.edges[e].available = false;
        }
    }
    return out;
}

std::string scenario_prefix(const Scenario& s) { return s.id + "/"; }

std::vector<std::string> first_stage_names(const V2GInstance& inst) {
    std::vector<std::string> out;
    for (const VehicleSpec& v : inst.fleet) {
        for (int t = 0; t < inst.grid.horizon_steps; ++t) {
            for (const std::string& d : inst.locations) out.push_back(names::z(v.id, t, d));
        }
    }
    return out;
}

StructuredModel build_stochastic_v2g(const V2GInstance& instance, const ScenarioSet& set,
                                     const ModelOptions& opts) {
    validate(set);
    const std::vector<std::string> shared =
            set.first_stage_routing ? first_stage_names(instance) : std::vector<std::string>{};
    StructuredModel m;
    for (const Scenario& s : set.scenarios) {
        V2GInstance scen = apply_scenario(instance, s);
        scen.objective = ObjectiveSpec{ObjectiveMode::weighted, set.w1, set.w2};
        m.append(build_weighted_model(scen, opts), scenario_prefix(s), s.probability, shared);
    }
    return m;
}

StructuredModel build_stochastic_csp(const CSPInstance& instance, const ScenarioSet& set,
                                     const ModelOptions& opts) {
    validate(set);
    const std::vector<std::string> shared =
            set.first_stage_routing ? first_stage_names(instance.v2g) : std::vector<std::string>{};
    StructuredModel m;
    for (const Scenario& s : set.scenarios) {
        const CSPInstance scen = apply_scenario(instance, s);
        m.append(build_csp_model(scen, opts), scenario_prefix(s), s.probability, shared);
    }
    return m;
}

}  // namespace v2gq
