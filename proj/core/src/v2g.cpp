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

#include "v2gq/v2g.hpp"

#include <cmath>
#include <set>

#include "v2gq/error.hpp"

namespace v2gq {

namespace names {

namespace {
std::string idx(const std::string& prefix, const std::string& a, int t) {
    return prefix + "[" + a + "," + std::to_string(t) + "]";
}
std::string idx(const std::string& prefix, const std::string& a, int t, const std::string& b) {
    return prefix + "[" + a + "," + std::to_string(t) + "," + b + "]";
}
}  // namespace

std::string pch(const std::string& v, int t) { return idx("pch", v, t); }
std::string pch(const std::string& v, int t, const std::string& d) { return idx("pch", v, t, d); }
std::string pdis(const std::string& v, int t) { return idx("pdis", v, t); }
std::string pdis(const std::string& v, int t, const std::string& d) { return idx("pdis", v, t, d); }
std::string x(const std::string& v, int t) { return idx("x", v, t); }
std::string y(const std::string& v, int t) { return idx("y", v, t); }
std::string z(const std::string& v, int t, const std::string& d) { return idx("z", v, t, d); }
std::string soc(const std::string& v, int t) { return idx("soc", v, t); }
std::string pgen(int t, const std::string& d) {
    return "pgen[" + std::to_string(t) + "," + d + "]";
}

}  // namespace names

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw InvariantError(field, what);
}

void check_series(const std::vector<double>& s, std::size_t n, const std::string& field,
                  bool allow_empty) {
    if (s.empty() && allow_empty) return;
    require(s.size() == n, field,
            "length " + std::to_string(s.size()) + " does not match horizon " + std::to_string(n));
    for (std::size_t i = 0; i < s.size(); ++i) {
        require(std::isfinite(s[i]) && s[i] >= 0.0, field + "[" + std::to_string(i) + "]",
                "must be finite and non-negative");
    }
}

void check_table(const StepTable& table, std::size_t steps, std::size_t locs,
                 const std::string& field) {
    if (table.empty()) return;
    require(table.size() == steps, field,
            "has " + std::to_string(table.size()) + " rows, expected " + std::to_string(steps));
    for (std::size_t t = 0; t < table.size(); ++t) {
        const std::string row = field + "[" + std::to_string(t) + "]";
        require(table[t].size() == locs, row,
                "has " + std::to_string(table[t].size()) + " entries, expected " +
                        std::to_string(locs));
        for (std::size_t d = 0; d < locs; ++d) {
            require(std::isfinite(table[t][d]) && table[t][d] >= 0.0,
                    row + "[" + std::to_string(d) + "]", "must be finite and non-negative");
        }
    }
}

Constraint make(ConstraintClass cls, std::string label, Relation rel, double rhs) {
    Constraint c;
    c.cls = cls;
    c.label = std::move(label);
    c.relation = rel;
    c.rhs = rhs;
    return c;
}

std::string at_t(const std::string& prefix, int t) {
    return prefix + "[" + std::to_string(t) + "]";
}

void add_soc_recursion(StructuredModel& m, const VehicleSpec& v, int t, double dt,
                       const std::vector<std::size_t>& charge,
                       const std::vector<std::size_t>& discharge) {
    Constraint c = make(ConstraintClass::soc_dynamics, names::soc(v.id, t), Relation::eq, 0.0);
    c.terms.push_back({m.index(names::soc(v.id, t + 1)), 1.0});
    c.terms.push_back({m.index(names::soc(v.id, t)), -1.0});
    for (std::size_t p : charge) c.terms.push_back({p, -v.eta_ch * dt});
    for (std::size_t p : discharge) c.terms.push_back({p, dt / v.eta_dis});
    m.add_constraint(std::move(c));
}

void add_gate(StructuredModel& m, const std::string& label, std::size_t power, double cap,
              std::size_t binary) {
    Constraint c = make(ConstraintClass::gate, label, Relation::le, 0.0);
    c.terms = {{power, 1.0}, {binary, -cap}};
    m.add_constraint(std::move(c));
}

/// Load balance and line limits for step t over the given discharge variables.
void add_step_limits(StructuredModel& m, const V2GInstance& inst, int t,
                     const std::vector<std::pair<std::size_t, double>>& discharge,
                     const std::vector<std::size_t>& gen_vars) {
    const GridLimits& lim = inst.limits;
    double gen_data = 0.0;
    if (gen_vars.empty()) {
        for (std::size_t d = 0; d < inst.locations.size(); ++d) gen_data += lim.gen(t, d);
    }
    Constraint bal = make(ConstraintClass::load_balance, at_t("balance", t), Relation::ge,
                          lim.demand(t) + lim.reserve(t) - gen_data);
    for (const auto& [p, ratio] : discharge) bal.terms.push_back({p, 1.0});
    for (std::size_t g : gen_vars) bal.terms.push_back({g, 1.0});
    m.add_constraint(std::move(bal));

    if (std::isfinite(lim.p_line_max)) {
        Constraint line = make(ConstraintClass::line_limit, at_t("line_p", t), Relation::le,
                               lim.p_line_max);
        for (const auto& [p, ratio] : discharge) line.terms.push_back({p, 1.0});
        m.add_constraint(std::move(line));
    }
    if (std::isfinite(lim.q_line_max)) {
        // Reactive discharge at a fixed power factor: Q = ratio * P.
        Constraint line = make(ConstraintClass::line_limit, at_t("line_q", t), Relation::le,
                               lim.q_line_max);
        for (const auto& [p, ratio] : discharge) {
            if (ratio != 0.0) line.terms.push_back({p, ratio});
        }
        m.add_constraint(std::move(line));
    }
}

void require_fleet(const V2GInstance& inst) {
    if (inst.fleet.empty()) throw InvariantError("fleet", "must not be empty");
}

}  // namespace

void validate(const V2GInstance& inst) {
    require(inst.grid.horizon_steps >= 1, "grid.horizon_steps", "must be at least 1");
    require(std::isfinite(inst.grid.step_hours) && inst.grid.step_hours > 0.0,
            "grid.step_hours", "must be positive");
    const auto steps = static_cast<std::size_t>(inst.grid.horizon_steps);

    std::set<std::string> ids;
    for (std::size_t i = 0; i < inst.fleet.size(); ++i) {
        const VehicleSpec& v = inst.fleet[i];
        const std::string f = "fleet[" + std::to_string(i) + "]";
        require(!v.id.empty(), f + ".id", "must not be empty");
        require(ids.insert(v.id).second, f + ".id", "duplicate vehicle id '" + v.id + "'");
        require(v.soc_min > 0.0, f + ".soc_min", "must be positive");
        require(v.soc_min <= v.soc_max, f + ".soc_min", "must not exceed soc_max");
        require(v.soc_min <= v.soc_init && v.soc_init <= v.soc_max, f + ".soc_init",
                "must lie in [soc_min, soc_max]");
        require(v.p_ch_max > 0.0, f + ".p_ch_max", "must be positive");
        require(v.p_dis_max >= 0.0, f + ".p_dis_max", "must be non-negative");
        require(v.eta_ch > 0.0 && v.eta_ch <= 1.0, f + ".eta_ch", "must lie in (0, 1]");
        require(v.eta_dis > 0.0 && v.eta_dis <= 1.0, f + ".eta_dis", "must lie in (0, 1]");
        require(v.q_dis_ratio >= 0.0, f + ".q_dis_ratio", "must be non-negative");
        require(v.battery_cost >= 0.0, f + ".battery_cost", "must be non-negative");
    }

    check_series(inst.prices.r_ch, steps, "prices.r_ch", false);
    check_series(inst.prices.r_dis, steps, "prices.r_dis", false);

    std::set<std::string> locs;
    for (const std::string& d : inst.locations) {
        require(!d.empty() && locs.insert(d).second, "locations",
                "location ids must be unique and non-empty");
    }
    const GridLimits& lim = inst.limits;
    const std::size_t nd = inst.locations.size();
    check_table(lim.p_gen, steps, nd, "limits.p_gen");
    check_table(lim.p_gen_max, steps, nd, "limits.p_gen_max");
    check_table(lim.c_crit, steps, nd, "limits.c_crit");
    check_table(lim.c_gen, steps, nd, "limits.c_gen");
    check_table(lim.p_crit, steps, nd, "limits.p_crit");
    check_series(lim.p_demand, steps, "limits.p_demand", true);
    check_series(lim.sr_req, steps, "limits.sr_req", true);
    require(lim.p_line_max >= 0.0, "limits.p_line_max", "must be non-negative");
    require(lim.q_line_max >= 0.0, "limits.q_line_max", "must be non-negative");
    if (!lim.p_gen_max.empty()) {
        for (int t = 0; t < inst.grid.horizon_steps; ++t) {
            for (std::size_t d = 0; d < nd; ++d) {
                require(lim.gen(t, d) <= lim.gen_max(t, d),
                        "limits.p_gen[" + std::to_string(t) + "][" + std::to_string(d) + "]",
                        "exceeds p_gen_max");
            }
        }
    }

    if (inst.objective.mode == ObjectiveMode::weighted) {
        const double w1 = inst.objective.w1;
        const double w2 = inst.objective.w2;
        require(w1 >= 0.0 && w1 <= 1.0 && w2 >= 0.0 && w2 <= 1.0, "objective.w1",
                "weights must lie in [0, 1]");
        require(std::abs(w1 + w2 - 1.0) <= 1e-9, "objective.w2", "w1 + w2 must equal 1");
    }
}

StructuredModel build_v2g_model(const V2GInstance& inst) {
    require_fleet(inst);
    validate(inst);
    StructuredModel m;
    const double dt = inst.grid.step_hours;
    const int T = inst.grid.horizon_steps;
    for (const VehicleSpec& v : inst.fleet) {
        m.add_variable(names::soc(v.id, 0), VarKind::continuous, v.soc_init, v.soc_init,
                       VarRole::soc);
        for (int t = 0; t < T; ++t) {
            const std::size_t x = m.add_binary(names::x(v.id, t));
            const std::size_t y = m.add_binary(names::y(v.id, t));
            const double ch_hi = v.available ? v.p_ch_max : 0.0;
            const double dis_hi = v.available ? v.p_dis_max : 0.0;
            const std::size_t pch =
                    m.add_variable(names::pch(v.id, t), VarKind::continuous, 0.0, ch_hi, VarRole::power);
            const std::size_t pdis = m.add_variable(names::pdis(v.id, t), VarKind::continuous, 0.0,
                                                    dis_hi, VarRole::power);
            m.add_variable(names::soc(v.id, t + 1), VarKind::continuous, v.soc_min, v.soc_max,
                           VarRole::soc);
            add_gate(m, "gate_ch[" + v.id + "," + std::to_string(t) + "]", pch, v.p_ch_max, x);
            add_gate(m, "gate_dis[" + v.id + "," + std::to_string(t) + "]", pdis, v.p_dis_max, y);
            add_soc_recursion(m, v, t, dt, {pch}, {pdis});
            m.add_exclusion(x, y, "xy[" + v.id + "," + std::to_string(t) + "]");
            m.add_objective(pch, inst.prices.r_ch[t] * dt);
            m.add_objective(pdis, -inst.prices.r_dis[t] * dt);
        }
    }
    return m;
}

StructuredModel add_resilience_constraints(StructuredModel m, const V2GInstance& inst) {
    validate(inst);
    const int T = inst.grid.horizon_steps;
    for (const VehicleSpec& v : inst.fleet) {
        for (int t = 0; t < T; ++t) {
            Constraint conn = make(ConstraintClass::connectivity,
                                   "conn[" + v.id + "," + std::to_string(t) + "]", Relation::le, 1.0);
            for (const std::string& d : inst.locations) {
                const std::string zn = names::z(v.id, t, d);
                auto z = m.find(zn);
                const std::size_t zi = z ? *z : m.add_binary(zn);
                if (!v.available) m.set_bounds(zi, 0.0, 0.0);
                conn.terms.push_back({zi, 1.0});
            }
            if (!conn.terms.empty()) m.add_constraint(std::move(conn));
        }
    }
    for (int t = 0; t < T; ++t) {
        std::vector<std::pair<std::size_t, double>> discharge;
        for (const VehicleSpec& v : inst.fleet) {
            discharge.emplace_back(m.index(names::pdis(v.id, t)), v.q_dis_ratio);
        }
        add_step_limits(m, inst, t, discharge, {});
    }
    return m;
}

namespace detail {

StructuredModel build_located_core(const V2GInstance& inst, const ModelOptions& opts,
                                   const LocatedLayout& layout) {
    validate(inst);
    StructuredModel m;
    const double dt = inst.grid.step_hours;
    const int T = inst.grid.horizon_steps;

    for (const VehicleSpec& v : inst.fleet) {
        m.add_variable(names::soc(v.id, 0), VarKind::continuous, v.soc_init, v.soc_init,
                       VarRole::soc);
        const double ch_hi = v.available ? v.p_ch_max : 0.0;
        const double dis_hi = v.available ? v.p_dis_max : 0.0;
        for (int t = 0; t < T; ++t) {
            const std::string vt = v.id + "," + std::to_string(t);
            const std::size_t x = m.add_binary(names::x(v.id, t));
            const std::size_t y = m.add_binary(names::y(v.id, t));
            m.add_exclusion(x, y, "xy[" + vt + "]");

            std::vector<std::size_t> charge;
            std::vector<std::size_t> discharge;
            if (!layout.located_charging) {
                const std::size_t pch = m.add_variable(names::pch(v.id, t), VarKind::continuous,
                                                       0.0, ch_hi, VarRole::power);
                add_gate(m, "gate_ch[" + vt + "]", pch, v.p_ch_max, x);
                charge.push_back(pch);
            }
            Constraint conn = make(ConstraintClass::connectivity, "conn[" + vt + "]",
                                   Relation::le, 1.0);
            for (const std::string& d : inst.locations) {
                const std::string vtd = vt + "," + d;
                const std::size_t z = m.add_binary(names::z(v.id, t, d));
                if (!v.available) m.set_bounds(z, 0.0, 0.0);
                conn.terms.push_back({z, 1.0});
                if (layout.located_charging) {
                    const std::size_t pch = m.add_variable(names::pch(v.id, t, d),
                                                           VarKind::continuous, 0.0, ch_hi,
                                                           VarRole::power);
                    add_gate(m, "gate_ch[" + vtd + "]", pch, v.p_ch_max, x);
                    add_gate(m, "gate_chz[" + vtd + "]", pch, v.p_ch_max, z);
                    charge.push_back(pch);
                }
                const std::size_t pdis = m.add_variable(names::pdis(v.id, t, d),
                                                        VarKind::continuous, 0.0, dis_hi,
                                                        VarRole::power);
                add_gate(m, "gate_dis[" + vtd + "]", pdis, v.p_dis_max, y);
                add_gate(m, "gate_disz[" + vtd + "]", pdis, v.p_dis_max, z);
                discharge.push_back(pdis);
            }
            if (!conn.terms.empty()) m.add_constraint(std::move(conn));
            m.add_variable(names::soc(v.id, t + 1), VarKind::continuous, v.soc_min, v.soc_max,
                           VarRole::soc);
            add_soc_recursion(m, v, t, dt, charge, discharge);
        }
    }

    for (int t = 0; t < T; ++t) {
        std::vector<std::size_t> gen_vars;
        if (opts.generation_variables) {
            for (std::size_t d = 0; d < inst.locations.size(); ++d) {
                gen_vars.push_back(m.add_variable(names::pgen(t, inst.locations[d]),
                                                  VarKind::continuous, 0.0,
                                                  inst.limits.gen_max(t, d), VarRole::generation));
            }
        }
        std::vector<std::pair<std::size_t, double>> discharge;
        for (const VehicleSpec& v : inst.fleet) {
            for (const std::string& d : inst.locations) {
                discharge.emplace_back(m.index(names::pdis(v.id, t, d)), v.q_dis_ratio);
            }
        }
        add_step_limits(m, inst, t, discharge, gen_vars);

        for (std::size_t d = 0; d < inst.locations.size(); ++d) {
            const std::string& loc = inst.locations[d];
            Constraint c = make(ConstraintClass::unserved,
                                "unserved[" + std::to_string(t) + "," + loc + "]", Relation::le,
                                inst.limits.at(inst.limits.p_crit, t, d));
            for (const VehicleSpec& v : inst.fleet) {
                c.terms.push_back({m.index(names::pdis(v.id, t, loc)), 1.0});
            }
            m.add_constraint(std::move(c));
        }
    }
    return m;
}

void add_energy_cost(StructuredModel& m, const V2GInstance& inst, double weight,
                     const LocatedLayout& layout) {
    if (weight == 0.0) return;
    const double dt = inst.grid.step_hours;
    for (const VehicleSpec& v : inst.fleet) {
        for (int t = 0; t < inst.grid.horizon_steps; ++t) {
            const double ch = weight * inst.prices.r_ch[t] * dt;
            const double dis = -weight * inst.prices.r_dis[t] * dt;
            if (!layout.located_charging) m.add_objective(m.index(names::pch(v.id, t)), ch);
            for (const std::string& d : inst.locations) {
                if (layout.located_charging) m.add_objective(m.index(names::pch(v.id, t, d)), ch);
                m.add_objective(m.index(names::pdis(v.id, t, d)), dis);
            }
        }
    }
}

void add_unserved_cost(StructuredModel& m, const V2GInstance& inst, double weight) {
    if (weight == 0.0) return;
    const double dt = inst.grid.step_hours;
    const GridLimits& lim = inst.limits;
    for (int t = 0; t < inst.grid.horizon_steps; ++t) {
        for (std::size_t d = 0; d < inst.locations.size(); ++d) {
            const double c = lim.at(lim.c_crit, t, d);
            m.add_objective_constant(weight * lim.at(lim.p_crit, t, d) * c * dt);
            for (const VehicleSpec& v : inst.fleet) {
                m.add_objective(m.index(names::pdis(v.id, t, inst.locations[d])), -weight * c * dt);
            }
        }
    }
}

void add_generation_cost(StructuredModel& m, const V2GInstance& inst, double weight,
                         const ModelOptions& opts) {
    if (weight == 0.0) return;
    const double dt = inst.grid.step_hours;
    const GridLimits& lim = inst.limits;
    for (int t = 0; t < inst.grid.horizon_steps; ++t) {
        for (std::size_t d = 0; d < inst.locations.size(); ++d) {
            const double c = weight * lim.at(lim.c_gen, t, d) * dt;
            if (opts.generation_variables) {
                m.add_objective(m.index(names::pgen(t, inst.locations[d])), c);
            } else {
                m.add_objective_constant(lim.gen(t, d) * c);
            }
        }
    }
}

}  // namespace detail

StructuredModel build_contingency_model(const V2GInstance& inst, const ModelOptions& opts) {
    const detail::LocatedLayout layout{};
    StructuredModel m = detail::build_located_core(inst, opts, layout);
    detail::add_unserved_cost(m, inst, 1.0);
    detail::add_generation_cost(m, inst, 1.0, opts);
    return m;
}

StructuredModel build_weighted_model(const V2GInstance& inst, const ModelOptions& opts) {
    const detail::LocatedLayout layout{};
    StructuredModel m = detail::build_located_core(inst, opts, layout);
    detail::add_energy_cost(m, inst, inst.objective.w1, layout);
    detail::add_unserved_cost(m, inst, inst.objective.w2);
    return m;
}

StructuredModel build_model(const V2GInstance& inst, const ModelOptions& opts) {
    switch (inst.objective.mode) {
        case ObjectiveMode::cost: {
            StructuredModel m = build_v2g_model(inst);
            if (!inst.locations.empty()) m = add_resilience_constraints(std::move(m), inst);
            return m;
        }
        case ObjectiveMode::contingency: return build_contingency_model(inst, opts);
        case ObjectiveMode::weighted: return build_weighted_model(inst, opts);
    }
    throw InputError("unknown objective mode");
}

SocTrace simulate_soc(const VehicleSpec& v, const TimeGrid& grid,
                      std::span<const PowerStep> schedule) {
    if (schedule.size() != static_cast<std::size_t>(grid.horizon_steps)) {
        throw InputError("schedule length " + std::to_string(schedule.size()) +
                         " does not match horizon " + std::to_string(grid.horizon_steps));
    }
    SocTrace trace;
    trace.soc.reserve(schedule.size() + 1);
    trace.soc.push_back(v.soc_init);
    for (const PowerStep& s : schedule) {
        const double next =
                trace.soc.back() + (v.eta_ch * s.p_ch - s.p_dis / v.eta_dis) * grid.step_hours;
        trace.soc.push_back(next);
    }
    constexpr double tol = 1e-9;
    for (std::size_t t = 0; t < trace.soc.size(); ++t) {
        if (trace.soc[t] < v.soc_min - tol || trace.soc[t] > v.soc_max + tol) {
            trace.bound_violations.push_back(static_cast<int>(t));
        }
    }
    return trace;
}

}  // namespace v2gq
