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

#include "v2gq/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "v2gq/error.hpp"

namespace v2gq {

namespace {

/// Draws from a fixed engine; distribution objects are never reused so the
/// stream only depends on the order of calls.
class Draw {
  public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53);
    }
    int integer(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  private:
    std::mt19937_64 rng_;
};

double cents(double v) { return std::round(v * 100.0) / 100.0; }
double tenths(double v) { return std::round(v * 10.0) / 10.0; }

bool is_peak(int t, int T) { return T >= 3 ? (t >= T / 3 && t < (2 * T + 2) / 3) : t == T - 1; }

VehicleSpec make_vehicle(Draw& d, int index, const GeneratorConfig& cfg) {
    VehicleSpec v;
    v.id = "ev" + std::to_string(index);
    if (cfg.aligned) {
        const int K = cfg.aligned->K;
        const int K_soc = cfg.aligned->K_soc;
        // With a one-hour step, charge level k adds k SOC units when
        // h_ch * eta_ch = 1 and discharge level k removes k when h_dis / eta_dis = 1.
        v.eta_ch = d.coin() ? 1.0 : 0.5;
        v.eta_dis = d.coin() ? 1.0 : 0.5;
        v.p_ch_max = K / v.eta_ch;
        v.p_dis_max = K * v.eta_dis;
        v.soc_min = 1.0;
        v.soc_max = static_cast<double>(K_soc);
        v.soc_init = static_cast<double>(d.integer(1, K_soc));
        v.q_dis_ratio = d.coin() ? 1.0 : 0.0;
        v.battery_cost = 0.0;
    } else {
        v.eta_ch = cents(d.uniform(0.88, 0.97));
        v.eta_dis = cents(d.uniform(0.88, 0.97));
        v.p_ch_max = tenths(d.uniform(3.0, 11.0));
        v.p_dis_max = tenths(d.uniform(3.0, 11.0));
        v.soc_max = std::round(d.uniform(20.0, 60.0));
        v.soc_min = std::round(0.1 * v.soc_max);
        v.soc_init = tenths(d.uniform(v.soc_min, v.soc_max));
        v.q_dis_ratio = cents(d.uniform(0.1, 0.5));
        v.battery_cost = cents(d.uniform(0.0, 0.05));
    }
    return v;
}

StepTable zeros(int T, std::size_t nd) {
    return StepTable(static_cast<std::size_t>(T), std::vector<double>(nd, 0.0));
}

void add_locations(V2GInstance& inst, Draw& d, const GeneratorConfig& cfg) {
    const int T = inst.grid.horizon_steps;
    const auto nd = static_cast<std::size_t>(cfg.nodes);
    for (int k = 0; k < cfg.nodes; ++k) inst.locations.push_back("n" + std::to_string(k));

    // Critical loads at a fixed share of the nodes, chosen by shuffling.
    std::vector<std::size_t> order(nd);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = nd; i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(d.integer(0, static_cast<int>(i) - 1))]);
    }
    const auto critical = static_cast<std::size_t>(
            std::clamp(std::lround(cfg.critical_fraction * cfg.nodes), 1L, static_cast<long>(nd)));
    GridLimits& lim = inst.limits;
    lim.p_crit = zeros(T, nd);
    lim.c_crit = zeros(T, nd);
    lim.c_gen = zeros(T, nd);
    for (std::size_t k = 0; k < critical; ++k) {
        const std::size_t loc = order[k];
        const double cost = cents(d.uniform(0.5, 3.0));
        for (int t = 0; t < T; ++t) {
            lim.p_crit[t][loc] = cfg.aligned ? d.integer(1, std::max(1, cfg.aligned->K - 1))
                                             : tenths(d.uniform(2.0, 10.0));
            lim.c_crit[t][loc] = cost;
        }
    }
    for (int t = 0; t < T; ++t) {
        for (std::size_t loc = 0; loc < nd; ++loc) lim.c_gen[t][loc] = cents(d.uniform(0.02, 0.1));
    }

    // Local generation covers demand plus reserve, so an idle fleet stays feasible.
    lim.p_gen = zeros(T, nd);
    lim.p_demand.assign(static_cast<std::size_t>(T), 0.0);
    lim.sr_req.assign(static_cast<std::size_t>(T), 0.0);
    for (int t = 0; t < T; ++t) {
        const double demand = cfg.aligned ? d.integer(1, 4) : tenths(d.uniform(5.0, 20.0));
        const double reserve = cfg.aligned ? d.integer(0, 1) : tenths(d.uniform(0.0, 3.0));
        lim.p_demand[t] = demand;
        lim.sr_req[t] = reserve;
        double remaining = demand + reserve + (cfg.aligned ? d.integer(0, 2) : tenths(d.uniform(0.0, 5.0)));
        for (std::size_t loc = 0; loc < nd; ++loc) {
            const double share = loc + 1 == nd ? remaining
                                               : (cfg.aligned ? std::floor(remaining / 2.0)
                                                              : tenths(remaining * d.uniform(0.2, 0.8)));
            lim.p_gen[t][loc] = share;
            remaining -= share;
        }
    }
    double fleet_dis = 0.0;
    for (const VehicleSpec& v : inst.fleet) fleet_dis += v.p_dis_max;
    lim.p_line_max = cfg.aligned ? std::max(1.0, std::floor(0.75 * fleet_dis)) : tenths(0.75 * fleet_dis);
}

TransportGraph make_graph(Draw& d, const std::vector<std::string>& nodes, const GeneratorConfig& cfg) {
    TransportGraph g;
    g.nodes = nodes;
    const std::size_t n = nodes.size();
    std::vector<std::pair<double, double>> pos(n);
    for (auto& p : pos) p = {d.uniform(0.0, 1.0), d.uniform(0.0, 1.0)};
    auto dist = [&](std::size_t a, std::size_t b) {
        return std::hypot(pos[a].first - pos[b].first, pos[a].second - pos[b].second);
    };
    auto add = [&](std::size_t a, std::size_t b) {
        Edge e;
        e.a = nodes[a];
        e.b = nodes[b];
        e.travel_time = std::max(1, static_cast<int>(std::ceil(dist(a, b) * cfg.travel_factor - 1e-9)));
        e.weight = tenths(std::max(0.1, dist(a, b)));
        g.edges.push_back(e);
    };
    std::vector<std::size_t> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    auto root = [&](std::size_t a) {
        while (comp[a] != a) a = comp[a] = comp[comp[a]];
        return a;
    };
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (dist(a, b) <= cfg.connect_radius) {
                add(a, b);
                comp[root(a)] = root(b);
            }
        }
    }
    // Repair: join components through their closest pair until connected.
    for (;;) {
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> pick{0, 0};
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (root(a) != root(b) && dist(a, b) < best) {
                    best = dist(a, b);
                    pick = {a, b};
                }
            }
        }
        if (!std::isfinite(best)) break;
        add(pick.first, pick.second);
        comp[root(pick.first)] = root(pick.second);
    }
    return g;
}

}  // namespace

Instance generate_instance(const GeneratorConfig& cfg, std::uint64_t seed) {
    if (cfg.vehicles < 1) throw InputError("generate: vehicles must be at least 1");
    if (cfg.horizon < 1) throw InputError("generate: horizon must be at least 1");
    if (cfg.nodes < 1) throw InputError("generate: nodes must be at least 1");
    if (cfg.aligned && (cfg.aligned->K < 2 || cfg.aligned->K_soc < 2)) {
        throw InputError("generate: aligned levels need K >= 2 and K_soc >= 2");
    }
    Draw d(seed);
    V2GInstance inst;
    inst.grid.horizon_steps = cfg.horizon;
    inst.grid.step_hours = cfg.aligned ? 1.0 : cfg.step_hours;
    for (int i = 0; i < cfg.vehicles; ++i) inst.fleet.push_back(make_vehicle(d, i, cfg));

    const double base = cents(d.uniform(0.08, 0.16));
    for (int t = 0; t < cfg.horizon; ++t) {
        const double shape = is_peak(t, cfg.horizon) ? 1.8 : 1.0;
        const double r_ch = cents(base * shape * d.uniform(0.95, 1.05));
        inst.prices.r_ch.push_back(r_ch);
        inst.prices.r_dis.push_back(cents(r_ch * d.uniform(0.9, 1.3)));
    }

    inst.objective.mode = cfg.kind == InstanceKind::csp ? ObjectiveMode::contingency : cfg.mode;
    if (inst.objective.mode == ObjectiveMode::weighted) {
        inst.objective.w1 = cfg.w1;
        inst.objective.w2 = cfg.w2;
    }
    const bool located = cfg.kind == InstanceKind::csp || cfg.mode != ObjectiveMode::cost || cfg.resilience;
    if (located) add_locations(inst, d, cfg);

    Instance out;
    if (cfg.kind == InstanceKind::v2g) {
        validate(inst);
        out.data = std::move(inst);
        return out;
    }

    CSPInstance csp;
    csp.graph = make_graph(d, inst.locations, cfg);
    for (const std::string& loc : inst.locations) csp.ev_cap[loc] = d.integer(1, std::max(1, cfg.vehicles));
    for (int i = 0; i < cfg.vehicles; ++i) {
        csp.c_tran.push_back(cents(d.uniform(0.1, 1.0)));
        csp.initial_location.push_back(inst.locations[static_cast<std::size_t>(d.integer(0, cfg.nodes - 1))]);
        if (!cfg.aligned) inst.fleet[static_cast<std::size_t>(i)].battery_cost = cents(d.uniform(0.0, 0.05));
    }
    csp.v2g = std::move(inst);
    validate(csp);
    out.data = std::move(csp);
    return out;
}

}  // namespace v2gq
