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

#include "v2gq/csp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <unordered_map>

#include "v2gq/error.hpp"

namespace v2gq {

bool TransportGraph::has_node(const std::string& n) const {
    return std::find(nodes.begin(), nodes.end(), n) != nodes.end();
}

namespace names {
std::string traversal(const std::string& v, std::size_t edge, int t) {
    return "tr[" + v + ",e" + std::to_string(edge) + "," + std::to_string(t) + "]";
}
std::string capacity(const std::string& loc, int t) {
    return "cap[" + loc + "," + std::to_string(t) + "]";
}
std::string mobility(const std::string& v, int t1, const std::string& d1, int t2,
                     const std::string& d2) {
    return "mob[" + v + "," + std::to_string(t1) + "," + d1 + "," + std::to_string(t2) + "," +
           d2 + "]";
}
}  // namespace names

namespace {

std::string link_label(const std::string& v, int t1, const std::string& d1, int t2,
                       const std::string& d2) {
    return "link[" + v + "," + std::to_string(t1) + "," + d1 + "," + std::to_string(t2) + "," +
           d2 + "]";
}

int horizon_of(const CSPInstance& inst) { return inst.v2g.grid.horizon_steps; }

}  // namespace

void validate(const CSPInstance& inst) {
    validate(inst.v2g);
    const TransportGraph& g = inst.graph;
    std::set<std::string> nodes;
    for (const std::string& n : g.nodes) {
        if (n.empty() || !nodes.insert(n).second) {
            throw InvariantError("graph.nodes", "node ids must be unique and non-empty");
        }
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const Edge& edge = g.edges[e];
        const std::string f = "graph.edges[" + std::to_string(e) + "]";
        if (!nodes.count(edge.a) || !nodes.count(edge.b)) {
            throw InvariantError(f, "endpoint is not a graph node");
        }
        if (edge.travel_time < 1) throw InvariantError(f + ".travel_time", "must be at least 1");
        if (!(edge.weight >= 0.0)) throw InvariantError(f + ".weight", "must be non-negative");
    }
    for (const std::string& d : inst.v2g.locations) {
        if (!nodes.count(d)) throw InvariantError("locations", "'" + d + "' is not a graph node");
    }
    for (const auto& [d, cap] : inst.ev_cap) {
        if (std::find(inst.v2g.locations.begin(), inst.v2g.locations.end(), d) ==
            inst.v2g.locations.end()) {
            throw InvariantError("ev_cap", "'" + d + "' is not a location");
        }
        if (cap < 0) throw InvariantError("ev_cap." + d, "must be non-negative");
    }
    const std::size_t n = inst.v2g.fleet.size();
    if (inst.c_tran.size() != n) {
        throw InvariantError("c_tran", "needs one entry per vehicle");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(inst.c_tran[i] >= 0.0)) {
            throw InvariantError("c_tran[" + std::to_string(i) + "]", "must be non-negative");
        }
    }
    if (inst.initial_location.size() != n) {
        throw InvariantError("initial_location", "needs one entry per vehicle");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!nodes.count(inst.initial_location[i])) {
            throw InvariantError("initial_location[" + std::to_string(i) + "]",
                                 "'" + inst.initial_location[i] + "' is not a graph node");
        }
    }
}

std::optional<int> shortest_travel_time(const TransportGraph& graph, const std::string& from,
                                        const std::string& to) {
    std::unordered_map<std::string, std::size_t> id;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) id.emplace(graph.nodes[i], i);
    auto src = id.find(from);
    auto dst = id.find(to);
    if (src == id.end()) throw InputError("unknown node '" + from + "'");
    if (dst == id.end()) throw InputError("unknown node '" + to + "'");

    std::vector<std::vector<std::pair<std::size_t, int>>> adj(graph.nodes.size());
    for (const Edge& e : graph.edges) {
        if (!e.available) continue;
        const std::size_t a = id.at(e.a);
        const std::size_t b = id.at(e.b);
        adj[a].emplace_back(b, e.travel_time);
        if (!e.directed) adj[b].emplace_back(a, e.travel_time);
    }
    constexpr long kInf = std::numeric_limits<long>::max();
    std::vector<long> dist(graph.nodes.size(), kInf);
    using Item = std::pair<long, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src->second] = 0;
    pq.emplace(0, src->second);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        if (u == dst->second) break;
        for (auto [v, w] : adj[u]) {
            if (d + w < dist[v]) {
                dist[v] = d + w;
                pq.emplace(dist[v], v);
            }
        }
    }
    if (dist[dst->second] == kInf) return std::nullopt;
    return static_cast<int>(dist[dst->second]);
}

TravelTable travel_table(const TransportGraph& graph, const std::vector<std::string>& locations) {
    TravelTable table(locations.size(), std::vector<std::optional<int>>(locations.size()));
    for (std::size_t a = 0; a < locations.size(); ++a) {
        for (std::size_t b = 0; b < locations.size(); ++b) {
            table[a][b] = shortest_travel_time(graph, locations[a], locations[b]);
        }
    }
    return table;
}

std::size_t expected_mobility_count(const CSPInstance& inst) {
    const TravelTable rt = travel_table(inst.graph, inst.v2g.locations);
    const int T = horizon_of(inst);
    std::size_t count = 0;
    for (std::size_t i = 0; i < inst.v2g.fleet.size(); ++i) {
        for (std::size_t a = 0; a < rt.size(); ++a) {
            for (std::size_t b = 0; b < rt.size(); ++b) {
                if (a == b) continue;
                const int r = rt[a][b] ? *rt[a][b] : T;
                for (int t = 0; t < T; ++t) count += static_cast<std::size_t>(std::min(r, T - 1 - t));
            }
        }
    }
    return count;
}

StructuredModel add_mobility_constraints(StructuredModel m, const CSPInstance& inst) {
    const V2GInstance& v2g = inst.v2g;
    const std::vector<std::string>& D = v2g.locations;
    const int T = horizon_of(inst);
    const TravelTable rt = travel_table(inst.graph, D);

    for (const auto& [d, cap] : inst.ev_cap) {
        for (int t = 0; t < T; ++t) {
            Constraint c;
            c.cls = ConstraintClass::capacity;
            c.label = names::capacity(d, t);
            c.relation = Relation::le;
            c.rhs = cap;
            for (const VehicleSpec& v : v2g.fleet) c.terms.push_back({m.index(names::z(v.id, t, d)), 1.0});
            m.add_constraint(std::move(c));
        }
    }

    for (std::size_t i = 0; i < v2g.fleet.size(); ++i) {
        const std::string& vid = v2g.fleet[i].id;
        const std::string& init = inst.initial_location[i];

        for (std::size_t a = 0; a < D.size(); ++a) {
            for (std::size_t b = 0; b < D.size(); ++b) {
                if (a == b) continue;
                const int r = rt[a][b] ? *rt[a][b] : T;
                for (int t = 0; t < T; ++t) {
                    for (int tau = 1; tau <= r && t + tau <= T - 1; ++tau) {
                        Constraint c;
                        c.cls = ConstraintClass::mobility;
                        c.label = names::mobility(vid, t, D[a], t + tau, D[b]);
                        c.relation = Relation::le;
                        c.rhs = 1.0;
                        c.terms = {{m.index(names::z(vid, t, D[a])), 1.0},
                                   {m.index(names::z(vid, t + tau, D[b])), 1.0}};
                        m.add_constraint(std::move(c));
                    }
                }
            }
        }

        // Initial location acts as a presence just before step 0.
        for (std::size_t d = 0; d < D.size(); ++d) {
            if (D[d] == init) continue;
            const std::optional<int> r = shortest_travel_time(inst.graph, init, D[d]);
            const int earliest = r ? *r : T;
            for (int t = 0; t < std::min(earliest, T); ++t) {
                m.set_bounds(m.index(names::z(vid, t, D[d])), 0.0, 0.0);
            }
        }

        std::vector<std::vector<std::size_t>> tr(static_cast<std::size_t>(std::max(T - 1, 0)));
        for (int t = 0; t + 1 < T; ++t) {
            for (std::size_t e = 0; e < inst.graph.edges.size(); ++e) {
                const std::size_t var = m.add_binary(names::traversal(vid, e, t));
                if (!inst.graph.edges[e].available) m.set_bounds(var, 0.0, 0.0);
                tr[t].push_back(var);
            }
        }
        auto add_traversals = [&](Constraint& c, int from, int to) {
            for (int s = from; s < to; ++s) {
                for (std::size_t var : tr[s]) c.terms.push_back({var, 1.0});
            }
        };
        for (int t1 = 0; t1 < T; ++t1) {
            for (int t2 = t1 + 1; t2 < T; ++t2) {
                for (std::size_t a = 0; a < D.size(); ++a) {
                    for (std::size_t b = 0; b < D.size(); ++b) {
                        if (a == b) continue;
                        Constraint c;
                        c.cls = ConstraintClass::traversal_link;
                        c.label = link_label(vid, t1, D[a], t2, D[b]);
                        c.relation = Relation::ge;
                        c.rhs = -1.0;
                        add_traversals(c, t1, t2);
                        c.terms.push_back({m.index(names::z(vid, t1, D[a])), -1.0});
                        c.terms.push_back({m.index(names::z(vid, t2, D[b])), -1.0});
                        m.add_constraint(std::move(c));
                    }
                }
            }
        }
        for (int t = 1; t < T; ++t) {
            for (const std::string& d : D) {
                if (d == init) continue;
                Constraint c;
                c.cls = ConstraintClass::traversal_link;
                c.label = link_label(vid, -1, init, t, d);
                c.relation = Relation::ge;
                c.rhs = 0.0;
                add_traversals(c, 0, t);
                c.terms.push_back({m.index(names::z(vid, t, d)), -1.0});
                m.add_constraint(std::move(c));
            }
        }
    }
    return m;
}

StructuredModel build_csp_model(const CSPInstance& inst, const ModelOptions& opts) {
    validate(inst);
    const detail::LocatedLayout layout{.located_charging = true};
    StructuredModel m = detail::build_located_core(inst.v2g, opts, layout);
    detail::add_unserved_cost(m, inst.v2g, 1.0);
    detail::add_generation_cost(m, inst.v2g, 1.0, opts);
    const double dt = inst.v2g.grid.step_hours;
    for (const VehicleSpec& v : inst.v2g.fleet) {
        if (v.battery_cost == 0.0) continue;
        for (int t = 0; t < inst.v2g.grid.horizon_steps; ++t) {
            for (const std::string& d : inst.v2g.locations) {
                m.add_objective(m.index(names::pch(v.id, t, d)), v.battery_cost * dt);
                m.add_objective(m.index(names::pdis(v.id, t, d)), v.battery_cost * dt);
            }
        }
    }
    m = add_mobility_constraints(std::move(m), inst);
    for (std::size_t i = 0; i < inst.v2g.fleet.size(); ++i) {
        const std::string& vid = inst.v2g.fleet[i].id;
        for (int t = 0; t + 1 < inst.v2g.grid.horizon_steps; ++t) {
            for (std::size_t e = 0; e < inst.graph.edges.size(); ++e) {
                const double c = inst.c_tran[i] * inst.graph.edges[e].weight;
                if (c != 0.0) m.add_objective(m.index(names::traversal(vid, e, t)), c);
            }
        }
    }
    return m;
}

ValidationReport validate_route_plan(const CSPInstance& inst, const RoutePlan& plan) {
    const V2GInstance& v2g = inst.v2g;
    const std::vector<std::string>& D = v2g.locations;
    const int T = horizon_of(inst);
    if (plan.routes.size() != v2g.fleet.size()) {
        throw InputError("route plan has " + std::to_string(plan.routes.size()) +
                         " routes for a fleet of " + std::to_string(v2g.fleet.size()));
    }
    const TravelTable rt = travel_table(inst.graph, D);
    auto loc_index = [&](const std::string& d) -> std::optional<std::size_t> {
        auto it = std::find(D.begin(), D.end(), d);
        if (it == D.end()) return std::nullopt;
        return static_cast<std::size_t>(it - D.begin());
    };

    ValidationReport report;
    std::map<std::pair<std::string, int>, int> occupancy;

    for (std::size_t i = 0; i < plan.routes.size(); ++i) {
        const VehicleRoute& route = plan.routes[i];
        std::vector<Presence> valid;
        std::set<int> seen_steps;
        for (const Presence& p : route.presence) {
            if (p.t < 0 || p.t >= T) {
                report.inconsistencies.push_back({i, p.t, p.location, "presence outside horizon"});
                continue;
            }
            if (!loc_index(p.location)) {
                report.inconsistencies.push_back({i, p.t, p.location, "unknown location"});
                continue;
            }
            if (!seen_steps.insert(p.t).second) {
                report.inconsistencies.push_back({i, p.t, p.location, "multiple locations in one step"});
            }
            valid.push_back(p);
        }
        std::sort(valid.begin(), valid.end(), [](const Presence& a, const Presence& b) {
            return a.t != b.t ? a.t < b.t : a.location < b.location;
        });
        if (v2g.fleet[i].available) {
            for (const Presence& p : valid) ++occupancy[{p.location, p.t}];
        } else {
            for (const Presence& p : valid) {
                report.inconsistencies.push_back({i, p.t, p.location, "unavailable vehicle present"});
                ++occupancy[{p.location, p.t}];
            }
        }

        std::vector<int> traversals_at(static_cast<std::size_t>(T), 0);
        for (const Traversal& tr : route.traversals) {
            if (tr.edge >= inst.graph.edges.size()) {
                report.inconsistencies.push_back({i, tr.t, "", "traversal over unknown edge"});
                continue;
            }
            if (!inst.graph.edges[tr.edge].available) {
                report.inconsistencies.push_back({i, tr.t, "", "traversal over closed edge"});
                continue;
            }
            if (tr.t < 0 || tr.t + 1 >= T) {
                report.inconsistencies.push_back({i, tr.t, "", "traversal outside horizon"});
                continue;
            }
            ++traversals_at[tr.t];
        }
        auto traversed = [&](int from, int to) {
            for (int s = std::max(from, 0); s < to; ++s) {
                if (traversals_at[s] > 0) return true;
            }
            return false;
        };

        const std::string& init = inst.initial_location[i];
        for (const Presence& p : valid) {
            if (p.location == init) continue;
            const std::optional<int> r = shortest_travel_time(inst.graph, init, p.location);
            if (p.t < (r ? *r : T)) report.travel.push_back({i, -1, init, p.t, p.location});
            if (p.t >= 1 && !traversed(0, p.t)) {
                report.inconsistencies.push_back({i, p.t, p.location, "relocation without traversal"});
            }
        }
        for (std::size_t a = 0; a < valid.size(); ++a) {
            for (std::size_t b = 0; b < valid.size(); ++b) {
                const Presence& p = valid[a];
                const Presence& q = valid[b];
                if (q.t <= p.t || p.location == q.location) continue;
                const auto& r = rt[*loc_index(p.location)][*loc_index(q.location)];
                if (q.t - p.t <= (r ? *r : T)) {
                    report.travel.push_back({i, p.t, p.location, q.t, q.location});
                }
                if (!traversed(p.t, q.t)) {
                    report.inconsistencies.push_back({i, q.t, q.location, "relocation without traversal"});
                }
            }
        }
    }

    for (const auto& [key, count] : occupancy) {
        auto cap = inst.ev_cap.find(key.first);
        if (cap != inst.ev_cap.end() && count > cap->second) {
            report.capacity.push_back({key.first, key.second, count, cap->second});
        }
    }
    return report;
}

Assignment plan_to_assignment(const StructuredModel& model, const CSPInstance& inst,
                              const RoutePlan& plan) {
    std::vector<double> values(model.num_variables());
    for (std::size_t k = 0; k < model.num_variables(); ++k) values[k] = model.variable(k).lo;
    for (const VehicleSpec& v : inst.v2g.fleet) {
        for (int t = 0; t <= inst.v2g.grid.horizon_steps; ++t) {
            if (auto s = model.find(names::soc(v.id, t))) values[*s] = v.soc_init;
        }
    }
    for (std::size_t i = 0; i < plan.routes.size() && i < inst.v2g.fleet.size(); ++i) {
        const std::string& vid = inst.v2g.fleet[i].id;
        for (const Presence& p : plan.routes[i].presence) {
            if (auto z = model.find(names::z(vid, p.t, p.location))) values[*z] = 1.0;
        }
        for (const Traversal& tr : plan.routes[i].traversals) {
            if (auto var = model.find(names::traversal(vid, tr.edge, tr.t))) values[*var] = 1.0;
        }
    }
    return to_assignment(model, values);
}

}  // namespace v2gq
