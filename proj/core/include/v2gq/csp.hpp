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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "v2gq/model.hpp"
#include "v2gq/v2g.hpp"

namespace v2gq {

struct Edge {
    std::string a;
    std::string b;
    int travel_time = 1;  // whole timesteps
    double weight = 1.0;  // multiplies the per-traversal transport cost
    bool directed = false;
    bool available = true;  // false: closed (scenario outage)

    bool operator==(const Edge&) const = default;
};

struct TransportGraph {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;

    bool has_node(const std::string& n) const;

    bool operator==(const TransportGraph&) const = default;
};

struct CSPInstance {
    V2GInstance v2g;
    TransportGraph graph;
    std::map<std::string, int> ev_cap;         // absent location: unbounded
    std::vector<double> c_tran;                // $ per traversal, per vehicle
    std::vector<std::string> initial_location;  // per vehicle

    bool operator==(const CSPInstance&) const = default;
};

void validate(const CSPInstance& instance);

/// Minimum total travel time from `from` to `to` in whole steps; nullopt when
/// unreachable. Throws InputError for unknown nodes.
std::optional<int> shortest_travel_time(const TransportGraph& graph, const std::string& from,
                                        const std::string& to);

/// rt[d1][d2] over the instance locations (D order).
using TravelTable = std::vector<std::vector<std::optional<int>>>;
TravelTable travel_table(const TransportGraph& graph, const std::vector<std::string>& locations);

namespace names {
std::string traversal(const std::string& vehicle, std::size_t edge, int t);
std::string capacity(const std::string& loc, int t);
std::string mobility(const std::string& vehicle, int t1, const std::string& d1, int t2,
                     const std::string& d2);
}  // namespace names

/// Contingency terms plus battery-use and transport costs, all V2G constraints
/// with per-location charging, and the mobility constraints.
StructuredModel build_csp_model(const CSPInstance& instance, const ModelOptions& opts = {});

/// EV capacity per (location, step), travel-time exclusions, traversal links
/// and initial-location reachability. Requires the z binaries to exist.
StructuredModel add_mobility_constraints(StructuredModel model, const CSPInstance& instance);

/// Number of travel-time exclusions add_mobility_constraints emits.
std::size_t expected_mobility_count(const CSPInstance& instance);

struct Presence {
    int t = 0;
    std::string location;
};

struct Traversal {
    int t = 0;          // step in which the traversal starts
    std::size_t edge = 0;  // index into graph.edges
};

struct VehicleRoute {
    std::vector<Presence> presence;
    std::vector<Traversal> traversals;
};

/// One route per vehicle, in fleet order.
struct RoutePlan {
    std::vector<VehicleRoute> routes;
};

struct CapacityViolation {
    std::string location;
    int t;
    int count;
    int cap;
};

/// Presence at (t1, d1) followed by presence at (t2, d2) sooner than the
/// travel time allows. t1 = -1 marks the initial location.
struct TravelViolation {
    std::size_t vehicle;
    int t1;
    std::string d1;
    int t2;
    std::string d2;
};

struct Inconsistency {
    std::size_t vehicle;
    int t;
    std::string location;
    std::string what;
};

struct ValidationReport {
    std::vector<CapacityViolation> capacity;
    std::vector<TravelViolation> travel;
    std::vector<Inconsistency> inconsistencies;

    bool ok() const { return capacity.empty() && travel.empty() && inconsistencies.empty(); }
};

ValidationReport validate_route_plan(const CSPInstance& instance, const RoutePlan& plan);

/// Assignment with z and traversal binaries taken from the plan and every
/// other variable of `model` at its lower bound.
Assignment plan_to_assignment(const StructuredModel& model, const CSPInstance& instance,
                              const RoutePlan& plan);

}  // namespace v2gq
