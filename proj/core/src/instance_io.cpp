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

#include "v2gq/instance_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "v2gq/error.hpp"

namespace v2gq {

using json = nlohmann::ordered_json;

namespace {

int line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

json parse_json(std::string_view text, const std::string& source) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        std::string what = e.what();
        if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
        throw ParseError(source + ":" + std::to_string(line_of(text, at)) + ": " + what);
    }
}

/// Field access with the dotted path kept for error messages.
class Node {
  public:
    Node(const json& j, std::string path, const std::string& source)
            : j_(j), path_(std::move(path)), source_(source) {}

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    Node at(const char* key) const {
        if (!j_.is_object()) fail("expected an object");
        if (!j_.contains(key)) {
            throw ParseError(source_ + ": missing field '" + child_path(key) + "'");
        }
        return Node(j_.at(key), child_path(key), source_);
    }

    Node at(std::size_t i) const {
        return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]", source_);
    }

    std::size_t size() const {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }

    double number() const {
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }

    int integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<int>();
    }

    bool boolean() const {
        if (!j_.is_boolean()) fail("expected true or false");
        return j_.get<bool>();
    }

    std::string string() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }

    bool is_null() const { return j_.is_null(); }

    double number_or(const char* key, double fallback) const {
        return has(key) ? at(key).number() : fallback;
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
        return out;
    }

    std::vector<std::string> strings() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).string());
        return out;
    }

    StepTable table() const {
        StepTable out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).numbers());
        return out;
    }

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }
    const std::string& source() const { return source_; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(source_ + ": field '" + path_ + "': " + msg);
    }

  private:
    std::string child_path(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    const json& j_;
    std::string path_;
    const std::string& source_;
};

ObjectiveMode parse_mode(const Node& n) {
    const std::string s = n.string();
    if (s == "cost") return ObjectiveMode::cost;
    if (s == "contingency") return ObjectiveMode::contingency;
    if (s == "weighted") return ObjectiveMode::weighted;
    n.fail("unknown objective mode '" + s + "'");
}

std::string_view mode_name(ObjectiveMode m) {
    switch (m) {
        case ObjectiveMode::cost: return "cost";
        case ObjectiveMode::contingency: return "contingency";
        case ObjectiveMode::weighted: return "weighted";
    }
    return "cost";
}

V2GInstance read_v2g(const Node& root) {
    V2GInstance inst;
    const Node time = root.at("time");
    inst.grid.horizon_steps = time.at("horizon_steps").integer();
    inst.grid.step_hours = time.at("step_hours").number();
    if (root.has("locations")) inst.locations = root.at("locations").strings();

    const Node fleet = root.at("fleet");
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const Node v = fleet.at(i);
        VehicleSpec s;
        s.id = v.at("id").string();
        s.p_ch_max = v.at("p_ch_max").number();
        s.p_dis_max = v.at("p_dis_max").number();
        s.eta_ch = v.at("eta_ch").number();
        s.eta_dis = v.at("eta_dis").number();
        s.soc_min = v.at("soc_min").number();
        s.soc_max = v.at("soc_max").number();
        s.soc_init = v.at("soc_init").number();
        s.q_dis_ratio = v.number_or("q_dis_ratio", 0.0);
        s.battery_cost = v.number_or("battery_cost", 0.0);
        if (v.has("available")) s.available = v.at("available").boolean();
        inst.fleet.push_back(std::move(s));
    }

    const Node prices = root.at("prices");
    inst.prices.r_ch = prices.at("r_ch").numbers();
    inst.prices.r_dis = prices.at("r_dis").numbers();

    if (root.has("limits")) {
        const Node lim = root.at("limits");
        GridLimits& g = inst.limits;
        if (lim.has("p_gen")) g.p_gen = lim.at("p_gen").table();
        if (lim.has("p_gen_max")) g.p_gen_max = lim.at("p_gen_max").table();
        if (lim.has("p_demand")) g.p_demand = lim.at("p_demand").numbers();
        if (lim.has("sr_req")) g.sr_req = lim.at("sr_req").numbers();
        if (lim.has("p_line_max")) g.p_line_max = lim.at("p_line_max").number();
        if (lim.has("q_line_max")) g.q_line_max = lim.at("q_line_max").number();
        if (lim.has("c_crit")) g.c_crit = lim.at("c_crit").table();
        if (lim.has("c_gen")) g.c_gen = lim.at("c_gen").table();
        if (lim.has("p_crit")) g.p_crit = lim.at("p_crit").table();
    }

    if (root.has("objective")) {
        const Node obj = root.at("objective");
        inst.objective.mode = parse_mode(obj.at("mode"));
        inst.objective.w1 = obj.number_or("w1", 1.0);
        inst.objective.w2 = obj.number_or("w2", 0.0);
    }
    return inst;
}

CSPInstance read_csp(const Node& root) {
    CSPInstance inst;
    inst.v2g = read_v2g(root);
    const Node csp = root.at("csp");
    const Node graph = csp.at("graph");
    inst.graph.nodes = graph.at("nodes").strings();
    const Node edges = graph.at("edges");
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const Node n = edges.at(e);
        Edge edge;
        edge.a = n.at("a").string();
        edge.b = n.at("b").string();
        edge.travel_time = n.at("travel_time").integer();
        edge.weight = n.number_or("weight", 1.0);
        if (n.has("directed")) edge.directed = n.at("directed").boolean();
        if (n.has("available")) edge.available = n.at("available").boolean();
        inst.graph.edges.push_back(std::move(edge));
    }
    if (csp.has("ev_cap")) {
        const Node cap = csp.at("ev_cap");
        if (!cap.raw().is_object()) cap.fail("expected an object of location: count");
        for (const auto& [key, value] : cap.raw().items()) {
            Node item(value, cap.path() + "." + key, cap.source());
            inst.ev_cap[key] = item.integer();
        }
    }
    inst.c_tran = csp.at("c_tran").numbers();
    inst.initial_location = csp.at("initial_location").strings();
    return inst;
}

/// Every location reachable from every other over open edges, ignoring direction.
void check_connected(const CSPInstance& inst) {
    const auto& nodes = inst.graph.nodes;
    if (nodes.empty()) throw InvariantError("csp.graph.nodes", "must not be empty");
    std::map<std::string, std::vector<std::string>> adj;
    for (const Edge& e : inst.graph.edges) {
        if (!e.available) continue;
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::set<std::string> seen{nodes.front()};
    std::queue<std::string> q;
    q.push(nodes.front());
    while (!q.empty()) {
        const std::string u = q.front();
        q.pop();
        for (const std::string& w : adj[u]) {
            if (seen.insert(w).second) q.push(w);
        }
    }
    for (const std::string& n : nodes) {
        if (!seen.count(n)) {
            throw InvariantError("csp.graph", "not connected: node '" + n + "' is unreachable");
        }
    }
}

ScenarioSet read_scenarios(const Node& n) {
    ScenarioSet set;
    set.w1 = n.number_or("w1", 1.0);
    set.w2 = n.number_or("w2", 0.0);
    if (n.has("first_stage_routing")) set.first_stage_routing = n.at("first_stage_routing").boolean();
    const Node list = n.at("list");
    for (std::size_t k = 0; k < list.size(); ++k) {
        const Node s = list.at(k);
        Scenario sc;
        sc.id = s.at("id").string();
        sc.probability = s.at("probability").number();
        ScenarioOverrides& o = sc.overrides;
        auto td = [](const Node& item) {
            const int d = item.at("d").integer();
            if (d < 0) item.fail("negative location index");
            return std::pair<int, std::size_t>{item.at("t").integer(), static_cast<std::size_t>(d)};
        };
        if (s.has("p_crit")) {
            const Node a = s.at("p_crit");
            for (std::size_t i = 0; i < a.size(); ++i) o.p_crit[td(a.at(i))] = a.at(i).at("value").number();
        }
        if (s.has("p_gen")) {
            const Node a = s.at("p_gen");
            for (std::size_t i = 0; i < a.size(); ++i) o.p_gen[td(a.at(i))] = a.at(i).at("value").number();
        }
        if (s.has("p_demand")) {
            const Node a = s.at("p_demand");
            for (std::size_t i = 0; i < a.size(); ++i) {
                o.p_demand[a.at(i).at("t").integer()] = a.at(i).at("value").number();
            }
        }
        if (s.has("edges")) {
            const Node a = s.at("edges");
            for (std::size_t i = 0; i < a.size(); ++i) {
                const int e = a.at(i).at("edge").integer();
                if (e < 0) a.at(i).fail("negative edge index");
                const Node tt = a.at(i).at("travel_time");
                o.edge_travel_time[static_cast<std::size_t>(e)] =
                        tt.is_null() ? std::nullopt : std::optional<int>(tt.integer());
            }
        }
        if (s.has("vehicle_available")) {
            const Node a = s.at("vehicle_available");
            for (std::size_t i = 0; i < a.size(); ++i) {
                const int v = a.at(i).at("vehicle").integer();
                if (v < 0) a.at(i).fail("negative vehicle index");
                o.vehicle_available[static_cast<std::size_t>(v)] = a.at(i).at("available").boolean();
            }
        }
        set.scenarios.push_back(std::move(sc));
    }
    return set;
}

json write_table(const StepTable& t) {
    json out = json::array();
    for (const auto& row : t) out.push_back(row);
    return out;
}

void write_v2g(json& root, const V2GInstance& inst) {
    root["time"] = {{"horizon_steps", inst.grid.horizon_steps}, {"step_hours", inst.grid.step_hours}};
    root["locations"] = inst.locations;
    json fleet = json::array();
    for (const VehicleSpec& v : inst.fleet) {
        fleet.push_back({{"id", v.id},
                         {"p_ch_max", v.p_ch_max},
                         {"p_dis_max", v.p_dis_max},
                         {"eta_ch", v.eta_ch},
                         {"eta_dis", v.eta_dis},
                         {"soc_min", v.soc_min},
                         {"soc_max", v.soc_max},
                         {"soc_init", v.soc_init},
                         {"q_dis_ratio", v.q_dis_ratio},
                         {"battery_cost", v.battery_cost},
                         {"available", v.available}});
    }
    root["fleet"] = fleet;
    root["prices"] = {{"r_ch", inst.prices.r_ch}, {"r_dis", inst.prices.r_dis}};
    const GridLimits& g = inst.limits;
    json lim = json::object();
    if (!g.p_gen.empty()) lim["p_gen"] = write_table(g.p_gen);
    if (!g.p_gen_max.empty()) lim["p_gen_max"] = write_table(g.p_gen_max);
    if (!g.p_demand.empty()) lim["p_demand"] = g.p_demand;
    if (!g.sr_req.empty()) lim["sr_req"] = g.sr_req;
    if (std::isfinite(g.p_line_max)) lim["p_line_max"] = g.p_line_max;
    if (std::isfinite(g.q_line_max)) lim["q_line_max"] = g.q_line_max;
    if (!g.c_crit.empty()) lim["c_crit"] = write_table(g.c_crit);
    if (!g.c_gen.empty()) lim["c_gen"] = write_table(g.c_gen);
    if (!g.p_crit.empty()) lim["p_crit"] = write_table(g.p_crit);
    root["limits"] = lim;
    root["objective"] = {{"mode", mode_name(inst.objective.mode)},
                         {"w1", inst.objective.w1},
                         {"w2", inst.objective.w2}};
}

void write_csp(json& root, const CSPInstance& inst) {
    write_v2g(root, inst.v2g);
    json edges = json::array();
    for (const Edge& e : inst.graph.edges) {
        edges.push_back({{"a", e.a},
                         {"b", e.b},
                         {"travel_time", e.travel_time},
                         {"weight", e.weight},
                         {"directed", e.directed},
                         {"available", e.available}});
    }
    json cap = json::object();
    for (const auto& [d, c] : inst.ev_cap) cap[d] = c;
    root["csp"] = {{"graph", {{"nodes", inst.graph.nodes}, {"edges", edges}}},
                   {"ev_cap", cap},
                   {"c_tran", inst.c_tran},
                   {"initial_location", inst.initial_location}};
}

json write_scenarios(const ScenarioSet& set) {
    json list = json::array();
    for (const Scenario& s : set.scenarios) {
        json j = {{"id", s.id}, {"probability", s.probability}};
        const ScenarioOverrides& o = s.overrides;
        auto td_list = [](const std::map<std::pair<int, std::size_t>, double>& m) {
            json a = json::array();
            for (const auto& [k, v] : m) a.push_back({{"t", k.first}, {"d", k.second}, {"value", v}});
            return a;
        };
        if (!o.p_crit.empty()) j["p_crit"] = td_list(o.p_crit);
        if (!o.p_gen.empty()) j["p_gen"] = td_list(o.p_gen);
        if (!o.p_demand.empty()) {
            json a = json::array();
            for (const auto& [t, v] : o.p_demand) a.push_back({{"t", t}, {"value", v}});
            j["p_demand"] = a;
        }
        if (!o.edge_travel_time.empty()) {
            json a = json::array();
            for (const auto& [e, tt] : o.edge_travel_time) {
                a.push_back({{"edge", e}, {"travel_time", tt ? json(*tt) : json(nullptr)}});
            }
            j["edges"] = a;
        }
        if (!o.vehicle_available.empty()) {
            json a = json::array();
            for (const auto& [v, av] : o.vehicle_available) a.push_back({{"vehicle", v}, {"available", av}});
            j["vehicle_available"] = a;
        }
        list.push_back(std::move(j));
    }
    return {{"w1", set.w1}, {"w2", set.w2}, {"first_stage_routing", set.first_stage_routing},
            {"list", list}};
}

}  // namespace

const V2GInstance& Instance::v2g() const {
    if (const auto* c = std::get_if<CSPInstance>(&data)) return c->v2g;
    return std::get<V2GInstance>(data);
}

const CSPInstance& Instance::csp() const {
    if (const auto* c = std::get_if<CSPInstance>(&data)) return *c;
    throw InputError("instance is not a CSP instance");
}

Instance parse_instance(std::string_view text, const std::string& source) {
    const json j = parse_json(text, source);
    const Node root(j, "", source);
    if (!j.is_object()) root.fail("top level must be an object");
    const int version = root.at("schema_version").integer();
    if (version != kSchemaVersion) {
        throw ParseError(source + ": unsupported schema_version " + std::to_string(version) +
                         " (expected " + std::to_string(kSchemaVersion) + ")");
    }
    const std::string kind = root.at("kind").string();
    Instance inst;
    if (kind == "v2g") {
        inst.data = read_v2g(root);
        validate(std::get<V2GInstance>(inst.data));
    } else if (kind == "csp") {
        CSPInstance c = read_csp(root);
        validate(c);
        check_connected(c);
        inst.data = std::move(c);
    } else {
        root.at("kind").fail("expected 'v2g' or 'csp'");
    }
    if (root.has("scenarios")) {
        inst.scenarios = read_scenarios(root.at("scenarios"));
        validate(*inst.scenarios);
    }
    return inst;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Instance load_instance(const std::filesystem::path& path) {
    return parse_instance(read_text_file(path), path.string());
}

std::string serialize_instance(const Instance& instance) {
    json root;
    root["schema_version"] = kSchemaVersion;
    if (instance.is_csp()) {
        root["kind"] = "csp";
        write_csp(root, instance.csp());
    } else {
        root["kind"] = "v2g";
        write_v2g(root, instance.v2g());
    }
    if (instance.scenarios) root["scenarios"] = write_scenarios(*instance.scenarios);
    return root.dump(2) + "\n";
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
    write_text_file(path, serialize_instance(instance));
}

StructuredModel build_instance_model(const Instance& instance, const ModelOptions& opts) {
    if (instance.is_csp()) {
        if (instance.scenarios) return build_stochastic_csp(instance.csp(), *instance.scenarios, opts);
        return build_csp_model(instance.csp(), opts);
    }
    if (instance.scenarios) return build_stochastic_v2g(instance.v2g(), *instance.scenarios, opts);
    return build_model(instance.v2g(), opts);
}

Assignment parse_assignment(std::string_view text, const std::string& source) {
    const json j = parse_json(text, source);
    if (!j.is_object()) throw ParseError(source + ": assignment must be an object of name: value");
    Assignment a;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw ParseError(source + ": value of '" + key + "' is not a number");
        a[key] = value.get<double>();
    }
    return a;
}

Assignment load_assignment(const std::filesystem::path& path) {
    return parse_assignment(read_text_file(path), path.string());
}

std::string serialize_assignment(const Assignment& a) {
    json j = json::object();
    for (const auto& [k, v] : a) j[k] = v;
    return j.dump(2) + "\n";
}

}  // namespace v2gq
