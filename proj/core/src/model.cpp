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

#include "v2gq/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "v2gq/error.hpp"

namespace v2gq {

namespace {

constexpr std::array<std::pair<ConstraintClass, std::string_view>, 10> kClassNames{{
        {ConstraintClass::gate, "gate"},
        {ConstraintClass::soc_dynamics, "soc_dynamics"},
        {ConstraintClass::load_balance, "load_balance"},
        {ConstraintClass::connectivity, "connectivity"},
        {ConstraintClass::line_limit, "line_limit"},
        {ConstraintClass::unserved, "unserved"},
        {ConstraintClass::capacity, "capacity"},
        {ConstraintClass::mobility, "mobility"},
        {ConstraintClass::traversal_link, "traversal_link"},
        {ConstraintClass::generic, "generic"},
}};

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string_view to_string(ConstraintClass c) {
    for (const auto& [k, name] : kClassNames) {
        if (k == c) return name;
    }
    return "generic";
}

std::optional<ConstraintClass> constraint_class_from_string(std::string_view s) {
    for (const auto& [k, name] : kClassNames) {
        if (name == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(Relation r) {
    switch (r) {
        case Relation::le: return "<=";
        case Relation::eq: return "=";
        case Relation::ge: return ">=";
    }
    return "?";
}

std::string_view to_string(VarRole r) {
    switch (r) {
        case VarRole::binary: return "binary";
        case VarRole::power: return "power";
        case VarRole::soc: return "soc";
        case VarRole::generation: return "generation";
        case VarRole::other: return "other";
    }
    return "other";
}

std::size_t StructuredModel::add_variable(std::string name, VarKind kind, double lo, double hi,
                                          VarRole role) {
    if (by_name_.count(name)) throw InputError("duplicate variable '" + name + "'");
    if (!(lo <= hi)) throw InputError("variable '" + name + "' has lo > hi");
    if (kind == VarKind::binary && (lo < 0.0 || hi > 1.0)) {
        throw InputError("binary variable '" + name + "' has bounds outside [0,1]");
    }
    const std::size_t idx = variables_.size();
    by_name_.emplace(name, idx);
    variables_.push_back(Variable{std::move(name), kind, lo, hi, role});
    objective_.push_back(0.0);
    return idx;
}

void StructuredModel::add_constraint(Constraint c) {
    for (const Term& t : c.terms) {
        if (t.var >= variables_.size()) {
            throw InputError("constraint '" + c.label + "' references an undeclared variable");
        }
    }
    constraints_.push_back(std::move(c));
}

void StructuredModel::add_exclusion(std::size_t a, std::size_t b, std::string label) {
    if (a >= variables_.size() || b >= variables_.size()) {
        throw InputError("exclusion '" + label + "' references an undeclared variable");
    }
    exclusions_.push_back(Exclusion{a, b, std::move(label)});
}

void StructuredModel::add_objective(std::size_t var, double coeff) {
    objective_.at(var) += coeff;
}

void StructuredModel::set_bounds(std::size_t var, double lo, double hi) {
    Variable& v = variables_.at(var);
    if (!(lo <= hi)) throw InputError("variable '" + v.name + "' has lo > hi");
    v.lo = lo;
    v.hi = hi;
}

std::optional<std::size_t> StructuredModel::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t StructuredModel::index(std::string_view name) const {
    auto idx = find(name);
    if (!idx) throw InputError("unknown variable '" + std::string(name) + "'");
    return *idx;
}

void StructuredModel::append(const StructuredModel& part, const std::string& prefix,
                             double weight, const std::vector<std::string>& shared) {
    std::vector<std::size_t> remap(part.num_variables());
    for (std::size_t i = 0; i < part.num_variables(); ++i) {
        const Variable& v = part.variables_[i];
        const bool is_shared = std::find(shared.begin(), shared.end(), v.name) != shared.end();
        if (is_shared) {
            if (auto existing = find(v.name)) {
                Variable& e = variables_[*existing];
                e.lo = std::max(e.lo, v.lo);
                e.hi = std::min(e.hi, v.hi);
                if (e.lo > e.hi) e.hi = e.lo;
                remap[i] = *existing;
                continue;
            }
            remap[i] = add_variable(v.name, v.kind, v.lo, v.hi, v.role);
        } else {
            remap[i] = add_variable(prefix + v.name, v.kind, v.lo, v.hi, v.role);
        }
    }
    for (const Constraint& c : part.constraints_) {
        Constraint copy = c;
        copy.label = prefix + c.label;
        for (Term& t : copy.terms) t.var = remap[t.var];
        constraints_.push_back(std::move(copy));
    }
    for (const Exclusion& e : part.exclusions_) {
        exclusions_.push_back(Exclusion{remap[e.a], remap[e.b], prefix + e.label});
    }
    for (std::size_t i = 0; i < part.num_variables(); ++i) {
        objective_[remap[i]] += weight * part.objective_[i];
    }
    objective_constant_ += weight * part.objective_constant_;
}

std::vector<double> to_dense(const StructuredModel& model, const Assignment& a) {
    std::vector<double> values(model.num_variables());
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        const std::string& name = model.variable(i).name;
        auto it = a.find(name);
        if (it == a.end()) throw InputError("assignment is missing variable '" + name + "'");
        values[i] = it->second;
    }
    return values;
}

Assignment to_assignment(const StructuredModel& model, std::span<const double> values) {
    Assignment a;
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        a.emplace(model.variable(i).name, values[i]);
    }
    return a;
}

double constraint_lhs(const Constraint& c, std::span<const double> values) {
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += t.coeff * values[t.var];
    return lhs;
}

double violation(const Constraint& c, double lhs) {
    const double r = lhs - c.rhs;
    switch (c.relation) {
        case Relation::le: return std::max(0.0, r);
        case Relation::ge: return std::max(0.0, -r);
        case Relation::eq: return std::abs(r);
    }
    return 0.0;
}

double objective_value(const StructuredModel& model, std::span<const double> values) {
    double obj = model.objective_constant();
    const auto& coeffs = model.objective();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] != 0.0) obj += coeffs[i] * values[i];
    }
    return obj;
}

ObjectiveReport evaluate(const StructuredModel& model, std::span<const double> values,
                         double tolerance) {
    if (values.size() != model.num_variables()) {
        throw InputError("assignment size does not match the model");
    }
    ObjectiveReport report;
    report.objective = objective_value(model, values);
    report.residuals.reserve(model.constraints().size());
    for (const Constraint& c : model.constraints()) {
        const double lhs = constraint_lhs(c, values);
        report.residuals.push_back(lhs - c.rhs);
        if (violation(c, lhs) > tolerance) report.violated.push_back(c.label);
    }
    for (const Exclusion& e : model.exclusions()) {
        if (std::abs(values[e.a] * values[e.b]) > tolerance) {
            report.exclusion_violations.push_back(e.label);
        }
    }
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        const Variable& v = model.variable(i);
        const double x = values[i];
        bool bad = x < v.lo - tolerance || x > v.hi + tolerance;
        if (v.kind == VarKind::binary && std::abs(x) > tolerance && std::abs(x - 1.0) > tolerance) {
            bad = true;
        }
        if (bad) report.bound_violations.push_back(v.name);
    }
    report.feasible = report.violated.empty() && report.exclusion_violations.empty() &&
                      report.bound_violations.empty();
    return report;
}

ObjectiveReport evaluate(const StructuredModel& model, const Assignment& a, double tolerance) {
    const std::vector<double> values = to_dense(model, a);
    return evaluate(model, std::span<const double>(values), tolerance);
}

std::string dump(const StructuredModel& model) {
    std::ostringstream os;
    os << "# variables " << model.num_variables() << "\n";
    for (const Variable& v : model.variables()) {
        os << v.name << ' ' << (v.kind == VarKind::binary ? "binary" : "continuous") << ' '
           << fmt_double(v.lo) << ' ' << fmt_double(v.hi) << ' ' << to_string(v.role) << "\n";
    }
    os << "# constraints " << model.constraints().size() << "\n";
    for (const Constraint& c : model.constraints()) {
        os << c.label << " [" << to_string(c.cls) << "]:";
        for (const Term& t : c.terms) {
            os << ' ' << fmt_double(t.coeff) << ' ' << model.variable(t.var).name;
        }
        os << ' ' << to_string(c.relation) << ' ' << fmt_double(c.rhs) << "\n";
    }
    os << "# exclusions " << model.exclusions().size() << "\n";
    for (const Exclusion& e : model.exclusions()) {
        os << e.label << ": " << model.variable(e.a).name << " * " << model.variable(e.b).name
           << " = 0\n";
    }
    os << "# objective\n";
    os << "constant " << fmt_double(model.objective_constant()) << "\n";
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        if (model.objective()[i] != 0.0) {
            os << model.variable(i).name << ' ' << fmt_double(model.objective()[i]) << "\n";
        }
    }
    return os.str();
}

}  // namespace v2gq
