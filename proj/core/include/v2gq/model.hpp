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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace v2gq {

/// Feasibility tolerance applied to every constraint residual, in constraint units.
inline constexpr double kFeasibilityTolerance = 1e-6;

enum class VarKind { binary, continuous };

/// What a variable stands for. The transpiler picks default encodings from it.
enum class VarRole { binary, power, soc, generation, other };

enum class Relation { le, eq, ge };

/// Constraint families. Penalty weights and inequality handling are chosen per class.
enum class ConstraintClass {
    gate,            // P <= Pmax * x style indicator bounds
    soc_dynamics,    // state-of-charge recursion
    load_balance,    // generation + discharge >= demand + reserve
    connectivity,    // at most one location per vehicle and step
    line_limit,      // aggregate active / reactive line limits
    unserved,        // delivered power never exceeds the critical load
    capacity,        // EVs connectable per location
    mobility,        // travel-time exclusions
    traversal_link,  // relocations need a traversal record
    generic,
};

std::string_view to_string(ConstraintClass c);
std::optional<ConstraintClass> constraint_class_from_string(std::string_view s);
std::string_view to_string(Relation r);
std::string_view to_string(VarRole r);

struct Variable {
    std::string name;
    VarKind kind = VarKind::continuous;
    double lo = 0.0;
    double hi = 0.0;
    VarRole role = VarRole::other;

    bool fixed() const noexcept { return lo == hi; }
};

struct Term {
    std::size_t var;
    double coeff;
};

struct Constraint {
    std::vector<Term> terms;
    Relation relation = Relation::le;
    double rhs = 0.0;
    std::string label;
    ConstraintClass cls = ConstraintClass::generic;
};

/// Pair of binary variables whose product must be zero.
struct Exclusion {
    std::size_t a;
    std::size_t b;
    std::string label;
};

/// Solver-neutral linear model: typed variables, linear constraints, a linear
/// objective and a list of bilinear exclusions kept out of the linear part.
class StructuredModel {
  public:
    std::size_t add_variable(std::string name, VarKind kind, double lo, double hi,
                             VarRole role = VarRole::other);
    std::size_t add_binary(std::string name) {
        return add_variable(std::move(name), VarKind::binary, 0.0, 1.0, VarRole::binary);
    }

    void add_constraint(Constraint c);
    void add_exclusion(std::size_t a, std::size_t b, std::string label);

    void add_objective(std::size_t var, double coeff);
    void add_objective_constant(double c) { objective_constant_ += c; }
    void set_bounds(std::size_t var, double lo, double hi);

    std::size_t num_variables() const noexcept { return variables_.size(); }
    const std::vector<Variable>& variables() const noexcept { return variables_; }
    const Variable& variable(std::size_t i) const { return variables_.at(i); }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
    const std::vector<Exclusion>& exclusions() const noexcept { return exclusions_; }
    const std::vector<double>& objective() const noexcept { return objective_; }
    double objective_constant() const noexcept { return objective_constant_; }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws InputError naming the variable when it is not declared.
    std::size_t index(std::string_view name) const;

    /// Appends `part` with every variable renamed `prefix + name`, except names
    /// listed in `shared`, which are unified with an existing variable of the
    /// same name. The appended objective is scaled by `weight`.
    void append(const StructuredModel& part, const std::string& prefix, double weight,
                const std::vector<std::string>& shared = {});

  private:
    std::vector<Variable> variables_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::vector<Constraint> constraints_;
    std::vector<Exclusion> exclusions_;
    std::vector<double> objective_;
    double objective_constant_ = 0.0;
};

using Assignment = std::map<std::string, double>;

/// Dense values in model variable order. Throws InputError naming the first
/// variable missing from `a`.
std::vector<double> to_dense(const StructuredModel& model, const Assignment& a);
Assignment to_assignment(const StructuredModel& model, std::span<const double> values);

double constraint_lhs(const Constraint& c, std::span<const double> values);
/// Amount by which the constraint is violated (0 when satisfied).
double violation(const Constraint& c, double lhs);

struct ObjectiveReport {
    double objective = 0.0;
    std::vector<double> residuals;  // lhs - rhs per constraint, model order
    std::vector<std::string> violated;
    std::vector<std::string> exclusion_violations;
    std::vector<std::string> bound_violations;
    bool feasible = true;
};

double objective_value(const StructuredModel& model, std::span<const double> values);
ObjectiveReport evaluate(const StructuredModel& model, std::span<const double> values,
                         double tolerance = kFeasibilityTolerance);
ObjectiveReport evaluate(const StructuredModel& model, const Assignment& a,
                         double tolerance = kFeasibilityTolerance);

/// Human-readable dump used by the `build` subcommand.
std::string dump(const StructuredModel& model);

}  // namespace v2gq
