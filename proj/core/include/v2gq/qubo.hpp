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
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "v2gq/model.hpp"
#include "v2gq/v2g.hpp"

namespace v2gq {

using Bits = std::vector<std::uint8_t>;

/// One-hot discretization of a bounded continuous value. Level 0 has no bit:
/// the all-zero group decodes to `offset`, bit k-1 set decodes to offset + step*k.
struct OneHotEncoding {
    int levels = 2;
    double step = 1.0;
    double offset = 0.0;
    std::vector<std::string> bit_names;  // levels - 1 names

    double value(int level) const { return offset + step * level; }
    double max_value() const { return value(levels - 1); }
    /// Level whose value equals v within `tol`; nullopt when v is not representable.
    std::optional<int> level_of(double v, double tol = 1e-9) const;
};

/// step = p_max / K, levels {0, h, ..., (K-1)h}. p_max itself is not representable.
OneHotEncoding make_power_encoding(double p_max, int K, const std::string& name = "p");
/// offset = soc_min, step = (soc_max - soc_min) / (K_soc - 1) so both bounds are levels.
OneHotEncoding make_soc_encoding(const VehicleSpec& vehicle, int K_soc,
                                 const std::string& name = "soc");
/// Both ends representable: offset = lo, step = (hi - lo) / (levels - 1).
OneHotEncoding make_range_encoding(double lo, double hi, int levels, const std::string& name);

/// Bits of `enc` representing level k (one-hot, level 0 all zero).
Bits encode_level(const OneHotEncoding& enc, int level);
/// Value decoded from a one-hot group, lowest set level winning on multi-hot.
double decode_group(const OneHotEncoding& enc, std::span<const std::uint8_t> group,
                    bool* multi_hot = nullptr);

struct DiscretizationLevels {
    int K = 2;      // power levels
    int K_soc = 2;  // state-of-charge levels
    int J = 2;      // generation levels
};

/// Encoding per model variable: nullopt for binaries and fixed variables.
struct EncodingTable {
    std::vector<std::optional<OneHotEncoding>> by_var;
};

/// Default encodings from variable roles: power with K (h = hi / K), SOC with
/// K_soc over [lo, hi], generation with J (h = hi / J). Variables listed in
/// `overrides` take the given encoding. Throws InputError naming a continuous
/// variable whose role has no default.
EncodingTable plan_encodings(const StructuredModel& model, const DiscretizationLevels& levels,
                             const std::map<std::string, OneHotEncoding>& overrides = {});

std::size_t encoded_bit_count(const StructuredModel& model, const EncodingTable& enc);

enum class InequalityMode { slack_bits, paper_verbatim };

std::string_view to_string(InequalityMode m);
std::optional<InequalityMode> inequality_mode_from_string(std::string_view s);

struct PenaltyConfig {
    InequalityMode mode = InequalityMode::slack_bits;
    /// Automatic weights are lambda_scale * dominance bound (divided by the
    /// squared residual granularity for squared penalties).
    double lambda_scale = 2.0;
    /// Explicit weights per constraint class, used verbatim.
    std::map<ConstraintClass, double> class_weight;
    std::optional<double> one_hot_weight;
    std::optional<double> exclusion_weight;
};

/// Upper-triangular QUBO: energy(b) = sum_{i<=j} Q_ij b_i b_j + offset.
struct QuboProblem {
    std::size_t num_bits = 0;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> coefficients;
    double offset = 0.0;

    /// Accumulates into (min(i,j), max(i,j)).
    void add(std::uint32_t i, std::uint32_t j, double value);
};

/// Sum in sorted (i, j) order, then the offset. Throws InputError on length mismatch.
double qubo_energy(const QuboProblem& q, std::span<const std::uint8_t> bits);

/// `#bits N offset C` header, then `i j value` per coefficient, full precision.
void write_qubo(std::ostream& os, const QuboProblem& q);
QuboProblem read_qubo(std::istream& is);

struct VariableBinding {
    enum class Kind { fixed, binary, encoded };
    Kind kind = Kind::fixed;
    double fixed_value = 0.0;
    std::optional<OneHotEncoding> encoding;
    std::vector<std::uint32_t> bits;  // binary: 1 bit; encoded: levels - 1 bits
};

struct SlackBinding {
    std::size_t constraint;
    OneHotEncoding encoding;
    std::vector<std::uint32_t> bits;
};

struct VariableMap {
    std::vector<std::string> var_names;
    std::vector<VariableBinding> vars;  // model variable order
    std::vector<SlackBinding> slacks;
    std::vector<std::string> bit_names;
};

/// A quadratic fragment of the QUBO attributable to one source.
struct Fragment {
    std::vector<std::pair<std::pair<std::uint32_t, std::uint32_t>, double>> coefficients;
    double offset = 0.0;

    double energy(std::span<const std::uint8_t> bits) const;
};

struct PenaltyTerm {
    enum class Source { constraint, one_hot, slack_one_hot, exclusion };
    enum class Form { squared, slack_squared, indicator, pairwise, skipped, one_hot };
    Source source = Source::constraint;
    Form form = Form::squared;
    std::size_t index = 0;  // constraint, variable, slack or exclusion index
    std::string label;
    double weight = 0.0;
    Fragment fragment;
};

struct TranspiledModel {
    QuboProblem qubo;
    VariableMap map;
    Fragment objective;
    std::vector<PenaltyTerm> penalties;
    double dominance_bound = 0.0;
};

/// Objective-range bound: 1 + sum |c_j| * (value of v_j's bit expansion with every bit set).
double dominance_bound(const StructuredModel& model, const EncodingTable& enc);

/// Largest g such that every attainable residual of `c` under the encodings is
/// an integer multiple of g. Floored at 1e-6 times the largest magnitude.
double residual_granularity(const StructuredModel& model, const EncodingTable& enc,
                            const Constraint& c);

TranspiledModel transpile(const StructuredModel& model, const PenaltyConfig& config,
                          const EncodingTable& enc);

struct DecodeResult {
    Assignment assignment;
    std::vector<std::string> multi_hot;  // variables whose group had several bits set
};

DecodeResult decode(std::span<const std::uint8_t> bits, const VariableMap& map);

/// Bits of a model assignment. Throws InputError when a value is not representable.
Bits encode_assignment(const StructuredModel& model, const TranspiledModel& t,
                       const Assignment& a);

struct AuditEntry {
    std::string label;
    double energy = 0.0;
    bool satisfied = true;  // constraint entries: original constraint holds on the decode
};

struct AuditReport {
    std::vector<AuditEntry> entries;
    double objective = 0.0;  // model objective at the decoded assignment
    double qubo_energy = 0.0;
    double total_penalty = 0.0;  // sum of entry energies
    bool feasible = false;       // decoded assignment satisfies the model
};

/// Per-penalty energy on `bits`. The one-hot entry of a variable also carries
/// the objective excess of its multi-hot group over the decoded value, so
/// qubo_energy == objective + total_penalty for every bitstring.
AuditReport penalty_audit(const StructuredModel& model, const TranspiledModel& t,
                          std::span<const std::uint8_t> bits);

}  // namespace v2gq
