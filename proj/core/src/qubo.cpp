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

#include "v2gq/qubo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "v2gq/error.hpp"

namespace v2gq {

namespace {

constexpr double kStructTol = 1e-9;

/// Affine form c0 + sum coef[bit] * b over QUBO bits.
struct BitLinear {
    double c0 = 0.0;
    std::map<std::uint32_t, double> coef;
};

/// Per-variable merged terms of a constraint.
std::map<std::size_t, double> merge_terms(const std::vector<Term>& terms) {
    std::map<std::size_t, double> merged;
    for (const Term& t : terms) merged[t.var] += t.coeff;
    for (auto it = merged.begin(); it != merged.end();) {
        it = it->second == 0.0 ? merged.erase(it) : std::next(it);
    }
    return merged;
}

BitLinear to_bits(const std::map<std::size_t, double>& merged, double rhs, const VariableMap& map) {
    BitLinear lin;
    lin.c0 = -rhs;
    for (const auto& [var, a] : merged) {
        const VariableBinding& b = map.vars[var];
        switch (b.kind) {
            case VariableBinding::Kind::fixed: lin.c0 += a * b.fixed_value; break;
            case VariableBinding::Kind::binary: lin.coef[b.bits[0]] += a; break;
            case VariableBinding::Kind::encoded:
                lin.c0 += a * b.encoding->offset;
                for (std::size_t k = 0; k < b.bits.size(); ++k) {
                    lin.coef[b.bits[k]] += a * b.encoding->step * static_cast<double>(k + 1);
                }
                break;
        }
    }
    return lin;
}

void scale(BitLinear& lin, double s) {
    lin.c0 *= s;
    for (auto& [bit, c] : lin.coef) c *= s;
}

/// Range of the form over one-hot-valid bit assignments.
std::pair<double, double> decoded_range(const std::map<std::size_t, double>& merged, double rhs,
                                        const VariableMap& map) {
    double lo = -rhs;
    double hi = -rhs;
    for (const auto& [var, a] : merged) {
        const VariableBinding& b = map.vars[var];
        double vmin = 0.0;
        double vmax = 0.0;
        switch (b.kind) {
            case VariableBinding::Kind::fixed: vmin = vmax = b.fixed_value; break;
            case VariableBinding::Kind::binary: vmin = 0.0; vmax = 1.0; break;
            case VariableBinding::Kind::encoded:
                vmin = b.encoding->offset;
                vmax = b.encoding->max_value();
                break;
        }
        lo += std::min(a * vmin, a * vmax);
        hi += std::max(a * vmin, a * vmax);
    }
    return {lo, hi};
}

void add_squared(Fragment& f, const BitLinear& lin, double w) {
    f.offset += w * lin.c0 * lin.c0;
    std::vector<std::pair<std::uint32_t, double>> items(lin.coef.begin(), lin.coef.end());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto [bi, ai] = items[i];
        if (ai == 0.0) continue;
        f.coefficients.push_back({{bi, bi}, w * (ai * ai + 2.0 * lin.c0 * ai)});
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            const auto [bj, aj] = items[j];
            if (aj == 0.0) continue;
            f.coefficients.push_back({{std::min(bi, bj), std::max(bi, bj)}, 2.0 * w * ai * aj});
        }
    }
}

void add_pairwise(Fragment& f, const std::vector<std::uint32_t>& bits, double w) {
    for (std::size_t i = 0; i < bits.size(); ++i) {
        for (std::size_t j = i + 1; j < bits.size(); ++j) {
            f.coefficients.push_back({{std::min(bits[i], bits[j]), std::max(bits[i], bits[j])}, w});
        }
    }
}

double fgcd(double a, double b, double tol) {
    if (a < b) std::swap(a, b);
    while (b > tol) {
        double r = std::fmod(a, b);
        if (r > b - tol) r = 0.0;
        a = b;
        b = r;
    }
    return a;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, int line) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("qubo line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

std::uint32_t parse_index(std::string_view s, int line) {
    std::uint32_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("qubo line " + std::to_string(line) + ": bad index '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::optional<int> OneHotEncoding::level_of(double v, double tol) const {
    const double k = std::round((v - offset) / step);
    if (k < 0 || k >= levels) return std::nullopt;
    if (std::abs(value(static_cast<int>(k)) - v) > tol * std::max(1.0, std::abs(v))) {
        return std::nullopt;
    }
    return static_cast<int>(k);
}

namespace {
std::vector<std::string> level_names(const std::string& name, int levels) {
    std::vector<std::string> out;
    for (int k = 1; k < levels; ++k) out.push_back(name + "#" + std::to_string(k));
    return out;
}
}  // namespace

OneHotEncoding make_power_encoding(double p_max, int K, const std::string& name) {
    if (K < 2) throw InputError("power encoding needs K >= 2, got " + std::to_string(K));
    if (!(p_max > 0.0)) throw InputError("power encoding needs p_max > 0");
    return OneHotEncoding{K, p_max / K, 0.0, level_names(name, K)};
}

OneHotEncoding make_range_encoding(double lo, double hi, int levels, const std::string& name) {
    if (levels < 2) throw InputError("encoding needs at least 2 levels, got " + std::to_string(levels));
    if (!(hi > lo)) throw InputError("encoding range of '" + name + "' is empty");
    return OneHotEncoding{levels, (hi - lo) / (levels - 1), lo, level_names(name, levels)};
}

OneHotEncoding make_soc_encoding(const VehicleSpec& v, int K_soc, const std::string& name) {
    if (v.soc_max == v.soc_min) {
        throw InputError("vehicle '" + v.id + "' has soc_max == soc_min; nothing to encode");
    }
    return make_range_encoding(v.soc_min, v.soc_max, K_soc, name);
}

Bits encode_level(const OneHotEncoding& enc, int level) {
    if (level < 0 || level >= enc.levels) throw InputError("level out of range");
    Bits bits(static_cast<std::size_t>(enc.levels - 1), 0);
    if (level > 0) bits[static_cast<std::size_t>(level - 1)] = 1;
    return bits;
}

double decode_group(const OneHotEncoding& enc, std::span<const std::uint8_t> group, bool* multi_hot) {
    int level = 0;
    int set = 0;
    for (std::size_t k = 0; k < group.size(); ++k) {
        if (group[k]) {
            if (set == 0) level = static_cast<int>(k) + 1;
            ++set;
        }
    }
    if (multi_hot) *multi_hot = set > 1;
    return enc.value(level);
}

EncodingTable plan_encodings(const StructuredModel& model, const DiscretizationLevels& levels,
                             const std::map<std::string, OneHotEncoding>& overrides) {
    EncodingTable table;
    table.by_var.resize(model.num_variables());
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        const Variable& v = model.variable(i);
        if (auto it = overrides.find(v.name); it != overrides.end()) {
            table.by_var[i] = it->second;
            continue;
        }
        if (v.kind == VarKind::binary || v.fixed()) continue;
        switch (v.role) {
            case VarRole::power:
                table.by_var[i] = make_power_encoding(v.hi, levels.K, v.name);
                table.by_var[i]->offset = v.lo;
                break;
            case VarRole::soc:
                table.by_var[i] = make_range_encoding(v.lo, v.hi, levels.K_soc, v.name);
                break;
            case VarRole::generation:
                table.by_var[i] = make_power_encoding(v.hi, levels.J, v.name);
                break;
            default:
                throw InputError("no encoding for continuous variable '" + v.name + "'");
        }
    }
    return table;
}

std::size_t encoded_bit_count(const StructuredModel& model, const EncodingTable& enc) {
    std::size_t bits = 0;
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        const Variable& v = model.variable(i);
        if (v.fixed()) continue;
        if (v.kind == VarKind::binary) {
            ++bits;
        } else if (i < enc.by_var.size() && enc.by_var[i]) {
            bits += static_cast<std::size_t>(enc.by_var[i]->levels - 1);
        }
    }
    return bits;
}

std::string_view to_string(InequalityMode m) {
    return m == InequalityMode::slack_bits ? "slack_bits" : "paper_verbatim";
}

std::optional<InequalityMode> inequality_mode_from_string(std::string_view s) {
    if (s == "slack_bits") return InequalityMode::slack_bits;
    if (s == "paper_verbatim") return InequalityMode::paper_verbatim;
    return std::nullopt;
}

void QuboProblem::add(std::uint32_t i, std::uint32_t j, double value) {
    if (i > j) std::swap(i, j);
    if (j >= num_bits) throw InputError("qubo index out of range");
    coefficients[{i, j}] += value;
}

double qubo_energy(const QuboProblem& q, std::span<const std::uint8_t> bits) {
    if (bits.size() != q.num_bits) {
        throw InputError("bitstring length " + std::to_string(bits.size()) + " != num_bits " +
                         std::to_string(q.num_bits));
    }
    double e = 0.0;
    for (const auto& [ij, v] : q.coefficients) {
        if (bits[ij.first] && bits[ij.second]) e += v;
    }
    return e + q.offset;
}

double Fragment::energy(std::span<const std::uint8_t> bits) const {
    double e = offset;
    for (const auto& [ij, v] : coefficients) {
        if (bits[ij.first] && bits[ij.second]) e += v;
    }
    return e;
}

void write_qubo(std::ostream& os, const QuboProblem& q) {
    os << "#bits " << q.num_bits << " offset " << format_double(q.offset) << "\n";
    for (const auto& [ij, v] : q.coefficients) {
        os << ij.first << ' ' << ij.second << ' ' << format_double(v) << "\n";
    }
}

QuboProblem read_qubo(std::istream& is) {
    QuboProblem q;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (!header) {
            if (tok.size() != 4 || tok[0] != "#bits" || tok[2] != "offset") {
                throw ParseError("qubo line " + std::to_string(lineno) +
                                 ": expected '#bits N offset C' header");
            }
            q.num_bits = parse_index(tok[1], lineno);
            q.offset = parse_double(tok[3], lineno);
            header = true;
            continue;
        }
        if (tok.size() != 3) {
            throw ParseError("qubo line " + std::to_string(lineno) + ": expected 'i j value'");
        }
        const std::uint32_t i = parse_index(tok[0], lineno);
        const std::uint32_t j = parse_index(tok[1], lineno);
        if (i > j || j >= q.num_bits) {
            throw ParseError("qubo line " + std::to_string(lineno) + ": index out of range or i > j");
        }
        q.coefficients[{i, j}] += parse_double(tok[2], lineno);
    }
    if (!header) throw ParseError("qubo: missing header");
    return q;
}

double dominance_bound(const StructuredModel& model, const EncodingTable& enc) {
    double bound = 1.0;
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        const double c = model.objective()[i];
        const Variable& v = model.variable(i);
        if (c == 0.0 || v.fixed()) continue;
        if (v.kind == VarKind::binary) {
            bound += std::abs(c);
        } else if (i < enc.by_var.size() && enc.by_var[i]) {
            const OneHotEncoding& e = *enc.by_var[i];
            // Every bit set: step * (1 + 2 + ... + (levels - 1)).
            const double all_bits = e.step * (e.levels - 1) * e.levels / 2.0;
            bound += std::abs(c) * all_bits;
        }
    }
    return bound;
}

double residual_granularity(const StructuredModel& model, const EncodingTable& enc,
                            const Constraint& c) {
    std::vector<double> parts;
    double base = -c.rhs;
    for (const auto& [var, a] : merge_terms(c.terms)) {
        const Variable& v = model.variable(var);
        if (v.fixed()) {
            base += a * v.lo;
        } else if (v.kind == VarKind::binary) {
            parts.push_back(std::abs(a));
        } else if (var < enc.by_var.size() && enc.by_var[var]) {
            base += a * enc.by_var[var]->offset;
            parts.push_back(std::abs(a * enc.by_var[var]->step));
        }
    }
    parts.push_back(std::abs(base));
    double largest = 0.0;
    for (double p : parts) largest = std::max(largest, p);
    if (largest == 0.0) return 1.0;
    const double tol = 1e-9 * largest;
    double g = 0.0;
    for (double p : parts) {
        if (p <= tol) continue;
        g = g == 0.0 ? p : fgcd(g, p, tol);
    }
    return std::max(g, 1e-6 * largest);
}

TranspiledModel transpile(const StructuredModel& model, const PenaltyConfig& config,
                          const EncodingTable& enc) {
    if (!(config.lambda_scale > 0.0)) throw InputError("lambda_scale must be positive");
    TranspiledModel out;
    VariableMap& map = out.map;
    const std::size_t n = model.num_variables();
    map.var_names.reserve(n);
    map.vars.resize(n);

    std::uint32_t next_bit = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Variable& v = model.variable(i);
        map.var_names.push_back(v.name);
        VariableBinding& b = map.vars[i];
        if (v.fixed()) {
            b.kind = VariableBinding::Kind::fixed;
            b.fixed_value = v.lo;
        } else if (v.kind == VarKind::binary) {
            b.kind = VariableBinding::Kind::binary;
            b.bits = {next_bit++};
            map.bit_names.push_back(v.name);
        } else {
            if (i >= enc.by_var.size() || !enc.by_var[i]) {
                throw InputError("continuous variable '" + v.name + "' has no encoding");
            }
            b.kind = VariableBinding::Kind::encoded;
            b.encoding = enc.by_var[i];
            for (int k = 1; k < b.encoding->levels; ++k) {
                b.bits.push_back(next_bit++);
                map.bit_names.push_back(v.name + "#" + std::to_string(k));
            }
        }
    }

    const double lambda_star = dominance_bound(model, enc);
    out.dominance_bound = lambda_star;
    const double auto_weight = config.lambda_scale * lambda_star;
    const double one_hot_w = config.one_hot_weight.value_or(auto_weight);
    const double excl_w = config.exclusion_weight.value_or(auto_weight);

    // Objective.
    {
        Fragment& f = out.objective;
        f.offset = model.objective_constant();
        for (std::size_t i = 0; i < n; ++i) {
            const double c = model.objective()[i];
            if (c == 0.0) continue;
            const VariableBinding& b = map.vars[i];
            switch (b.kind) {
                case VariableBinding::Kind::fixed: f.offset += c * b.fixed_value; break;
                case VariableBinding::Kind::binary: f.coefficients.push_back({{b.bits[0], b.bits[0]}, c}); break;
                case VariableBinding::Kind::encoded:
                    f.offset += c * b.encoding->offset;
                    for (std::size_t k = 0; k < b.bits.size(); ++k) {
                        f.coefficients.push_back(
                                {{b.bits[k], b.bits[k]}, c * b.encoding->step * static_cast<double>(k + 1)});
                    }
                    break;
            }
        }
    }

    // At most one level bit per encoded variable.
    for (std::size_t i = 0; i < n; ++i) {
        const VariableBinding& b = map.vars[i];
        if (b.kind != VariableBinding::Kind::encoded || b.bits.size() < 2) continue;
        PenaltyTerm p;
        p.source = PenaltyTerm::Source::one_hot;
        p.form = PenaltyTerm::Form::one_hot;
        p.index = i;
        p.label = "onehot[" + map.var_names[i] + "]";
        p.weight = one_hot_w;
        add_pairwise(p.fragment, b.bits, one_hot_w);
        out.penalties.push_back(std::move(p));
    }

    const auto& constraints = model.constraints();
    for (std::size_t ci = 0; ci < constraints.size(); ++ci) {
        const Constraint& c = constraints[ci];
        const auto merged = merge_terms(c.terms);
        const auto explicit_w = config.class_weight.find(c.cls);
        const bool has_explicit = explicit_w != config.class_weight.end();
        const double g = residual_granularity(model, enc, c);
        const double squared_w = has_explicit ? explicit_w->second : auto_weight / (g * g);
        const double struct_w = has_explicit ? explicit_w->second : auto_weight;

        PenaltyTerm p;
        p.source = PenaltyTerm::Source::constraint;
        p.index = ci;
        p.label = c.label;

        BitLinear lin = to_bits(merged, c.rhs, map);
        if (c.relation == Relation::eq) {
            p.form = PenaltyTerm::Form::squared;
            p.weight = squared_w;
            add_squared(p.fragment, lin, squared_w);
            out.penalties.push_back(std::move(p));
            continue;
        }

        // Normalize to lin <= 0.
        std::map<std::size_t, double> norm = merged;
        double rhs = c.rhs;
        if (c.relation == Relation::ge) {
            scale(lin, -1.0);
            for (auto& [var, a] : norm) a = -a;
            rhs = -rhs;
        }
        auto [lmin, lmax] = decoded_range(norm, rhs, map);
        const double tol = kStructTol * std::max({1.0, std::abs(lmin), std::abs(lmax)});

        const bool structural_class =
                c.cls == ConstraintClass::gate || c.cls == ConstraintClass::mobility;
        const bool verbatim = config.mode == InequalityMode::paper_verbatim && !structural_class;

        if (verbatim) {
            p.form = PenaltyTerm::Form::squared;
            p.weight = squared_w;
            add_squared(p.fragment, lin, squared_w);
            out.penalties.push_back(std::move(p));
            continue;
        }

        if (lmax <= tol) {
            p.form = PenaltyTerm::Form::skipped;
            out.penalties.push_back(std::move(p));
            continue;
        }

        // Indicator: sum of non-negative encoded terms <= U * x, with x binary
        // (or fixed at 0) and U covering every representable value.
        {
            std::optional<std::size_t> gate_var;
            bool gate_fixed_zero = false;
            double cap = 0.0;
            double base = -rhs;
            double reach = 0.0;
            double min_step = std::numeric_limits<double>::infinity();
            std::vector<std::uint32_t> gated_bits;
            bool ok = true;
            for (const auto& [var, a] : norm) {
                const VariableBinding& b = map.vars[var];
                if (a < 0.0 && !gate_var && model.variable(var).kind == VarKind::binary &&
                    (b.kind == VariableBinding::Kind::binary ||
                     (b.kind == VariableBinding::Kind::fixed && b.fixed_value == 0.0))) {
                    gate_var = var;
                    gate_fixed_zero = b.kind == VariableBinding::Kind::fixed;
                    cap = -a;
                    continue;
                }
                if (b.kind == VariableBinding::Kind::fixed) {
                    base += a * b.fixed_value;
                    continue;
                }
                if (a <= 0.0) {
                    ok = false;
                    break;
                }
                if (b.kind == VariableBinding::Kind::binary) {
                    reach += a;
                    min_step = std::min(min_step, a);
                } else {
                    base += a * b.encoding->offset;
                    reach += a * (b.encoding->max_value() - b.encoding->offset);
                    min_step = std::min(min_step, a * b.encoding->step);
                }
                gated_bits.insert(gated_bits.end(), b.bits.begin(), b.bits.end());
            }
            if (ok && gate_var && !gated_bits.empty() && base <= tol && base + reach - cap <= tol &&
                base + min_step > tol) {
                p.form = PenaltyTerm::Form::indicator;
                p.weight = struct_w;
                for (std::uint32_t bit : gated_bits) {
                    p.fragment.coefficients.push_back({{bit, bit}, struct_w});
                    if (!gate_fixed_zero) {
                        const std::uint32_t xb = map.vars[*gate_var].bits[0];
                        p.fragment.coefficients.push_back({{std::min(bit, xb), std::max(bit, xb)}, -struct_w});
                    }
                }
                out.penalties.push_back(std::move(p));
                continue;
            }
        }

        // At most one (or none) of a set of binaries.
        {
            bool all_unit_binary = !lin.coef.empty();
            for (const auto& [var, a] : norm) {
                const VariableBinding& b = map.vars[var];
                if (b.kind == VariableBinding::Kind::fixed) continue;
                if (b.kind != VariableBinding::Kind::binary || std::abs(a - 1.0) > kStructTol) {
                    all_unit_binary = false;
                    break;
                }
            }
            if (all_unit_binary && (std::abs(lin.c0 + 1.0) <= tol || std::abs(lin.c0) <= tol)) {
                std::vector<std::uint32_t> bits;
                for (const auto& [bit, a] : lin.coef) bits.push_back(bit);
                p.form = PenaltyTerm::Form::pairwise;
                p.weight = struct_w;
                if (std::abs(lin.c0) <= tol) {
                    for (std::uint32_t bit : bits) p.fragment.coefficients.push_back({{bit, bit}, struct_w});
                } else {
                    add_pairwise(p.fragment, bits, struct_w);
                }
                out.penalties.push_back(std::move(p));
                continue;
            }
        }

        // General inequality: lin + s = 0 with a one-hot slack s in [0, -lmin].
        p.weight = squared_w;
        const double span = -lmin;
        const int slack_levels = span > 0.0 ? static_cast<int>(std::floor(span / g + 1e-9)) + 1 : 1;
        if (slack_levels < 2) {
            p.form = PenaltyTerm::Form::squared;
            add_squared(p.fragment, lin, squared_w);
            out.penalties.push_back(std::move(p));
            continue;
        }
        SlackBinding slack;
        slack.constraint = ci;
        slack.encoding = OneHotEncoding{slack_levels, g, 0.0, level_names("slack[" + c.label + "]", slack_levels)};
        for (int k = 1; k < slack_levels; ++k) {
            slack.bits.push_back(next_bit++);
            map.bit_names.push_back(slack.encoding.bit_names[static_cast<std::size_t>(k - 1)]);
        }
        for (std::size_t k = 0; k < slack.bits.size(); ++k) {
            lin.coef[slack.bits[k]] += g * static_cast<double>(k + 1);
        }
        p.form = PenaltyTerm::Form::slack_squared;
        add_squared(p.fragment, lin, squared_w);
        out.penalties.push_back(std::move(p));
        if (slack.bits.size() >= 2) {
            PenaltyTerm oh;
            oh.source = PenaltyTerm::Source::slack_one_hot;
            oh.form = PenaltyTerm::Form::one_hot;
            oh.index = map.slacks.size();
            oh.label = "onehot[slack[" + c.label + "]]";
            oh.weight = one_hot_w;
            add_pairwise(oh.fragment, slack.bits, one_hot_w);
            out.penalties.push_back(std::move(oh));
        }
        map.slacks.push_back(std::move(slack));
    }

    for (std::size_t ei = 0; ei < model.exclusions().size(); ++ei) {
        const Exclusion& e = model.exclusions()[ei];
        PenaltyTerm p;
        p.source = PenaltyTerm::Source::exclusion;
        p.form = PenaltyTerm::Form::pairwise;
        p.index = ei;
        p.label = e.label;
        p.weight = excl_w;
        const VariableBinding& a = map.vars[e.a];
        const VariableBinding& b = map.vars[e.b];
        auto fixed_nonzero = [](const VariableBinding& v) {
            return v.kind == VariableBinding::Kind::fixed && v.fixed_value != 0.0;
        };
        if (fixed_nonzero(a) && fixed_nonzero(b)) {
            p.fragment.offset += excl_w;
        } else if (fixed_nonzero(a) || fixed_nonzero(b)) {
            for (std::uint32_t bit : (fixed_nonzero(a) ? b : a).bits) {
                p.fragment.coefficients.push_back({{bit, bit}, excl_w});
            }
        } else {
            for (std::uint32_t ba : a.bits) {
                for (std::uint32_t bb : b.bits) {
                    p.fragment.coefficients.push_back({{std::min(ba, bb), std::max(ba, bb)}, excl_w});
                }
            }
        }
        out.penalties.push_back(std::move(p));
    }

    QuboProblem& q = out.qubo;
    q.num_bits = next_bit;
    q.offset = out.objective.offset;
    for (const auto& [ij, v] : out.objective.coefficients) q.add(ij.first, ij.second, v);
    for (const PenaltyTerm& p : out.penalties) {
        q.offset += p.fragment.offset;
        for (const auto& [ij, v] : p.fragment.coefficients) q.add(ij.first, ij.second, v);
    }
    for (auto it = q.coefficients.begin(); it != q.coefficients.end();) {
        it = it->second == 0.0 ? q.coefficients.erase(it) : std::next(it);
    }
    return out;
}

DecodeResult decode(std::span<const std::uint8_t> bits, const VariableMap& map) {
    DecodeResult out;
    for (std::size_t i = 0; i < map.vars.size(); ++i) {
        const VariableBinding& b = map.vars[i];
        double value = 0.0;
        switch (b.kind) {
            case VariableBinding::Kind::fixed: value = b.fixed_value; break;
            case VariableBinding::Kind::binary: value = bits[b.bits[0]] ? 1.0 : 0.0; break;
            case VariableBinding::Kind::encoded: {
                std::vector<std::uint8_t> group;
                for (std::uint32_t bit : b.bits) group.push_back(bits[bit]);
                bool multi = false;
                value = decode_group(*b.encoding, group, &multi);
                if (multi) out.multi_hot.push_back(map.var_names[i]);
                break;
            }
        }
        out.assignment.emplace(map.var_names[i], value);
    }
    return out;
}

Bits encode_assignment(const StructuredModel& model, const TranspiledModel& t, const Assignment& a) {
    Bits bits(t.qubo.num_bits, 0);
    const std::vector<double> values = to_dense(model, a);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const VariableBinding& b = t.map.vars[i];
        if (b.kind == VariableBinding::Kind::binary) {
            bits[b.bits[0]] = values[i] > 0.5 ? 1 : 0;
        } else if (b.kind == VariableBinding::Kind::encoded) {
            auto level = b.encoding->level_of(values[i]);
            if (!level) {
                throw InputError("value " + format_double(values[i]) + " of '" + t.map.var_names[i] +
                                 "' is not representable");
            }
            if (*level > 0) bits[b.bits[static_cast<std::size_t>(*level - 1)]] = 1;
        }
    }
    for (const SlackBinding& s : t.map.slacks) {
        const Constraint& c = model.constraints()[s.constraint];
        const double lhs = constraint_lhs(c, values);
        const double slack = c.relation == Relation::ge ? lhs - c.rhs : c.rhs - lhs;
        if (auto level = s.encoding.level_of(slack, 1e-7); level && *level > 0) {
            bits[s.bits[static_cast<std::size_t>(*level - 1)]] = 1;
        }
    }
    return bits;
}

AuditReport penalty_audit(const StructuredModel& model, const TranspiledModel& t,
                          std::span<const std::uint8_t> bits) {
    AuditReport report;
    report.qubo_energy = qubo_energy(t.qubo, bits);
    const DecodeResult dec = decode(bits, t.map);
    const std::vector<double> values = to_dense(model, dec.assignment);
    const ObjectiveReport eval = evaluate(model, std::span<const double>(values));
    report.objective = eval.objective;
    report.feasible = eval.feasible;

    for (const PenaltyTerm& p : t.penalties) {
        AuditEntry entry;
        entry.label = p.label;
        entry.energy = p.fragment.energy(bits);
        switch (p.source) {
            case PenaltyTerm::Source::constraint: {
                const Constraint& c = model.constraints()[p.index];
                entry.satisfied = violation(c, constraint_lhs(c, values)) <= kFeasibilityTolerance;
                break;
            }
            case PenaltyTerm::Source::one_hot: {
                const VariableBinding& b = t.map.vars[p.index];
                double raw = b.encoding->offset;
                int set = 0;
                for (std::size_t k = 0; k < b.bits.size(); ++k) {
                    if (bits[b.bits[k]]) {
                        raw += b.encoding->step * static_cast<double>(k + 1);
                        ++set;
                    }
                }
                entry.energy += model.objective()[p.index] * (raw - values[p.index]);
                entry.satisfied = set <= 1;
                break;
            }
            case PenaltyTerm::Source::slack_one_hot: {
                int set = 0;
                for (std::uint32_t bit : t.map.slacks[p.index].bits) set += bits[bit] ? 1 : 0;
                entry.satisfied = set <= 1;
                break;
            }
            case PenaltyTerm::Source::exclusion: {
                const Exclusion& e = model.exclusions()[p.index];
                entry.satisfied = std::abs(values[e.a] * values[e.b]) <= kFeasibilityTolerance;
                break;
            }
        }
        report.total_penalty += entry.energy;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace v2gq
