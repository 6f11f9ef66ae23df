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

#include "v2gq/solvers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "v2gq/error.hpp"

namespace v2gq {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double tie_tol(double e) { return 1e-9 * std::max(1.0, std::abs(e)); }

/// Local fields h_i = Q_ii + sum_j Q_ij b_j; flipping i changes the energy by (1 - 2 b_i) h_i.
struct FieldState {
    const QuboMatrix& m;
    Bits bits;
    std::vector<double> field;
    double energy = 0.0;

    FieldState(const QuboMatrix& mat, Bits start) : m(mat), bits(std::move(start)) {
        const std::size_t n = m.size();
        field.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double h = m.diag(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (bits[j]) h += m.coupling(i, j);
            }
            field[i] = h;
        }
        energy = m.energy(bits);
    }

    double delta(std::size_t i) const { return bits[i] ? -field[i] : field[i]; }

    void flip(std::size_t i) {
        energy += delta(i);
        const double sign = bits[i] ? -1.0 : 1.0;
        bits[i] ^= 1;
        for (std::size_t j = 0; j < m.size(); ++j) field[j] += sign * m.coupling(j, i);
    }
};

bool better(double e, const Bits& bits, double best_e, const Bits& best_bits) {
    if (e < best_e - tie_tol(best_e)) return true;
    if (e <= best_e + tie_tol(best_e)) return bits < best_bits;
    return false;
}

}  // namespace

QuboMatrix::QuboMatrix(const QuboProblem& q) : n_(q.num_bits), offset_(q.offset) {
    diag_.assign(n_, 0.0);
    off_.assign(n_ * n_, 0.0);
    for (const auto& [ij, v] : q.coefficients) {
        const auto [i, j] = ij;
        if (i == j) {
            diag_[i] += v;
        } else {
            off_[i * n_ + j] += v;
            off_[j * n_ + i] += v;
        }
    }
}

double QuboMatrix::energy(std::span<const std::uint8_t> bits) const {
    double e = offset_;
    for (std::size_t i = 0; i < n_; ++i) {
        if (!bits[i]) continue;
        e += diag_[i];
        for (std::size_t j = i + 1; j < n_; ++j) {
            if (bits[j]) e += off_[i * n_ + j];
        }
    }
    return e;
}

double QuboMatrix::flip_delta(std::span<const std::uint8_t> bits, std::size_t i) const {
    double h = diag_[i];
    for (std::size_t j = 0; j < n_; ++j) {
        if (bits[j]) h += off_[i * n_ + j];
    }
    return bits[i] ? -h : h;
}

SolveResult brute_force(const QuboProblem& q, std::size_t max_bits) {
    const auto start = Clock::now();
    const std::size_t n = q.num_bits;
    if (n > max_bits) {
        throw GuardError("brute force refused: " + std::to_string(n) + " bits exceeds the guard of " +
                         std::to_string(max_bits));
    }
    const QuboMatrix m(q);
    FieldState s(m, Bits(n, 0));
    Bits best_bits = s.bits;
    double best = s.energy;
    // Gray code walk: step k flips the lowest set bit of k.
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < total; ++k) {
        s.flip(static_cast<std::size_t>(std::countr_zero(k)));
        if (s.energy < best + tie_tol(best) && better(s.energy, s.bits, best, best_bits)) {
            best = s.energy;
            best_bits = s.bits;
        }
    }
    SolveResult r;
    r.best_bits = std::move(best_bits);
    r.best_energy = qubo_energy(q, r.best_bits);
    r.wall_time_ms = elapsed_ms(start);
    return r;
}

void validate(const AnnealSchedule& s) {
    if (!(s.final_temperature > 0.0) || !(s.initial_temperature >= s.final_temperature)) {
        throw InputError("anneal schedule needs initial_temperature >= final_temperature > 0");
    }
    if (s.sweeps < 1) throw InputError("anneal schedule needs sweeps >= 1");
    if (s.restarts < 1) throw InputError("anneal schedule needs restarts >= 1");
}

AnnealSchedule default_schedule(const QuboProblem& q, std::uint64_t seed) {
    const QuboMatrix m(q);
    double max_row = 0.0;
    double min_coef = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.size(); ++i) {
        double row = std::abs(m.diag(i));
        for (std::size_t j = 0; j < m.size(); ++j) row += std::abs(m.coupling(i, j));
        max_row = std::max(max_row, row);
    }
    for (const auto& [ij, v] : q.coefficients) {
        if (v != 0.0) min_coef = std::min(min_coef, std::abs(v));
    }
    AnnealSchedule s;
    s.seed = seed;
    if (max_row == 0.0) return s;
    s.initial_temperature = 0.5 * max_row;
    s.final_temperature = std::min(s.initial_temperature, 0.05 * min_coef);
    s.sweeps = 1000;
    s.restarts = 4;
    return s;
}

SolveResult simulated_anneal(const QuboProblem& q, const AnnealSchedule& schedule) {
    validate(schedule);
    const auto start = Clock::now();
    const std::size_t n = q.num_bits;
    const QuboMatrix m(q);
    SolveResult r;
    r.best_energy = std::numeric_limits<double>::infinity();
    const double ratio = schedule.sweeps > 1
                                 ? std::pow(schedule.final_temperature / schedule.initial_temperature,
                                            1.0 / (schedule.sweeps - 1))
                                 : 1.0;
    for (int restart = 0; restart < schedule.restarts; ++restart) {
        std::seed_seq seq{static_cast<std::uint32_t>(schedule.seed),
                          static_cast<std::uint32_t>(schedule.seed >> 32),
                          static_cast<std::uint32_t>(restart)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Bits init(n);
        for (auto& b : init) b = static_cast<std::uint8_t>(rng() & 1u);
        FieldState s(m, std::move(init));
        Bits best_bits = s.bits;
        double best = s.energy;
        std::vector<double> trace;
        trace.reserve(static_cast<std::size_t>(schedule.sweeps));
        double temp = schedule.initial_temperature;
        for (int sweep = 0; sweep < schedule.sweeps; ++sweep) {
            for (std::size_t i = 0; i < n; ++i) {
                const double d = s.delta(i);
                if (d <= 0.0 || unit(rng) < std::exp(-d / temp)) {
                    s.flip(i);
                    if (s.energy < best - tie_tol(best)) {
                        best = s.energy;
                        best_bits = s.bits;
                    }
                }
            }
            trace.push_back(best);
            temp *= ratio;
        }
        // Polish: the last state may sit above a 1-flip minimum.
        FieldState polish(m, best_bits);
        for (;;) {
            std::size_t pick = n;
            double pick_d = -tie_tol(polish.energy);
            for (std::size_t i = 0; i < n; ++i) {
                if (polish.delta(i) < pick_d) {
                    pick_d = polish.delta(i);
                    pick = i;
                }
            }
            if (pick == n) break;
            polish.flip(pick);
        }
        if (polish.energy < best) {
            best = polish.energy;
            best_bits = polish.bits;
            if (!trace.empty()) trace.back() = best;
        }
        const double exact = qubo_energy(q, best_bits);
        if (r.energy_trace.empty() || better(exact, best_bits, r.best_energy, r.best_bits)) {
            r.best_energy = exact;
            r.best_bits = best_bits;
        }
        r.energy_trace.push_back(std::move(trace));
    }
    r.wall_time_ms = elapsed_ms(start);
    return r;
}

SolveResult greedy_descent(const QuboProblem& q, std::span<const std::uint8_t> start_bits) {
    if (start_bits.size() != q.num_bits) {
        throw InputError("start bits have length " + std::to_string(start_bits.size()) +
                         ", expected " + std::to_string(q.num_bits));
    }
    const auto start = Clock::now();
    const QuboMatrix m(q);
    FieldState s(m, Bits(start_bits.begin(), start_bits.end()));
    std::vector<double> trace{s.energy};
    for (;;) {
        std::size_t pick = q.num_bits;
        double pick_d = -tie_tol(s.energy);
        for (std::size_t i = 0; i < q.num_bits; ++i) {
            if (s.delta(i) < pick_d) {
                pick_d = s.delta(i);
                pick = i;
            }
        }
        if (pick == q.num_bits) break;
        s.flip(pick);
        trace.push_back(s.energy);
    }
    SolveResult r;
    r.best_bits = s.bits;
    r.best_energy = qubo_energy(q, r.best_bits);
    r.energy_trace.push_back(std::move(trace));
    r.wall_time_ms = elapsed_ms(start);
    return r;
}

namespace {

class ReferenceSearch {
  public:
    ReferenceSearch(const StructuredModel& model, const EncodingTable& enc) : model_(model) {
        const std::size_t n = model.num_variables();
        domains_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Variable& v = model.variable(i);
            std::vector<double>& dom = domains_[i];
            if (v.fixed()) {
                dom = {v.lo};
            } else if (v.kind == VarKind::binary) {
                dom = {0.0, 1.0};
            } else {
                if (i >= enc.by_var.size() || !enc.by_var[i]) {
                    throw InputError("continuous variable '" + v.name + "' has no encoding");
                }
                const OneHotEncoding& e = *enc.by_var[i];
                for (int k = 0; k < e.levels; ++k) {
                    const double x = e.value(k);
                    if (x >= v.lo - kFeasibilityTolerance && x <= v.hi + kFeasibilityTolerance) {
                        dom.push_back(x);
                    }
                }
            }
        }
        const auto& cons = model.constraints();
        partial_.assign(cons.size(), 0.0);
        rem_min_.assign(cons.size(), 0.0);
        rem_max_.assign(cons.size(), 0.0);
        by_var_.resize(n);
        for (std::size_t c = 0; c < cons.size(); ++c) {
            std::map<std::size_t, double> merged;
            for (const Term& t : cons[c].terms) merged[t.var] += t.coeff;
            for (const auto& [var, a] : merged) {
                if (a == 0.0 || domains_[var].empty()) continue;
                by_var_[var].push_back({c, a});
                const auto [lo, hi] = contribution_range(var, a);
                rem_min_[c] += lo;
                rem_max_[c] += hi;
            }
        }
        excl_by_var_.resize(n);
        for (const Exclusion& e : model.exclusions()) {
            excl_by_var_[std::max(e.a, e.b)].push_back(e);
        }
        // Objective suffix bound: best case of the unassigned tail.
        suffix_min_.assign(n + 1, 0.0);
        for (std::size_t i = n; i-- > 0;) {
            const double c = model.objective()[i];
            double m = 0.0;
            if (c != 0.0 && !domains_[i].empty()) m = contribution_range(i, c).first;
            suffix_min_[i] = suffix_min_[i + 1] + m;
        }
        values_.assign(n, 0.0);
    }

    ReferenceResult run() {
        for (const auto& d : domains_) {
            if (d.empty()) return result_;
        }
        dfs(0, model_.objective_constant());
        if (result_.feasible) {
            result_.assignment = to_assignment(model_, best_values_);
            result_.objective = objective_value(model_, best_values_);
        }
        return result_;
    }

  private:
    struct Coef {
        std::size_t constraint;
        double a;
    };

    std::pair<double, double> contribution_range(std::size_t var, double a) const {
        const auto [mn, mx] = std::minmax_element(domains_[var].begin(), domains_[var].end());
        return {std::min(a * *mn, a * *mx), std::max(a * *mn, a * *mx)};
    }

    bool consistent(std::size_t c) const {
        const Constraint& con = model_.constraints()[c];
        const double lo = partial_[c] + rem_min_[c];
        const double hi = partial_[c] + rem_max_[c];
        const double tol = kFeasibilityTolerance;
        switch (con.relation) {
            case Relation::le: return lo <= con.rhs + tol;
            case Relation::ge: return hi >= con.rhs - tol;
            case Relation::eq: return lo <= con.rhs + tol && hi >= con.rhs - tol;
        }
        return true;
    }

    void dfs(std::size_t i, double obj) {
        ++result_.nodes;
        if (result_.feasible && obj + suffix_min_[i] >= best_obj_ - tie_tol(best_obj_)) return;
        if (i == values_.size()) {
            result_.feasible = true;
            best_obj_ = obj;
            best_values_ = values_;
            return;
        }
        const double c = model_.objective()[i];
        for (double x : domains_[i]) {
            values_[i] = x;
            bool ok = true;
            for (const Coef& k : by_var_[i]) {
                const auto [lo, hi] = contribution_range(i, k.a);
                partial_[k.constraint] += k.a * x;
                rem_min_[k.constraint] -= lo;
                rem_max_[k.constraint] -= hi;
            }
            for (const Coef& k : by_var_[i]) {
                if (!consistent(k.constraint)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                for (const Exclusion& e : excl_by_var_[i]) {
                    if (std::abs(values_[e.a] * values_[e.b]) > kFeasibilityTolerance) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) dfs(i + 1, obj + c * x);
            for (const Coef& k : by_var_[i]) {
                const auto [lo, hi] = contribution_range(i, k.a);
                partial_[k.constraint] -= k.a * x;
                rem_min_[k.constraint] += lo;
                rem_max_[k.constraint] += hi;
            }
        }
        values_[i] = 0.0;
    }

    const StructuredModel& model_;
    std::vector<std::vector<double>> domains_;
    std::vector<std::vector<Coef>> by_var_;
    std::vector<std::vector<Exclusion>> excl_by_var_;
    std::vector<double> partial_;
    std::vector<double> rem_min_;
    std::vector<double> rem_max_;
    std::vector<double> suffix_min_;
    std::vector<double> values_;
    std::vector<double> best_values_;
    double best_obj_ = std::numeric_limits<double>::infinity();
    ReferenceResult result_;
};

}  // namespace

ReferenceResult exact_discrete_reference(const StructuredModel& model, const EncodingTable& enc,
                                         std::size_t max_bits) {
    const std::size_t bits = encoded_bit_count(model, enc);
    if (bits > max_bits) {
        throw GuardError("exact reference refused: " + std::to_string(bits) +
                         " encoded bits exceeds the guard of " + std::to_string(max_bits));
    }
    return ReferenceSearch(model, enc).run();
}

namespace {

bool is_free_binary(const Variable& v) { return v.kind == VarKind::binary && !v.fixed(); }
bool is_free_continuous(const Variable& v) { return v.kind == VarKind::continuous && !v.fixed(); }

/// sum a_j v_j <= U x with non-negative continuous v_j and a_j > 0, one binary x.
bool is_indicator_gate(const StructuredModel& model, const Constraint& c) {
    if (c.relation == Relation::eq) return false;
    const double sign = c.relation == Relation::le ? 1.0 : -1.0;
    std::map<std::size_t, double> merged;
    for (const Term& t : c.terms) merged[t.var] += sign * t.coeff;
    double rhs = sign * c.rhs;
    int binaries = 0;
    for (const auto& [var, a] : merged) {
        const Variable& v = model.variable(var);
        if (v.fixed()) {
            rhs -= a * v.lo;
        } else if (v.kind == VarKind::binary) {
            if (a >= 0.0) return false;
            ++binaries;
        } else if (a < 0.0 || v.lo < 0.0) {
            return false;
        }
    }
    return binaries == 1 && std::abs(rhs) <= kFeasibilityTolerance;
}

struct Score {
    bool feasible = false;
    double value = std::numeric_limits<double>::infinity();

    bool operator<(const Score& o) const {
        if (feasible != o.feasible) return feasible;
        return value < o.value - tie_tol(o.value);
    }
};

constexpr int kHybridPatience = 6;

class HybridSearch {
  public:
    HybridSearch(const StructuredModel& model, const EncodingTable& enc, const HybridConfig& cfg)
            : model_(model), enc_(enc), cfg_(cfg) {
        const std::size_t n = model.num_variables();
        // Gate-only binaries (no cost, only switching power on and off) are
        // resolved together with the power levels; the rest is annealed.
        std::vector<bool> inner(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            inner[i] = is_free_binary(model.variable(i)) && model.objective()[i] == 0.0;
        }
        for (const Constraint& c : model.constraints()) {
            bool has_bin = false;
            bool has_cont = false;
            for (const Term& t : c.terms) {
                const Variable& v = model.variable(t.var);
                has_bin |= is_free_binary(v);
                has_cont |= is_free_continuous(v);
            }
            if (has_bin && has_cont && !is_indicator_gate(model, c)) {
                throw InputError("hybrid solve refused: constraint '" + c.label +
                                 "' couples binary and continuous variables");
            }
            if (!has_cont) {
                binary_constraints_.push_back(&c);
                for (const Term& t : c.terms) inner[t.var] = false;
            }
        }
        for (const Exclusion& e : model.exclusions()) {
            if (is_free_continuous(model.variable(e.a)) || is_free_continuous(model.variable(e.b))) {
                throw InputError("hybrid solve refused: exclusion '" + e.label +
                                 "' involves a continuous variable");
            }
        }
        for (bool changed = true; changed;) {
            changed = false;
            for (const Exclusion& e : model.exclusions()) {
                if (inner[e.a] != inner[e.b]) {
                    inner[e.a] = inner[e.b] = false;
                    changed = true;
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (is_free_binary(model.variable(i)) && !inner[i]) binaries_.push_back(i);
        }
        outer_.assign(n, false);
        for (std::size_t i : binaries_) outer_[i] = true;
    }

    HybridResult run() {
        HybridResult out;
        const StructuredModel sub = binary_submodel();
        EncodingTable sub_enc;
        sub_enc.by_var.resize(sub.num_variables());
        const TranspiledModel t = transpile(sub, cfg_.penalty, sub_enc);
        AnnealSchedule sched = cfg_.schedule.value_or(default_schedule(t.qubo, cfg_.seed));
        sched.seed = cfg_.seed;

        Bits current;
        Score current_score;
        std::mt19937_64 rng(cfg_.seed);
        int stale = 0;
        for (int round = 0; round < std::max(1, cfg_.max_rounds); ++round) {
            ++out.rounds;
            Bits start(binaries_.size(), 0);
            if (round == 0 || current.empty()) {
                if (!binaries_.empty()) {
                    sched.seed = cfg_.seed + static_cast<std::uint64_t>(round) * 0x9E3779B97F4A7C15ull;
                    const SolveResult sa = simulated_anneal(t.qubo, sched);
                    const Assignment dec = decode(sa.best_bits, t.map).assignment;
                    for (std::size_t k = 0; k < binaries_.size(); ++k) {
                        start[k] = dec.at(model_.variable(binaries_[k]).name) > 0.5 ? 1 : 0;
                    }
                }
            } else {
                // Kick the incumbent: a pair flip cannot move a vehicle between
                // locations, which takes the placement and traversal bits together.
                start = current;
                const std::size_t kicks = 2 + rng() % 3;
                for (std::size_t k = 0; k < kicks && !start.empty(); ++k) start[rng() % start.size()] ^= 1;
            }
            auto [bits, score] = local_search(std::move(start));
            const bool improved = current.empty() ? true : score < current_score;
            if (improved) {
                current = bits;
                current_score = score;
                stale = 0;
            } else if (current_score.feasible && ++stale >= kHybridPatience) {
                break;
            }
        }

        const auto& inner = cache_.at(current);
        out.feasible = false;
        if (inner.feasible) {
            const ObjectiveReport rep = evaluate(model_, inner.assignment);
            out.feasible = rep.feasible;
            out.objective = rep.objective;
            out.assignment = inner.assignment;
        } else {
            std::vector<double> values(model_.num_variables());
            for (std::size_t i = 0; i < values.size(); ++i) values[i] = model_.variable(i).lo;
            for (std::size_t k = 0; k < binaries_.size(); ++k) values[binaries_[k]] = current[k];
            out.assignment = to_assignment(model_, values);
            out.objective = objective_value(model_, values);
        }
        return out;
    }

  private:
    StructuredModel binary_submodel() const {
        StructuredModel sub;
        std::vector<std::size_t> remap(model_.num_variables(), SIZE_MAX);
        for (std::size_t i = 0; i < model_.num_variables(); ++i) {
            const Variable& v = model_.variable(i);
            if (!outer_[i] && !v.fixed()) continue;
            remap[i] = sub.add_variable(v.name, v.kind, v.lo, v.hi, v.role);
            if (outer_[i]) sub.add_objective(remap[i], model_.objective()[i]);
        }
        for (const Constraint* c : binary_constraints_) {
            Constraint copy = *c;
            for (Term& t : copy.terms) t.var = remap[t.var];
            sub.add_constraint(std::move(copy));
        }
        for (const Exclusion& e : model_.exclusions()) {
            if (remap[e.a] != SIZE_MAX && remap[e.b] != SIZE_MAX) {
                sub.add_exclusion(remap[e.a], remap[e.b], e.label);
            }
        }
        return sub;
    }

    Score score_of(const Bits& bits) {
        auto it = cache_.find(bits);
        if (it == cache_.end()) {
            StructuredModel pinned = model_;
            for (std::size_t k = 0; k < binaries_.size(); ++k) {
                pinned.set_bounds(binaries_[k], bits[k], bits[k]);
            }
            it = cache_.emplace(bits, exact_discrete_reference(pinned, enc_, cfg_.inner_max_bits)).first;
        }
        const ReferenceResult& r = it->second;
        Score s;
        s.feasible = r.feasible;
        if (r.feasible) {
            s.value = r.objective;
        } else {
            // Toward feasibility: fewer violated binary-only constraints is better.
            std::vector<double> values(model_.num_variables());
            for (std::size_t i = 0; i < values.size(); ++i) values[i] = model_.variable(i).lo;
            for (std::size_t k = 0; k < binaries_.size(); ++k) values[binaries_[k]] = bits[k];
            double viol = 0.0;
            for (const Constraint* c : binary_constraints_) {
                viol += violation(*c, constraint_lhs(*c, values));
            }
            s.value = viol;
        }
        return s;
    }

    std::pair<Bits, Score> local_search(Bits bits) {
        Score score = score_of(bits);
        const std::size_t n = bits.size();
        for (;;) {
            Bits best_bits = bits;
            Score best = score;
            for (std::size_t i = 0; i < n; ++i) {
                bits[i] ^= 1;
                if (Score s = score_of(bits); s < best) {
                    best = s;
                    best_bits = bits;
                }
                for (std::size_t j = i + 1; j < n; ++j) {
                    bits[j] ^= 1;
                    if (Score s = score_of(bits); s < best) {
                        best = s;
                        best_bits = bits;
                    }
                    bits[j] ^= 1;
                }
                bits[i] ^= 1;
            }
            if (!(best < score)) break;
            bits = best_bits;
            score = best;
        }
        return {bits, score};
    }

    const StructuredModel& model_;
    const EncodingTable& enc_;
    const HybridConfig& cfg_;
    std::vector<std::size_t> binaries_;  // annealed binaries
    std::vector<bool> outer_;
    std::vector<const Constraint*> binary_constraints_;
    std::map<Bits, ReferenceResult> cache_;
};

}  // namespace

HybridResult hybrid_solve(const StructuredModel& model, const EncodingTable& enc,
                          const HybridConfig& config) {
    return HybridSearch(model, enc, config).run();
}

}  // namespace v2gq
