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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v2gq/model.hpp"
#include "v2gq/qubo.hpp"

namespace v2gq {

inline constexpr std::size_t kDefaultBitGuard = 26;

struct SolveResult {
    Bits best_bits;
    double best_energy = 0.0;
    /// Best energy so far after each sweep, one vector per restart.
    std::vector<std::vector<double>> energy_trace;
    double wall_time_ms = 0.0;
    /// Set by callers that decode and evaluate the result.
    std::optional<bool> feasible_after_decode;
};

/// Dense symmetric view of a QUBO for incremental flip deltas.
class QuboMatrix {
  public:
    explicit QuboMatrix(const QuboProblem& q);

    std::size_t size() const noexcept { return n_; }
    double diag(std::size_t i) const { return diag_[i]; }
    double coupling(std::size_t i, std::size_t j) const { return off_[i * n_ + j]; }
    double offset() const noexcept { return offset_; }

    double energy(std::span<const std::uint8_t> bits) const;
    /// Energy change from flipping bit i, from row i only.
    double flip_delta(std::span<const std::uint8_t> bits, std::size_t i) const;

  private:
    std::size_t n_ = 0;
    std::vector<double> diag_;
    std::vector<double> off_;  // symmetric, zero diagonal
    double offset_ = 0.0;
};

/// Global minimum by exhaustive enumeration. Ties go to the lexicographically
/// smallest bitstring read from bit 0. Throws GuardError above `max_bits`.
SolveResult brute_force(const QuboProblem& q, std::size_t max_bits = kDefaultBitGuard);

struct AnnealSchedule {
    double initial_temperature = 1.0;
    double final_temperature = 0.01;
    int sweeps = 1000;
    int restarts = 4;
    std::uint64_t seed = 0;
};

/// Throws InputError unless initial >= final > 0, sweeps >= 1, restarts >= 1.
void validate(const AnnealSchedule& s);

/// Temperatures scaled to the coefficient magnitudes of `q`.
AnnealSchedule default_schedule(const QuboProblem& q, std::uint64_t seed = 0);

SolveResult simulated_anneal(const QuboProblem& q, const AnnealSchedule& schedule);

/// Steepest single-flip descent from `start`; the result is 1-flip locally optimal.
SolveResult greedy_descent(const QuboProblem& q, std::span<const std::uint8_t> start);

struct ReferenceResult {
    bool feasible = false;
    Assignment assignment;
    double objective = 0.0;
    std::size_t nodes = 0;  // search nodes visited
};

/// Minimum-objective feasible assignment over the encoded level grid,
/// enumerating levels directly and rejecting violated constraints without
/// penalties. Ties go to the lexicographically smallest level vector in
/// variable order. Throws GuardError when the encoded bit count exceeds `max_bits`.
ReferenceResult exact_discrete_reference(const StructuredModel& model, const EncodingTable& enc,
                                         std::size_t max_bits = kDefaultBitGuard);

struct HybridConfig {
    PenaltyConfig penalty;
    std::optional<AnnealSchedule> schedule;  // default_schedule of the binary QUBO when empty
    std::uint64_t seed = 0;
    int max_rounds = 20;
    /// Guard on the continuous inner search, in encoded bits.
    std::size_t inner_max_bits = 40;
};

struct HybridResult {
    bool feasible = false;
    Assignment assignment;
    double objective = 0.0;
    int rounds = 0;
};

/// Anneals the placement binaries, then recovers gate binaries and continuous
/// variables exactly with the placements pinned, and improves the placements by
/// local search over one- and two-bit moves until no move helps. Gate binaries
/// are the cost-free ones that only appear as indicator gates. Throws InputError naming the first
/// constraint that couples binaries and continuous variables other than as an
/// indicator gate.
HybridResult hybrid_solve(const StructuredModel& model, const EncodingTable& enc,
                          const HybridConfig& config = {});

}  // namespace v2gq
