// Copyright 2026 The zipvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace zipvm {

using BigInt = boost::multiprecision::cpp_int;

struct SecurityParams {
  unsigned key_bits = 64;      // Ns
  unsigned mac_bits = 24;      // Nm
  unsigned address_bits = 40;  // Na
  std::uint64_t gadgets = 1;   // N

  /// Throws std::invalid_argument when a width is zero.
  void validate() const;
};

/// Brute-force attempts to hijack an N-gadget chain: 2^(Ns-1) + N * 2^(Nm-1),
/// in exact integer arithmetic. N = 0 degenerates to guessing the key.
[[nodiscard]] BigInt expected_guesses(const SecurityParams& p);

/// Probability that no valid MAC collision exists for at least one of N
/// gadgets: 1 - (1 - 1/e)^N. Throws std::invalid_argument when N == 0.
[[nodiscard]] double prob_no_valid_collision(std::uint64_t gadgets);

/// Exact probability that some of the 2^Nm candidate chain values maps onto
/// a fixed Nm-bit target: 1 - (1 - 2^-Nm)^(2^Nm). Tends to 1 - 1/e.
[[nodiscard]] double collision_existence_exact(unsigned mac_bits);
[[nodiscard]] double collision_existence_limit() noexcept;

/// Largest width the Monte Carlo estimators will enumerate.
inline constexpr unsigned kMaxEnumerableMacBits = 16;
inline constexpr std::uint64_t kMinMonteCarloTrials = 1000;

struct CollisionEstimate {
  unsigned mac_bits = 0;
  unsigned address_bits = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t hits = 0;
  double empirical = 0.0;
  double analytic = 0.0;  // collision_existence_exact(mac_bits)
  double limit = 0.0;     // 1 - 1/e
};

/// Per trial: random key, target MAC T and address A; enumerate all 2^Nm
/// chain values and record whether any maps to T. Deterministic in
/// (seed, trials) regardless of thread scheduling.
/// Throws std::invalid_argument for Nm > 16 or trials < 1000.
[[nodiscard]] CollisionEstimate montecarlo_collision_existence(unsigned mac_bits,
                                                               unsigned address_bits,
                                                               std::uint64_t trials,
                                                               std::uint64_t seed);

struct GuessCostEstimate {
  unsigned mac_bits = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  /// Trials where no preimage exists count 2^Nm guesses.
  double censored_mean = 0.0;
  /// Mean over trials with at least one preimage.
  double conditional_mean = 0.0;
  std::uint64_t existing_trials = 0;
  /// Mean over trials with exactly one preimage.
  double unique_mean = 0.0;
  std::uint64_t unique_trials = 0;
  /// 2^(Nm-1), the single-preimage expectation.
  double nominal = 0.0;
};

/// Guesses distinct random chain values (random order, no repeats) until
/// the MAC of a random address matches a random target.
/// Throws std::invalid_argument for Nm > 16 or trials < 1000.
[[nodiscard]] GuessCostEstimate montecarlo_guess_cost(unsigned mac_bits, std::uint64_t trials,
                                                      std::uint64_t seed);

struct AnalysisOptions {
  bool monte_carlo = false;
  std::uint64_t trials = 40'000;
  std::uint64_t seed = 0;
};

struct ToleranceCheck {
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;  // absolute
  bool pass = false;
};

struct AnalysisReport {
  SecurityParams params;
  BigInt expected_guesses;
  std::optional<double> prob_no_collision;  // absent when N == 0
  double collision_exact = 0.0;
  double collision_limit = 0.0;
  std::optional<CollisionEstimate> collision_mc;
  std::optional<GuessCostEstimate> guess_mc;
  std::optional<ToleranceCheck> collision_check;  // +-0.03 (+-0.05 at Nm = 1)
  std::optional<ToleranceCheck> guess_check;      // +-15% of 2^(Nm-1) (+-25% at Nm <= 2)
};

/// Analytic values, plus both Monte Carlo estimators when requested.
[[nodiscard]] AnalysisReport analyze(const SecurityParams& params, const AnalysisOptions& opts);

}  // namespace zipvm
