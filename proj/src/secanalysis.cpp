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

#include "zipvm/secanalysis.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "zipvm/mac.hpp"
#include "parallel.hpp"

namespace zipvm {
namespace {

void check_mc_args(unsigned mac_bits, std::uint64_t trials) {
  if (mac_bits < 1 || mac_bits > kMaxEnumerableMacBits) {
    throw std::invalid_argument("Monte Carlo needs 1 <= Nm <= " +
                                std::to_string(kMaxEnumerableMacBits) + ", got " +
                                std::to_string(mac_bits));
  }
  if (trials < kMinMonteCarloTrials) {
    throw std::invalid_argument("Monte Carlo needs at least " +
                                std::to_string(kMinMonteCarloTrials) + " trials");
  }
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

struct Trial {
  MacKey key;
  MacWidths widths;
  std::uint64_t address = 0;
  MacValue target = 0;
};

Trial draw_trial(std::mt19937_64& rng, unsigned mac_bits, unsigned address_bits) {
  Trial t;
  t.widths = MacWidths{address_bits, mac_bits};
  t.key.bits = rng();
  t.address = rng() & t.widths.address_mask();
  t.target = rng() & t.widths.mac_mask();
  return t;
}

ToleranceCheck within(double value, double target, double tolerance) {
  return {value, target, tolerance, std::fabs(value - target) <= tolerance};
}

}  // namespace

void SecurityParams::validate() const {
  if (key_bits == 0 || mac_bits == 0 || address_bits == 0) {
    throw std::invalid_argument("Ns, Nm and Na must be positive");
  }
}

BigInt expected_guesses(const SecurityParams& p) {
  p.validate();
  const BigInt one = 1;
  return (one << (p.key_bits - 1)) + BigInt(p.gadgets) * (one << (p.mac_bits - 1));
}

double prob_no_valid_collision(std::uint64_t gadgets) {
  if (gadgets == 0) throw std::invalid_argument("gadget count must be at least 1");
  return 1.0 - std::pow(1.0 - 1.0 / std::numbers::e, static_cast<double>(gadgets));
}

double collision_existence_exact(unsigned mac_bits) {
  if (mac_bits == 0 || mac_bits > 64) throw std::invalid_argument("Nm must be in [1, 64]");
  const double space = std::ldexp(1.0, static_cast<int>(mac_bits));
  return -std::expm1(space * std::log1p(-1.0 / space));
}

double collision_existence_limit() noexcept { return 1.0 - 1.0 / std::numbers::e; }

CollisionEstimate montecarlo_collision_existence(unsigned mac_bits, unsigned address_bits,
                                                 std::uint64_t trials, std::uint64_t seed) {
  check_mc_args(mac_bits, trials);
  MacWidths{address_bits, mac_bits}.validate();
  const std::uint64_t space = std::uint64_t{1} << mac_bits;
  std::vector<char> found(trials, 0);
  detail::parallel_for(trials, [&](std::size_t i) {
    auto rng = trial_rng(seed, i);
    const Trial t = draw_trial(rng, mac_bits, address_bits);
    for (std::uint64_t m = 0; m < space; ++m) {
      if (compute_mac(t.key, {t.address, m}, t.widths) == t.target) {
        found[i] = 1;
        break;
      }
    }
  });
  CollisionEstimate est;
  est.mac_bits = mac_bits;
  est.address_bits = address_bits;
  est.trials = trials;
  est.seed = seed;
  for (char f : found) est.hits += static_cast<std::uint64_t>(f);
  est.empirical = static_cast<double>(est.hits) / static_cast<double>(trials);
  est.analytic = collision_existence_exact(mac_bits);
  est.limit = collision_existence_limit();
  return est;
}

GuessCostEstimate montecarlo_guess_cost(unsigned mac_bits, std::uint64_t trials,
                                        std::uint64_t seed) {
  check_mc_args(mac_bits, trials);
  constexpr unsigned kAddressBits = 40;
  const std::uint64_t space = std::uint64_t{1} << mac_bits;
  struct Outcome {
    std::uint64_t guesses = 0;
    std::uint64_t preimages = 0;
  };
  std::vector<Outcome> out(trials);
  detail::parallel_for(trials, [&](std::size_t i) {
    auto rng = trial_rng(seed, i);
    const Trial t = draw_trial(rng, mac_bits, kAddressBits);
    std::vector<char> hit(space, 0);
    for (std::uint64_t m = 0; m < space; ++m) {
      if (compute_mac(t.key, {t.address, m}, t.widths) == t.target) {
        hit[m] = 1;
        ++out[i].preimages;
      }
    }
    if (out[i].preimages == 0) {
      out[i].guesses = space;
      return;
    }
    // Lazy Fisher-Yates: each guess is a fresh uniformly random untried value.
    std::vector<std::uint32_t> order(space);
    for (std::uint64_t m = 0; m < space; ++m) order[m] = static_cast<std::uint32_t>(m);
    for (std::uint64_t k = 0; k < space; ++k) {
      std::uniform_int_distribution<std::uint64_t> pick(k, space - 1);
      std::swap(order[k], order[pick(rng)]);
      if (hit[order[k]]) {
        out[i].guesses = k + 1;
        return;
      }
    }
  });

  GuessCostEstimate est;
  est.mac_bits = mac_bits;
  est.trials = trials;
  est.seed = seed;
  est.nominal = std::ldexp(1.0, static_cast<int>(mac_bits) - 1);
  double all = 0, cond = 0, uniq = 0;
  for (const auto& o : out) {
    all += static_cast<double>(o.guesses);
    if (o.preimages > 0) {
      cond += static_cast<double>(o.guesses);
      ++est.existing_trials;
    }
    if (o.preimages == 1) {
      uniq += static_cast<double>(o.guesses);
      ++est.unique_trials;
    }
  }
  est.censored_mean = all / static_cast<double>(trials);
  if (est.existing_trials) est.conditional_mean = cond / static_cast<double>(est.existing_trials);
  if (est.unique_trials) est.unique_mean = uniq / static_cast<double>(est.unique_trials);
  return est;
}

AnalysisReport analyze(const SecurityParams& params, const AnalysisOptions& opts) {
  params.validate();
  AnalysisReport r;
  r.params = params;
  r.expected_guesses = expected_guesses(params);
  if (params.gadgets > 0) r.prob_no_collision = prob_no_valid_collision(params.gadgets);
  r.collision_exact = collision_existence_exact(params.mac_bits);
  r.collision_limit = collision_existence_limit();
  if (!opts.monte_carlo) return r;

  r.collision_mc =
      montecarlo_collision_existence(params.mac_bits, params.address_bits, opts.trials, opts.seed);
  r.guess_mc = montecarlo_guess_cost(params.mac_bits, opts.trials, opts.seed);
  const double ctol = params.mac_bits == 1 ? 0.05 : 0.03;
  r.collision_check = within(r.collision_mc->empirical, r.collision_mc->analytic, ctol);
  const double gtol = (params.mac_bits <= 2 ? 0.25 : 0.15) * r.guess_mc->nominal;
  r.guess_check = within(r.guess_mc->conditional_mean, r.guess_mc->nominal, gtol);
  return r;
}

}  // namespace zipvm
