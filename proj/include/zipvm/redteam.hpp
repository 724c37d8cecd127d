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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zipvm/error.hpp"
#include "zipvm/machine.hpp"

namespace zipvm {

/// What the attacker may do. Nothing here reaches the Top or Key registers;
/// `knows_key` only hands the key value to the `mac` action.
struct AttackerCapabilities {
  bool read_memory = true;
  bool write_memory = true;
  bool knows_key = false;
  bool knows_layout = true;  // stack pointer at the trigger and layout constants
};

enum class ActionKind : std::uint8_t {
  Read,          // read  $v ADDR          $v = mem64[ADDR]
  Write,         // write ADDR VALUE        mem64[ADDR] = VALUE
  Mac,           // mac   $v ADDR PREV     $v = MAC under the leaked key
  Pack,          // pack  $v ADDR MAC      $v = compressed return-address word
  Guess,         // guess $v               $v = uniformly random Nm-bit value
  LocateShadow,  // locate_shadow $v       $v = leaked compact shadow stack pointer
  // Register tampering is outside the threat model; these parse so that
  // validation can reject them.
  WriteTop,
  WriteKey,
  ReadTop,
  ReadKey,
};

/// One attacker step. Operands are expressions: sums/differences of numbers,
/// `sp`, `@symbol`, `$var`, `%layout_constant`, `addr(x)` and `macf(x)`.
struct AttackAction {
  ActionKind kind = ActionKind::Read;
  std::string var;
  std::vector<std::string> operands;
  std::size_t line = 0;
};

/// Fires before the instruction at `pc` executes for the `hit`-th time,
/// or once the cycle counter reaches `cycle`.
struct AttackTrigger {
  std::optional<std::string> pc;  // expression, usually @label
  std::optional<std::uint64_t> cycle;
  unsigned hit = 1;
};

struct AttackStage {
  AttackTrigger trigger;
  std::vector<AttackAction> actions;
};

struct AttackScenario {
  std::string name;
  std::string description;
  std::string program;         // built-in program name, or "" when source is inline
  std::string program_source;  // assembly text
  AttackerCapabilities caps;
  std::vector<AttackStage> stages;
  std::string goal;  // expression for the address the attacker tries to reach
  std::optional<unsigned> mac_bits;
  bool probabilistic = false;  // outcome depends on guessing
};

enum class Verdict : std::uint8_t { Detected, Bypassed, Failed };
[[nodiscard]] std::string_view verdict_name(Verdict v) noexcept;

struct AttackReport {
  std::string scenario;
  ProtectionKind mode = ProtectionKind::Zipper;
  Verdict verdict = Verdict::Failed;
  std::optional<FaultKind> fault;
  std::uint64_t cycles = 0;
  std::uint64_t seed = 0;
  std::string diagnostic;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// Returns every capability violation in the scenario (empty when valid).
[[nodiscard]] std::vector<std::string> validate_scenario(const AttackScenario& scenario);

/// Runs the scenario's program under `mode`, executes each stage's actions at
/// its trigger and classifies the outcome. Bypassed means the goal address
/// was reached after the last stage fired, without a fault. Throws
/// ScenarioError if the scenario fails validation.
[[nodiscard]] AttackReport attach_and_run(const AttackScenario& scenario, ProtectionKind mode,
                                          std::uint64_t seed,
                                          std::uint64_t max_cycles = 1'000'000);

/// Runs the scenario's program with no attacker attached.
[[nodiscard]] RunResult benign_run(const AttackScenario& scenario, ProtectionKind mode,
                                   std::uint64_t seed, std::uint64_t max_cycles = 1'000'000);

/// The built-in scenarios: direct_overwrite, rop_chain_overwrite,
/// replay_old_path, forge_with_leaked_key, parallel_shadow_attack,
/// compact_shadow_attack and brute_force_top.
[[nodiscard]] std::vector<AttackScenario> scenario_library();

/// Declarative scenario text (see README for the format). `base_dir`
/// resolves `program_file` paths.
[[nodiscard]] std::vector<AttackScenario> parse_scenarios(
    std::string_view text, const std::filesystem::path& base_dir = {});
[[nodiscard]] std::vector<AttackScenario> load_scenario_file(const std::filesystem::path& path);

struct ModeTally {
  ProtectionKind mode = ProtectionKind::Zipper;
  std::uint64_t applied = 0;
  std::uint64_t secured = 0;
  std::uint64_t bypassed = 0;
  std::uint64_t failed = 0;
  std::uint64_t benign_runs = 0;
  std::uint64_t false_positives = 0;
};

struct DetectionMatrix {
  std::vector<std::string> scenarios;
  std::vector<ProtectionKind> modes;
  std::uint64_t base_seed = 0;
  std::uint64_t runs_per_cell = 1;
  std::vector<AttackReport> reports;  // scenario-major, then mode, then seed
  std::vector<ModeTally> tallies;     // one per mode, in `modes` order

  [[nodiscard]] const ModeTally& tally(ProtectionKind mode) const;
  /// Reports for one (scenario, mode) cell.
  [[nodiscard]] std::vector<AttackReport> cell(const std::string& scenario,
                                               ProtectionKind mode) const;
  /// True when Zipper (if present) detected every non-probabilistic scenario
  /// and produced no benign false positives.
  [[nodiscard]] bool zipper_clean(std::span<const AttackScenario> scenarios) const;
};

/// Every (scenario, mode) pair over seeds base_seed .. base_seed+runs-1, plus
/// one benign run per (scenario program, mode, seed). Cells run on worker
/// threads; the output order is fixed.
[[nodiscard]] DetectionMatrix run_matrix(std::span<const AttackScenario> scenarios,
                                         std::span<const ProtectionKind> modes,
                                         std::uint64_t base_seed, std::uint64_t runs = 1);

/// Fraction of brute_force_top attempts that reach the goal under Zipper at
/// `mac_bits`, one fresh machine per attempt.
[[nodiscard]] double brute_force_bypass_rate(std::uint64_t attempts, unsigned mac_bits,
                                             std::uint64_t seed);

}  // namespace zipvm
