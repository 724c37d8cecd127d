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
#include <string>

#include "zipvm/isa.hpp"

namespace zipvm {

enum class ProtectionKind : std::uint8_t { Baseline, ShadowParallel, ShadowCompact, Zipper };

/// MAC unit latency for one uncached computation.
inline constexpr std::uint64_t kMacLatencyCycles = 20;

struct TimingState {
  std::uint64_t cycle = 0;
  std::uint64_t mac_busy_until = 0;
  bool cache_enabled = true;
  std::uint64_t stall_cycles_total = 0;
  std::uint64_t mac_ops_total = 0;
  std::uint64_t cache_hits_total = 0;

  friend bool operator==(const TimingState&, const TimingState&) = default;
};

/// Cycle accounting for one instruction on a Zipper core.
///
/// Every instruction costs one cycle. A MAC instruction (ZIP/UNZIP) that
/// arrives while the unit is still busy first stalls until it is free. On a
/// cache miss the unit is then busy for kMacLatencyCycles from the issue
/// cycle; on a hit it stays free.
[[nodiscard]] TimingState account_instruction(TimingState t, const Instruction& instr,
                                              bool cache_hit);

/// MAC work an executed instruction generated.
struct MacActivity {
  unsigned requests = 0;
  unsigned misses = 0;
};

/// Per-mode cost model wrapped around account_instruction():
///  - Baseline: ZIP/UNZIP are absent from the binary and cost nothing.
///  - Shadow modes: CALL and RET cost one extra cycle each (push / check).
///  - Zipper: ZIP/UNZIP follow account_instruction(). SETJMP/LONGJMP pay one
///    extra issue cycle and keep the unit busy for 20 cycles per missed MAC.
class TimingModel {
 public:
  TimingModel() = default;
  TimingModel(ProtectionKind mode, bool cache_enabled);

  void account(const Instruction& instr, const MacActivity& mac);

  [[nodiscard]] const TimingState& state() const noexcept { return state_; }
  [[nodiscard]] std::uint64_t cycles() const noexcept { return state_.cycle; }
  [[nodiscard]] std::uint64_t shadow_ops() const noexcept { return shadow_ops_; }

 private:
  ProtectionKind mode_ = ProtectionKind::Baseline;
  TimingState state_{};
  std::uint64_t shadow_ops_ = 0;
};

struct RunResult;

/// Relative cost of a protected run against its unprotected twin.
struct OverheadReport {
  std::string benchmark;
  std::string mode;
  bool cache_enabled = true;
  std::uint64_t base_cycles = 0;
  std::uint64_t cycles = 0;
  double slowdown = 0.0;  // cycles / base_cycles - 1
  std::uint64_t stalls = 0;
  std::uint64_t mac_ops = 0;
  std::uint64_t cache_hits = 0;
};

/// Throws zipvm::Error when the two runs come from different images or the
/// base run has zero cycles.
[[nodiscard]] OverheadReport overhead_report(const RunResult& base, const RunResult& protected_run,
                                             const std::string& benchmark = {});

}  // namespace zipvm
