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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zipvm/image.hpp"
#include "zipvm/isa.hpp"
#include "zipvm/mac.hpp"
#include "zipvm/timing.hpp"

namespace zipvm {

/// Return-address protection scheme a machine runs under.
struct ProtectionMode {
  ProtectionKind kind = ProtectionKind::Zipper;
  /// ShadowParallel: distance from the stack pointer to its shadow slot.
  std::uint64_t parallel_offset = layout::kParallelShadowOffset;
  /// ShadowCompact: fixed base; drawn from the seed when unset.
  std::optional<std::uint64_t> compact_base;

  static ProtectionMode baseline() { return {ProtectionKind::Baseline, layout::kParallelShadowOffset, std::nullopt}; }
  static ProtectionMode shadow_parallel(std::uint64_t offset = layout::kParallelShadowOffset) {
    return {ProtectionKind::ShadowParallel, offset, std::nullopt};
  }
  static ProtectionMode shadow_compact() { return {ProtectionKind::ShadowCompact, layout::kParallelShadowOffset, std::nullopt}; }
  static ProtectionMode zipper() { return {ProtectionKind::Zipper, layout::kParallelShadowOffset, std::nullopt}; }

  friend bool operator==(const ProtectionMode&, const ProtectionMode&) = default;
};

/// "baseline", "shadow-parallel", "shadow-compact" or "zipper".
[[nodiscard]] std::string_view mode_name(ProtectionKind kind) noexcept;
[[nodiscard]] std::optional<ProtectionKind> parse_mode(std::string_view name) noexcept;
[[nodiscard]] inline std::array<ProtectionKind, 4> all_modes() noexcept {
  return {ProtectionKind::Baseline, ProtectionKind::ShadowParallel,
          ProtectionKind::ShadowCompact, ProtectionKind::Zipper};
}

enum class FaultKind : std::uint8_t { ReturnMacMismatch, ShadowMismatch, JumpBufferMacMismatch };
[[nodiscard]] std::string_view fault_name(FaultKind kind) noexcept;

/// Terminal security exception: the machine stops when one is raised.
struct SecurityFault {
  FaultKind kind = FaultKind::ReturnMacMismatch;
  std::uint64_t pc = 0;
  std::uint64_t cycle = 0;
  friend bool operator==(const SecurityFault&, const SecurityFault&) = default;
};

enum class RunStatus : std::uint8_t { Running, Halted, Faulted, Error, CycleLimit };
[[nodiscard]] std::string_view status_name(RunStatus status) noexcept;

struct MachineConfig {
  ProtectionMode mode{};
  MacWidths widths{};
  bool cache_enabled = true;
  std::uint64_t seed = 0;
  std::size_t memory_bytes = layout::kMinMemoryBytes;
  bool trace = false;
};

/// Jump buffer layout in guest memory, four little-endian words.
namespace jmpbuf {
inline constexpr std::uint64_t kPc = 0;
inline constexpr std::uint64_t kSp = 8;
inline constexpr std::uint64_t kTop = 16;  // ShadowCompact keeps its shadow pointer here
inline constexpr std::uint64_t kAuth = 24;
inline constexpr std::uint64_t kBytes = 32;
}  // namespace jmpbuf

struct RunResult {
  RunStatus status = RunStatus::Running;
  std::uint64_t exit_value = 0;  // r3 at HALT
  std::optional<SecurityFault> fault;
  std::string error;  // VmError text when status == Error
  std::uint64_t cycles = 0;
  std::uint64_t instructions = 0;
  std::uint64_t stall_cycles = 0;
  std::uint64_t mac_ops = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t zip_unzip_executed = 0;
  std::uint64_t shadow_ops = 0;
  std::vector<std::uint64_t> output;  // PRINT values
  std::vector<std::string> trace;
  std::string mode_name;
  MacWidths widths{};
  bool cache_enabled = true;
  std::uint64_t seed = 0;
  std::uint64_t image_fingerprint = 0;
};

/// The toy-ISA machine: 16 x 64-bit registers, flat memory, the dedicated
/// Top/Key registers and a MAC unit. Loading happens in the constructor.
///
/// Top and Key have no architectural path to memory or general registers;
/// the const accessors below exist for the host (tests, reports) only.
class Machine {
 public:
  /// Throws zipvm::Error if the image does not fit the memory layout or the
  /// widths cannot be packed into one 64-bit register.
  Machine(const ProgramImage& image, const MachineConfig& config);

  /// Executes one instruction. Returns the status after it.
  RunStatus step();
  /// Steps until HALT, a fault, an error, or `max_cycles` is reached.
  RunResult run(std::uint64_t max_cycles);
  /// Snapshot of the outcome so far.
  [[nodiscard]] RunResult result() const;

  [[nodiscard]] RunStatus status() const noexcept { return status_; }
  [[nodiscard]] std::uint64_t pc() const noexcept { return pc_; }
  [[nodiscard]] std::uint64_t reg(unsigned i) const { return regs_.at(i); }
  void set_reg(unsigned i, std::uint64_t v);
  [[nodiscard]] const std::array<std::uint64_t, kNumRegisters>& registers() const noexcept {
    return regs_;
  }
  [[nodiscard]] MacValue top() const noexcept { return top_; }
  [[nodiscard]] MacKey key() const noexcept { return mac_.key(); }
  [[nodiscard]] const MacWidths& widths() const noexcept { return config_.widths; }
  [[nodiscard]] const MachineConfig& config() const noexcept { return config_; }
  [[nodiscard]] const ProgramImage& image() const noexcept { return image_; }
  [[nodiscard]] const TimingState& timing() const noexcept { return timing_.state(); }
  [[nodiscard]] const std::optional<SecurityFault>& fault() const noexcept { return fault_; }
  [[nodiscard]] std::uint64_t compact_shadow_base() const noexcept { return compact_base_; }

  // Guest memory, bounds-checked (VmError when out of range).
  [[nodiscard]] std::span<const std::uint8_t> memory() const noexcept { return mem_; }
  [[nodiscard]] std::uint64_t read_u64(std::uint64_t addr) const;
  void write_u64(std::uint64_t addr, std::uint64_t value);
  [[nodiscard]] std::vector<std::uint8_t> read_bytes(std::uint64_t addr, std::size_t len) const;
  void write_bytes(std::uint64_t addr, std::span<const std::uint8_t> bytes);
  /// Bytes of the data section region [data_base, kDataLimit).
  [[nodiscard]] std::span<const std::uint8_t> data_region() const;

  // Compressed return-address layout: address in the low Na bits, chain
  // value in the top Nm bits.
  [[nodiscard]] std::uint64_t pack_ra(std::uint64_t addr, MacValue mac) const noexcept;
  [[nodiscard]] std::uint64_t ra_address(std::uint64_t word) const noexcept;
  [[nodiscard]] MacValue ra_mac_field(std::uint64_t word) const noexcept;

  /// Uncached MAC under this machine's key (host-side oracle helper).
  [[nodiscard]] MacValue mac_of(std::uint64_t addr, MacValue prev) const {
    return mac_.compute_uncached(MacRequest{addr, prev});
  }

 private:
  MacActivity exec(const Instruction& in);
  MacActivity exec_call(std::uint64_t target);
  MacActivity exec_ret();
  MacActivity exec_zip();
  MacActivity exec_unzip();
  MacActivity exec_setjmp(std::uint64_t buf);
  MacActivity exec_longjmp(std::uint64_t buf, std::uint64_t value);
  MacValue mac_request(std::uint64_t addr, MacValue prev, MacActivity& activity);

  void raise(FaultKind kind);
  void write_reg(unsigned i, std::uint64_t v) noexcept {
    if (i != kRegZero) regs_[i] = v;
  }
  void check_range(std::uint64_t addr, std::uint64_t len) const;
  [[nodiscard]] std::uint64_t check_code_target(std::uint64_t addr, const char* what) const;
  [[nodiscard]] bool zipper() const noexcept {
    return config_.mode.kind == ProtectionKind::Zipper;
  }

  ProgramImage image_;
  MachineConfig config_;
  std::vector<std::uint8_t> mem_;
  std::array<std::uint64_t, kNumRegisters> regs_{};
  std::uint64_t pc_ = 0;
  MacValue top_ = 0;
  MacUnit mac_;
  TimingModel timing_;
  RunStatus status_ = RunStatus::Running;
  std::optional<SecurityFault> fault_;
  std::string error_;
  std::uint64_t instructions_ = 0;
  std::uint64_t zip_unzip_ = 0;
  std::uint64_t compact_base_ = 0;
  std::uint64_t exit_value_ = 0;
  std::vector<std::uint64_t> output_;
  std::vector<std::string> trace_;
};

}  // namespace zipvm
