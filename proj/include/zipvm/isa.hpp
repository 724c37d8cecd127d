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
#include <span>
#include <string>
#include <string_view>

namespace zipvm {

inline constexpr unsigned kNumRegisters = 16;
inline constexpr unsigned kInstructionBytes = 4;

// Register conventions.
inline constexpr unsigned kRegZero = 0;
inline constexpr unsigned kRegRa = 1;
inline constexpr unsigned kRegSp = 2;
inline constexpr unsigned kRegA0 = 3;  // return value / exit value / setjmp result

enum class Opcode : std::uint8_t {
  Halt = 0x00,
  Nop = 0x01,
  Add = 0x10,
  Sub = 0x11,
  Mul = 0x12,
  And = 0x13,
  Or = 0x14,
  Xor = 0x15,
  Shl = 0x16,
  Shr = 0x17,
  Slt = 0x18,
  Sltu = 0x19,
  Addi = 0x20,
  Ori = 0x21,
  Lui = 0x22,
  Ld = 0x30,
  St = 0x31,
  Beq = 0x40,
  Bne = 0x41,
  Blt = 0x42,
  Jmp = 0x50,
  Call = 0x51,
  Ret = 0x52,
  Zip = 0x60,
  Unzip = 0x61,
  Setjmp = 0x62,
  Longjmp = 0x63,
  Print = 0x70,
};

/// Operand shape of an opcode.
enum class Format : std::uint8_t {
  None,    // halt, nop, ret, zip, unzip
  Reg3,    // op rd, rs1, rs2
  RegImm,  // op rd, rs1, imm16 (signed; ori zero-extends)
  Upper,   // lui rd, imm16
  Load,    // ld rd, imm(rs1)
  Store,   // st rs2, imm(rs1)
  Branch,  // op rs1, rs2, target (pc-relative, in instructions)
  Jump,    // op target (absolute byte address)
  Reg1,    // op rs1
  Reg2,    // op rs1, rs2
};

struct OpcodeInfo {
  Opcode op;
  std::string_view mnemonic;
  Format format;
};

/// Every defined opcode, in encoding order.
[[nodiscard]] std::span<const OpcodeInfo> opcode_table() noexcept;
[[nodiscard]] std::optional<OpcodeInfo> find_opcode(std::string_view mnemonic) noexcept;
[[nodiscard]] std::optional<OpcodeInfo> find_opcode(std::uint8_t byte) noexcept;
[[nodiscard]] std::string_view mnemonic(Opcode op) noexcept;
[[nodiscard]] Format format_of(Opcode op) noexcept;

/// A decoded instruction. `imm` holds the signed 16-bit immediate, the
/// branch offset in instructions, or the absolute jump target in bytes.
struct Instruction {
  Opcode op = Opcode::Nop;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::int64_t imm = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Fixed 32-bit encoding: opcode in bits 31..24, operands below.
/// Throws VmError if a field does not fit.
[[nodiscard]] std::uint32_t encode(const Instruction& instr);
/// Throws VmError on an undefined opcode.
[[nodiscard]] Instruction decode(std::uint32_t word);

/// True for the instructions that drive the MAC unit in Zipper mode.
[[nodiscard]] constexpr bool uses_mac_unit(Opcode op) noexcept {
  return op == Opcode::Zip || op == Opcode::Unzip || op == Opcode::Setjmp ||
         op == Opcode::Longjmp;
}

/// Renders one instruction at `pc`; branch and jump targets print as
/// absolute hex addresses.
[[nodiscard]] std::string format_instruction(const Instruction& instr,
                                             std::uint64_t pc);

}  // namespace zipvm
