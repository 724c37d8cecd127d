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

#include "zipvm/isa.hpp"

#include <array>
#include <cstdio>

#include "zipvm/error.hpp"

namespace zipvm {
namespace {

constexpr std::array<OpcodeInfo, 28> kOpcodes = {{
    {Opcode::Halt, "halt", Format::None},
    {Opcode::Nop, "nop", Format::None},
    {Opcode::Add, "add", Format::Reg3},
    {Opcode::Sub, "sub", Format::Reg3},
    {Opcode::Mul, "mul", Format::Reg3},
    {Opcode::And, "and", Format::Reg3},
    {Opcode::Or, "or", Format::Reg3},
    {Opcode::Xor, "xor", Format::Reg3},
    {Opcode::Shl, "shl", Format::Reg3},
    {Opcode::Shr, "shr", Format::Reg3},
    {Opcode::Slt, "slt", Format::Reg3},
    {Opcode::Sltu, "sltu", Format::Reg3},
    {Opcode::Addi, "addi", Format::RegImm},
    {Opcode::Ori, "ori", Format::RegImm},
    {Opcode::Lui, "lui", Format::Upper},
    {Opcode::Ld, "ld", Format::Load},
    {Opcode::St, "st", Format::Store},
    {Opcode::Beq, "beq", Format::Branch},
    {Opcode::Bne, "bne", Format::Branch},
    {Opcode::Blt, "blt", Format::Branch},
    {Opcode::Jmp, "jmp", Format::Jump},
    {Opcode::Call, "call", Format::Jump},
    {Opcode::Ret, "ret", Format::None},
    {Opcode::Zip, "zip", Format::None},
    {Opcode::Unzip, "unzip", Format::None},
    {Opcode::Setjmp, "setjmp", Format::Reg1},
    {Opcode::Longjmp, "longjmp", Format::Reg2},
    {Opcode::Print, "print", Format::Reg1},
}};

constexpr std::int64_t kImmMin = -32768;
constexpr std::int64_t kImmMax = 32767;
constexpr std::int64_t kJumpLimit = std::int64_t{1} << 26;

std::uint32_t reg_field(unsigned reg, unsigned shift) {
  if (reg >= kNumRegisters) throw VmError("register index out of range");
  return static_cast<std::uint32_t>(reg) << shift;
}

std::uint32_t imm16_field(std::int64_t imm, bool unsigned_imm) {
  const bool fits = unsigned_imm ? (imm >= 0 && imm <= 0xFFFF)
                                 : (imm >= kImmMin && imm <= kImmMax);
  if (!fits) throw VmError("immediate out of 16-bit range: " + std::to_string(imm));
  return static_cast<std::uint32_t>(imm) & 0xFFFFu;
}

std::int64_t sext16(std::uint32_t v) {
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(v & 0xFFFFu));
}

}  // namespace

std::span<const OpcodeInfo> opcode_table() noexcept { return kOpcodes; }

std::optional<OpcodeInfo> find_opcode(std::string_view name) noexcept {
  for (const auto& info : kOpcodes) {
    if (info.mnemonic == name) return info;
  }
  return std::nullopt;
}

std::optional<OpcodeInfo> find_opcode(std::uint8_t byte) noexcept {
  for (const auto& info : kOpcodes) {
    if (static_cast<std::uint8_t>(info.op) == byte) return info;
  }
  return std::nullopt;
}

std::string_view mnemonic(Opcode op) noexcept {
  const auto info = find_opcode(static_cast<std::uint8_t>(op));
  return info ? info->mnemonic : std::string_view{"?"};
}

Format format_of(Opcode op) noexcept {
  const auto info = find_opcode(static_cast<std::uint8_t>(op));
  return info ? info->format : Format::None;
}

std::uint32_t encode(const Instruction& in) {
  const auto info = find_opcode(static_cast<std::uint8_t>(in.op));
  if (!info) throw VmError("cannot encode undefined opcode");
  std::uint32_t word = static_cast<std::uint32_t>(in.op) << 24;
  switch (info->format) {
    case Format::None:
      break;
    case Format::Reg3:
      word |= reg_field(in.rd, 20) | reg_field(in.rs1, 16) | reg_field(in.rs2, 12);
      break;
    case Format::RegImm:
      word |= reg_field(in.rd, 20) | reg_field(in.rs1, 16) |
              imm16_field(in.imm, in.op == Opcode::Ori);
      break;
    case Format::Upper:
      word |= reg_field(in.rd, 20) | imm16_field(in.imm, true);
      break;
    case Format::Load:
      word |= reg_field(in.rd, 20) | reg_field(in.rs1, 16) | imm16_field(in.imm, false);
      break;
    case Format::Store:
      word |= reg_field(in.rs2, 20) | reg_field(in.rs1, 16) | imm16_field(in.imm, false);
      break;
    case Format::Branch:
      word |= reg_field(in.rs1, 20) | reg_field(in.rs2, 16) | imm16_field(in.imm, false);
      break;
    case Format::Jump:
      if (in.imm < 0 || in.imm >= kJumpLimit || in.imm % kInstructionBytes != 0) {
        throw VmError("jump target not encodable: " + std::to_string(in.imm));
      }
      word |= static_cast<std::uint32_t>(in.imm / kInstructionBytes);
      break;
    case Format::Reg1:
      word |= reg_field(in.rs1, 16);
      break;
    case Format::Reg2:
      word |= reg_field(in.rs1, 16) | reg_field(in.rs2, 12);
      break;
  }
  return word;
}

Instruction decode(std::uint32_t word) {
  const auto info = find_opcode(static_cast<std::uint8_t>(word >> 24));
  if (!info) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "invalid opcode 0x%02x", word >> 24);
    throw VmError(buf);
  }
  Instruction in;
  in.op = info->op;
  const auto f20 = static_cast<std::uint8_t>((word >> 20) & 0xF);
  const auto f16 = static_cast<std::uint8_t>((word >> 16) & 0xF);
  const auto f12 = static_cast<std::uint8_t>((word >> 12) & 0xF);
  switch (info->format) {
    case Format::None:
      break;
    case Format::Reg3:
      in.rd = f20;
      in.rs1 = f16;
      in.rs2 = f12;
      break;
    case Format::RegImm:
      in.rd = f20;
      in.rs1 = f16;
      in.imm = in.op == Opcode::Ori ? std::int64_t{word & 0xFFFFu} : sext16(word);
      break;
    case Format::Upper:
      in.rd = f20;
      in.imm = word & 0xFFFFu;
      break;
    case Format::Load:
      in.rd = f20;
      in.rs1 = f16;
      in.imm = sext16(word);
      break;
    case Format::Store:
      in.rs2 = f20;
      in.rs1 = f16;
      in.imm = sext16(word);
      break;
    case Format::Branch:
      in.rs1 = f20;
      in.rs2 = f16;
      in.imm = sext16(word);
      break;
    case Format::Jump:
      in.imm = std::int64_t{word & 0xFFFFFFu} * kInstructionBytes;
      break;
    case Format::Reg1:
      in.rs1 = f16;
      break;
    case Format::Reg2:
      in.rs1 = f16;
      in.rs2 = f12;
      break;
  }
  return in;
}

std::string format_instruction(const Instruction& in, std::uint64_t pc) {
  const auto info = find_opcode(static_cast<std::uint8_t>(in.op));
  const std::string name(info ? info->mnemonic : "?");
  char buf[96];
  switch (info ? info->format : Format::None) {
    case Format::None:
      return name;
    case Format::Reg3:
      std::snprintf(buf, sizeof buf, "%s r%u, r%u, r%u", name.c_str(), in.rd, in.rs1, in.rs2);
      break;
    case Format::RegImm:
      std::snprintf(buf, sizeof buf, "%s r%u, r%u, %lld", name.c_str(), in.rd, in.rs1,
                    static_cast<long long>(in.imm));
      break;
    case Format::Upper:
      std::snprintf(buf, sizeof buf, "%s r%u, %lld", name.c_str(), in.rd,
                    static_cast<long long>(in.imm));
      break;
    case Format::Load:
      std::snprintf(buf, sizeof buf, "%s r%u, %lld(r%u)", name.c_str(), in.rd,
                    static_cast<long long>(in.imm), in.rs1);
      break;
    case Format::Store:
      std::snprintf(buf, sizeof buf, "%s r%u, %lld(r%u)", name.c_str(), in.rs2,
                    static_cast<long long>(in.imm), in.rs1);
      break;
    case Format::Branch:
      std::snprintf(buf, sizeof buf, "%s r%u, r%u, 0x%llx", name.c_str(), in.rs1, in.rs2,
                    static_cast<unsigned long long>(
                        static_cast<std::int64_t>(pc) + in.imm * kInstructionBytes));
      break;
    case Format::Jump:
      std::snprintf(buf, sizeof buf, "%s 0x%llx", name.c_str(),
                    static_cast<unsigned long long>(in.imm));
      break;
    case Format::Reg1:
      std::snprintf(buf, sizeof buf, "%s r%u", name.c_str(), in.rs1);
      break;
    case Format::Reg2:
      std::snprintf(buf, sizeof buf, "%s r%u, r%u", name.c_str(), in.rs1, in.rs2);
      break;
  }
  return buf;
}

}  // namespace zipvm
