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

#include <random>
#include <set>

#include "doctest.h"
#include "zipvm/error.hpp"
#include "zipvm/isa.hpp"

using namespace zipvm;

namespace {

Instruction sample_for(const OpcodeInfo& info, std::mt19937_64& rng) {
  Instruction in;
  in.op = info.op;
  const auto reg = [&] { return static_cast<std::uint8_t>(rng() % kNumRegisters); };
  switch (info.format) {
    case Format::None: break;
    case Format::Reg3: in.rd = reg(); in.rs1 = reg(); in.rs2 = reg(); break;
    case Format::RegImm:
      in.rd = reg();
      in.rs1 = reg();
      in.imm = info.op == Opcode::Ori ? static_cast<std::int64_t>(rng() % 65536)
                                      : static_cast<std::int64_t>(rng() % 65536) - 32768;
      break;
    case Format::Upper: in.rd = reg(); in.imm = static_cast<std::int64_t>(rng() % 65536); break;
    case Format::Load: in.rd = reg(); in.rs1 = reg(); in.imm = -8; break;
    case Format::Store: in.rs1 = reg(); in.rs2 = reg(); in.imm = 16; break;
    case Format::Branch: in.rs1 = reg(); in.rs2 = reg(); in.imm = -3; break;
    case Format::Jump: in.imm = 0x1000 + 4 * static_cast<std::int64_t>(rng() % 1000); break;
    case Format::Reg1: in.rs1 = reg(); break;
    case Format::Reg2: in.rs1 = reg(); in.rs2 = reg(); break;
  }
  return in;
}

}  // namespace

TEST_CASE("every opcode survives an encode/decode round trip") {
  std::mt19937_64 rng(17);
  for (const auto& info : opcode_table()) {
    CAPTURE(info.mnemonic);
    for (int i = 0; i < 50; ++i) {
      const auto in = sample_for(info, rng);
      const auto word = encode(in);
      CHECK((word >> 24) == static_cast<std::uint32_t>(info.op));
      CHECK(decode(word) == in);
    }
  }
}

TEST_CASE("opcode table is consistent with the lookup helpers") {
  std::set<std::string_view> names;
  for (const auto& info : opcode_table()) {
    CHECK(names.insert(info.mnemonic).second);
    CHECK(find_opcode(info.mnemonic)->op == info.op);
    CHECK(find_opcode(static_cast<std::uint8_t>(info.op))->op == info.op);
    CHECK(mnemonic(info.op) == info.mnemonic);
    CHECK(format_of(info.op) == info.format);
  }
  CHECK_FALSE(find_opcode("bogus"));
  CHECK_FALSE(find_opcode(std::uint8_t{0xff}));
}

TEST_CASE("only the protection instructions use the MAC unit") {
  int count = 0;
  for (const auto& info : opcode_table()) count += uses_mac_unit(info.op) ? 1 : 0;
  CHECK(count == 4);
  CHECK(uses_mac_unit(Opcode::Zip));
  CHECK(uses_mac_unit(Opcode::Unzip));
  CHECK(uses_mac_unit(Opcode::Setjmp));
  CHECK(uses_mac_unit(Opcode::Longjmp));
}

TEST_CASE("decode rejects undefined opcodes") {
  CHECK_THROWS_AS((void)decode(0xff000000u), VmError);
  CHECK_THROWS_AS((void)decode(0x02000000u), VmError);
}

TEST_CASE("encode rejects fields that do not fit") {
  CHECK_THROWS_AS((void)encode({Opcode::Addi, 1, 1, 0, 40000}), VmError);
  CHECK_THROWS_AS((void)encode({Opcode::Add, 16, 0, 0, 0}), VmError);
  CHECK_THROWS_AS((void)encode({Opcode::Call, 0, 0, 0, 0x1002}), VmError);
}

TEST_CASE("format_instruction renders absolute targets and memory operands") {
  CHECK(format_instruction({Opcode::Call, 0, 0, 0, 0x1040}, 0x1000) == "call 0x1040");
  CHECK(format_instruction({Opcode::Beq, 0, 4, 0, -2}, 0x1010) == "beq r4, r0, 0x1008");
  CHECK(format_instruction({Opcode::Ld, 1, 2, 0, 8}, 0x1000) == "ld r1, 8(r2)");
  CHECK(format_instruction({Opcode::St, 0, 2, 1, 8}, 0x1000) == "st r1, 8(r2)");
  CHECK(format_instruction({Opcode::Zip, 0, 0, 0, 0}, 0x1000) == "zip");
}
