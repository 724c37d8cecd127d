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
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle/keccak_reference.hpp"
#include "gen_programs.hpp"
#include "support.hpp"
#include "zipvm/assembler.hpp"
#include "zipvm/error.hpp"
#include "zipvm/machine.hpp"

using namespace zipvm;
using testing::config;

namespace {

std::uint64_t oracle_mac(const Machine& m, std::uint64_t addr, std::uint64_t prev) {
  const auto& w = m.widths();
  return oracle::mac_reference(m.key().bits, addr, prev, w.address_bits, w.mac_bits);
}

void step_until(Machine& m, std::uint64_t pc) {
  while (m.status() == RunStatus::Running && m.pc() != pc) m.step();
  REQUIRE(m.pc() == pc);
}

std::uint64_t factorial(unsigned n) { return n <= 1 ? 1 : n * factorial(n - 1); }

constexpr std::string_view kZipUnzip = "main:\n li ra, 0x1234\n zip\n unzip\n halt\n";

}  // namespace

TEST_CASE("recursive factorial halts with the right value in every mode") {
  const auto img = testing::sample("fact");
  for (auto kind : all_modes()) {
    CAPTURE(mode_name(kind));
    const auto r = testing::run(img, config(kind, 3));
    CHECK(r.status == RunStatus::Halted);
    CHECK_FALSE(r.fault);
    CHECK(r.exit_value == factorial(10));
    REQUIRE(r.output.size() == 1);
    CHECK(r.output[0] == factorial(10));
  }
}

TEST_CASE("loading is deterministic in the seed") {
  const auto img = testing::sample("fact");
  Machine a(img, config(ProtectionKind::Zipper, 9));
  Machine b(img, config(ProtectionKind::Zipper, 9));
  CHECK(a.top() == b.top());
  CHECK(a.key() == b.key());
  CHECK(std::equal(a.memory().begin(), a.memory().end(), b.memory().begin()));
  const auto ra = a.run(100000);
  const auto rb = b.run(100000);
  CHECK(ra.cycles == rb.cycles);
  CHECK(a.registers() == b.registers());
  CHECK(std::equal(a.memory().begin(), a.memory().end(), b.memory().begin()));
}

TEST_CASE("different seeds draw different top and key") {
  const auto img = testing::sample("fact");
  for (std::uint64_t s = 0; s < 100; ++s) {
    Machine a(img, config(ProtectionKind::Zipper, 2 * s));
    Machine b(img, config(ProtectionKind::Zipper, 2 * s + 1));
    CHECK(a.key() != b.key());
    CHECK(a.top() != b.top());
  }
}

TEST_CASE("fresh machine state") {
  Machine m(testing::sample("fact"), config(ProtectionKind::Zipper, 1));
  CHECK(m.status() == RunStatus::Running);
  CHECK_FALSE(m.fault());
  CHECK(m.top() < (1ull << 24));
  CHECK(m.reg(kRegSp) == layout::kStackTop);
  CHECK(m.timing().cycle == 0);
  CHECK(m.pc() == m.image().entry);
}

TEST_CASE("loader rejects configurations that cannot hold the program") {
  const auto img = testing::sample("fact");
  auto cfg = config(ProtectionKind::Zipper);
  cfg.widths = {48, 24};
  CHECK_THROWS_AS(Machine(img, cfg), Error);
  cfg.widths = {16, 24};
  CHECK_THROWS_AS(Machine(img, cfg), Error);
  cfg = config(ProtectionKind::Zipper);
  cfg.memory_bytes = 4096;
  CHECK_THROWS_AS(Machine(img, cfg), Error);
}

TEST_CASE("alu wraps modulo 2^64 and halt reports r3") {
  const auto r = testing::run_source(
      "main:\n li r4, -1\n li r5, 2\n add r3, r4, r5\n halt\n", config(ProtectionKind::Baseline));
  CHECK(r.status == RunStatus::Halted);
  CHECK(r.exit_value == 1);
}

TEST_CASE("loads past the end of memory are errors") {
  const auto r = testing::run_source("main:\n li r4, 0x7fff\n shl r4, r4, r4\n ld r5, 0(r4)\n halt\n",
                                     config(ProtectionKind::Zipper));
  CHECK(r.status == RunStatus::Error);
  CHECK(r.error.find("out of bounds") != std::string::npos);
}

TEST_CASE("returning to a non-code address is an error") {
  const auto r = testing::run_source("main:\n li ra, 0x20000\n ret\n", config(ProtectionKind::Baseline));
  CHECK(r.status == RunStatus::Error);
}

TEST_CASE("max_cycles of zero returns immediately") {
  Machine m(testing::sample("fact"), config(ProtectionKind::Zipper));
  const auto r = m.run(0);
  CHECK(r.cycles == 0);
  CHECK(r.instructions == 0);
  CHECK(r.status == RunStatus::CycleLimit);
}

TEST_CASE("call writes the return address and leaves top alone") {
  const auto img = assemble("main:\n nop\n call f\n halt\n.rawfunc f\n ret\n.endfunc\n");
  for (auto kind : all_modes()) {
    Machine m(img, config(kind, 4));
    const auto top = m.top();
    m.step();
    const auto call_pc = m.pc();
    m.step();
    CHECK(m.reg(kRegRa) == call_pc + 4);
    CHECK(m.pc() == img.symbol("f"));
    CHECK(m.top() == top);
    if (kind == ProtectionKind::ShadowParallel) {
      CHECK(m.read_u64(layout::kStackTop + layout::kParallelShadowOffset) == call_pc + 4);
    }
    if (kind == ProtectionKind::ShadowCompact) {
      CHECK(m.read_u64(m.compact_shadow_base()) == call_pc + 4);
      CHECK(m.read_u64(layout::kShadowPtrSlot) == m.compact_shadow_base() + 8);
    }
  }
}

TEST_CASE("zip chains the return address into top and unzip restores it") {
  Machine m(assemble(kZipUnzip), config(ProtectionKind::Zipper, 21));
  const auto t0 = m.top();
  m.step();
  m.step();
  CHECK(m.top() == oracle_mac(m, 0x1234, t0));
  CHECK(m.reg(kRegRa) == ((t0 << 40) | 0x1234));
  CHECK(m.ra_address(m.reg(kRegRa)) == 0x1234);
  CHECK(m.ra_mac_field(m.reg(kRegRa)) == t0);
  m.step();
  CHECK_FALSE(m.fault());
  CHECK(m.top() == t0);
  CHECK(m.reg(kRegRa) == 0x1234);
}

TEST_CASE("same address under a different prior top gives a different top") {
  Machine m(assemble("main:\n li ra, 0x1234\n zip\n li ra, 0x1234\n zip\n halt\n"),
            config(ProtectionKind::Zipper, 8));
  const auto t0 = m.top();
  m.step();
  m.step();
  const auto t1 = m.top();
  m.step();
  m.step();
  const auto t2 = m.top();
  CHECK(t1 == oracle_mac(m, 0x1234, t0));
  CHECK(t2 == oracle_mac(m, 0x1234, t1));
  CHECK(t1 != t2);
}

TEST_CASE("zip and unzip are no-ops outside Zipper mode") {
  for (auto kind : {ProtectionKind::Baseline, ProtectionKind::ShadowParallel,
                    ProtectionKind::ShadowCompact}) {
    Machine m(assemble(kZipUnzip), config(kind, 2));
    const auto t0 = m.top();
    m.run(100);
    CHECK(m.top() == t0);
    CHECK(m.reg(kRegRa) == 0x1234);
    CHECK(m.result().zip_unzip_executed == 0);
  }
}

TEST_CASE("flipping any bit of the zipped return address faults at unzip") {
  const auto img = assemble(kZipUnzip);
  for (unsigned bit = 0; bit < 64; ++bit) {
    CAPTURE(bit);
    Machine m(img, config(ProtectionKind::Zipper, 100 + bit));
    m.step();
    m.step();
    m.set_reg(kRegRa, m.reg(kRegRa) ^ (1ull << bit));
    m.step();
    REQUIRE(m.fault());
    CHECK(m.fault()->kind == FaultKind::ReturnMacMismatch);
    CHECK(m.status() == RunStatus::Faulted);
  }
}

TEST_CASE("single-bit tampering at Nm=8 goes unnoticed at about 2^-8") {
  const auto img = assemble(kZipUnzip);
  std::mt19937_64 rng(77);
  const int trials = 20000;
  int undetected = 0;
  for (int t = 0; t < trials; ++t) {
    Machine m(img, config(ProtectionKind::Zipper, static_cast<std::uint64_t>(t), true, 8, 40));
    m.step();
    m.step();
    // Only the address and MAC fields carry meaning; the middle bits are ignored.
    const unsigned pick = rng() % 48;
    const unsigned bit = pick < 40 ? pick : 56 + (pick - 40);
    m.set_reg(kRegRa, m.reg(kRegRa) ^ (1ull << bit));
    m.step();
    undetected += m.fault() ? 0 : 1;
  }
  const double rate = undetected / double(trials);
  CHECK(rate >= 0.5 / 256);
  CHECK(rate <= 1.5 / 256);
}

TEST_CASE("replaying a spilled word from another call path faults") {
  const auto img = testing::sample("vuln_suite");
  const auto vuln_ret = img.symbol("vuln_ret");
  Machine m(img, config(ProtectionKind::Zipper, 12));
  step_until(m, vuln_ret);
  const auto slot = m.reg(kRegSp) + 8;
  const auto first = m.read_u64(slot);
  m.step();
  step_until(m, vuln_ret);
  REQUIRE(m.reg(kRegSp) + 8 == slot);
  const auto second = m.read_u64(slot);
  CHECK(m.ra_address(first) != m.ra_address(second));
  CHECK(first != second);
  m.write_u64(slot, first);
  m.run(10000);
  REQUIRE(m.fault());
  CHECK(m.fault()->kind == FaultKind::ReturnMacMismatch);
}

TEST_CASE("shadow stacks catch a lone overwrite but not a matched pair") {
  const auto img = testing::sample("vuln_suite");
  const auto win = img.symbol("win");
  for (bool both : {false, true}) {
    Machine m(img, config(ProtectionKind::ShadowParallel, 1));
    step_until(m, img.symbol("vuln_ret"));
    const auto sp = m.reg(kRegSp);
    m.write_u64(sp + 8, win);
    if (both) m.write_u64(sp + 16 + layout::kParallelShadowOffset, win);
    const auto r = m.run(10000);
    if (both) {
      CHECK_FALSE(r.fault);
      CHECK(r.exit_value == 0x666);
    } else {
      REQUIRE(r.fault);
      CHECK(r.fault->kind == FaultKind::ShadowMismatch);
    }
  }
}

TEST_CASE("baseline follows a tampered return address") {
  const auto img = testing::sample("vuln_suite");
  Machine m(img, config(ProtectionKind::Baseline));
  step_until(m, img.symbol("vuln_ret"));
  m.write_u64(m.reg(kRegSp) + 8, img.symbol("win"));
  const auto r = m.run(10000);
  CHECK(r.status == RunStatus::Halted);
  CHECK(r.exit_value == 0x666);
}

TEST_CASE("nested zips unwind back to the load-time top") {
  std::mt19937_64 rng(2024);
  for (int seed = 0; seed < 100; ++seed) {
    const unsigned depth = 1 + static_cast<unsigned>(rng() % 64);
    const auto img = assemble(testing::chain_program(rng, depth));
    Machine m(img, config(ProtectionKind::Zipper, static_cast<std::uint64_t>(seed)));
    const auto t0 = m.top();
    unsigned live = 0, max_live = 0;
    while (m.status() == RunStatus::Running) {
      const auto op = img.code[(m.pc() - img.code_base) / 4].op;
      m.step();
      if (op == Opcode::Zip) max_live = std::max(max_live, ++live);
      if (op == Opcode::Unzip) {
        --live;
        if (live == 0) REQUIRE(m.top() == t0);
      }
    }
    CAPTURE(depth);
    CHECK(m.status() == RunStatus::Halted);
    CHECK_FALSE(m.fault());
    CHECK(max_live >= depth - 1);
    CHECK(m.top() == t0);
  }
}

TEST_CASE("setjmp writes an authenticated jump buffer") {
  const auto img = assemble(".data\njb: .zero 32\n.text\nmain:\n la r5, jb\n setjmp r5\n halt\n");
  const auto jb = img.symbol("jb");
  Machine m(img, config(ProtectionKind::Zipper, 31));
  m.run(100);
  const auto pc = m.read_u64(jb + jmpbuf::kPc);
  const auto sp = m.read_u64(jb + jmpbuf::kSp);
  CHECK(pc == img.code_base + 3 * 4);
  CHECK(sp == layout::kStackTop);
  CHECK(m.read_u64(jb + jmpbuf::kTop) == m.top());
  CHECK(m.read_u64(jb + jmpbuf::kAuth) == oracle_mac(m, sp, oracle_mac(m, pc, m.top())));
  CHECK(m.reg(kRegA0) == 0);

  for (auto kind : {ProtectionKind::Baseline, ProtectionKind::ShadowParallel}) {
    Machine b(img, config(kind, 31));
    b.run(100);
    CHECK(b.read_u64(jb + jmpbuf::kTop) == 0);
    CHECK(b.read_u64(jb + jmpbuf::kAuth) == 0);
  }
}

TEST_CASE("setjmp/longjmp round trip keeps top and resumes after setjmp") {
  const auto img = testing::sample("setjmp_heavy");
  for (auto kind : all_modes()) {
    CAPTURE(mode_name(kind));
    Machine m(img, config(kind, 5));
    const auto t0 = m.top();
    const auto r = m.run(1'000'000);
    CHECK(r.status == RunStatus::Halted);
    CHECK(r.exit_value == 100);
    CHECK(m.top() == t0);
  }
}

TEST_CASE("longjmp value zero is delivered as one") {
  const auto r = testing::run_source(
      ".data\njb: .zero 32\n.text\nmain:\n la r5, jb\n setjmp r5\n bne r3, zero, out\n"
      " longjmp r5, zero\nout:\n halt\n",
      config(ProtectionKind::Zipper, 2));
  CHECK(r.status == RunStatus::Halted);
  CHECK(r.exit_value == 1);
}

TEST_CASE("tampered jump buffers fault") {
  const auto img = assemble(
      ".data\njb: .zero 32\n.text\nmain:\n la r5, jb\n setjmp r5\n bne r3, zero, out\n"
      "go:\n longjmp r5, r6\nout:\n halt\n");
  const auto jb = img.symbol("jb");
  struct Case {
    std::uint64_t offset;
    std::uint64_t value;
  };
  for (const auto& c : {Case{jmpbuf::kTop, 0x5}, Case{jmpbuf::kPc, 0}, Case{jmpbuf::kSp, 0x7f000},
                        Case{jmpbuf::kAuth, 0x1}}) {
    Machine m(img, config(ProtectionKind::Zipper, 41));
    step_until(m, img.symbol("go"));
    const auto field = c.offset == jmpbuf::kPc ? img.symbol("out") : c.value;
    m.write_u64(jb + c.offset, m.read_u64(jb + c.offset) == field ? field + 1 : field);
    const auto r = m.run(1000);
    REQUIRE(r.fault);
    CHECK(r.fault->kind == FaultKind::JumpBufferMacMismatch);
  }
}

TEST_CASE("a buffer forged without the key is accepted only by chance") {
  const auto img = assemble(
      ".data\njb: .zero 32\n.text\nmain:\n la r5, jb\n setjmp r5\n bne r3, zero, out\n"
      "go:\n longjmp r5, r6\nout:\n halt\nwin:\n halt\n");
  const auto jb = img.symbol("jb");
  std::mt19937_64 rng(5150);
  const int trials = 10000;
  int accepted = 0;
  for (int t = 0; t < trials; ++t) {
    Machine m(img, config(ProtectionKind::Zipper, static_cast<std::uint64_t>(t), true, 8, 40));
    step_until(m, img.symbol("go"));
    m.write_u64(jb + jmpbuf::kPc, img.symbol("win"));
    m.write_u64(jb + jmpbuf::kAuth, rng() & 0xff);
    m.run(100);
    accepted += m.fault() ? 0 : 1;
  }
  const double rate = accepted / double(trials);
  CHECK(rate >= 0.5 / 256);
  CHECK(rate <= 2.0 / 256);
}

TEST_CASE("instructions other than the protection ones never depend on top or key") {
  // Two machines that differ only in seed (so in top and key) must stay in
  // lock-step through every non-MAC opcode.
  const auto img = assemble(R"(
.data
buf: .zero 64
.text
main:
    li r4, 1234
    li r5, -77
    add r6, r4, r5
    sub r6, r6, r4
    mul r7, r4, r5
    and r8, r4, r5
    or r8, r8, r4
    xor r9, r8, r7
    li r10, 3
    shl r9, r9, r10
    shr r9, r9, r10
    slt r11, r5, r4
    sltu r12, r5, r4
    ori r12, r12, 0xff00
    lui r13, 0x4
    la r14, buf
    st r9, 8(r14)
    ld r15, 8(r14)
    beq r4, r4, next
    nop
next:
    bne r4, r5, next2
    nop
next2:
    blt r5, r4, next3
    nop
next3:
    jmp next4
    nop
next4:
    call leaf
    print r15
    halt
.rawfunc leaf
    ret
.endfunc
)");
  for (auto kind : all_modes()) {
    auto ca = config(kind, 1000);
    auto cb = config(kind, 2000);
    ca.mode.compact_base = cb.mode.compact_base = 0xD0000;
    Machine a(img, ca);
    Machine b(img, cb);
    REQUIRE(a.key() != b.key());
    const auto top_a = a.top();
    const auto top_b = b.top();
    while (a.status() == RunStatus::Running) {
      a.step();
      b.step();
      REQUIRE(a.registers() == b.registers());
      REQUIRE(a.pc() == b.pc());
      REQUIRE(std::equal(a.memory().begin(), a.memory().end(), b.memory().begin()));
      REQUIRE(a.top() == top_a);
      REQUIRE(b.top() == top_b);
      for (auto r : a.registers()) REQUIRE(r != a.key().bits);
    }
    CHECK(a.status() == RunStatus::Halted);
  }
}

TEST_CASE("trace has one stable line per instruction") {
  auto cfg = config(ProtectionKind::Zipper, 0);
  cfg.trace = true;
  Machine m(assemble(kZipUnzip), cfg);
  const auto r = m.run(1000);
  REQUIRE(r.trace.size() == r.instructions);
  CHECK(r.trace[0] == "0 0x1000 addi -");
  CHECK(r.trace[2].find(" unzip -") != std::string::npos);
  CHECK(r.trace.back().find(" halt -") != std::string::npos);
}

TEST_CASE("benign runs are architecturally identical across modes") {
  for (const char* name : {"fact", "deep_recursion", "call_dense", "leaf_dense", "setjmp_heavy",
                    "vuln_suite"}) {
    CAPTURE(name);
    const auto img = testing::sample(name);
    Machine ref(img, config(ProtectionKind::Baseline, 6));
    const auto rr = ref.run(10'000'000);
    REQUIRE(rr.status == RunStatus::Halted);
    for (auto kind : all_modes()) {
      Machine m(img, config(kind, 6));
      const auto r = m.run(10'000'000);
      CHECK(r.status == RunStatus::Halted);
      CHECK(r.exit_value == rr.exit_value);
      CHECK(r.output == rr.output);
      CAPTURE(mode_name(kind));
      CHECK(testing::masked_data(m) == testing::masked_data(ref));
      CAPTURE(mode_name(kind));
      for (unsigned i = 3; i < kNumRegisters; ++i) CHECK(m.reg(i) == ref.reg(i));
    }
  }
}
