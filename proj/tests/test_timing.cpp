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

#include <sstream>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "zipvm/error.hpp"
#include "zipvm/timing.hpp"

using namespace zipvm;
using testing::config;

namespace {

const Instruction kZip{Opcode::Zip};
const Instruction kUnzip{Opcode::Unzip};
const Instruction kNop{Opcode::Nop};

TimingState after_gap(unsigned gap, bool second_hit) {
  TimingState t;
  t = account_instruction(t, kZip, false);
  for (unsigned i = 0; i < gap; ++i) t = account_instruction(t, kNop, false);
  return account_instruction(t, kUnzip, second_hit);
}

std::string zip_gap_unzip(unsigned gap) {
  std::ostringstream s;
  s << "main:\n li ra, 0x1234\n zip\n";
  for (unsigned i = 0; i < gap; ++i) s << " nop\n";
  s << " unzip\n halt\n";
  return s.str();
}

}  // namespace

TEST_CASE("ordinary instructions take one cycle") {
  TimingState t;
  for (int i = 0; i < 10; ++i) t = account_instruction(t, kNop, false);
  CHECK(t.cycle == 10);
  CHECK(t.stall_cycles_total == 0);
  CHECK(t.mac_ops_total == 0);
}

TEST_CASE("a miss occupies the MAC unit for its full latency") {
  TimingState t;
  t = account_instruction(t, kZip, false);
  CHECK(t.cycle == 1);
  CHECK(t.mac_busy_until == kMacLatencyCycles);
  CHECK(t.mac_ops_total == 1);
}

TEST_CASE("widely spaced MAC operations never stall") {
  const auto t = after_gap(25, false);
  CHECK(t.stall_cycles_total == 0);
  CHECK(t.cycle == 27);
}

TEST_CASE("back-to-back MAC operations stall until the unit frees up") {
  const auto t = after_gap(5, false);
  CHECK(t.stall_cycles_total == 14);
  CHECK(t.cycle == 1 + 5 + 14 + 1);
  CHECK(t.mac_busy_until == 20 + kMacLatencyCycles);
}

TEST_CASE("a cache hit still waits for a busy unit but leaves it free") {
  const auto t = after_gap(5, true);
  CHECK(t.stall_cycles_total == 14);
  CHECK(t.cache_hits_total == 1);
  CHECK(t.mac_busy_until == 20);
  TimingState u;
  u = account_instruction(u, kZip, true);
  u = account_instruction(u, kUnzip, false);
  CHECK(u.stall_cycles_total == 0);
  CHECK(u.cycle == 2);
  CHECK(u.mac_busy_until == 1 + kMacLatencyCycles);
}

TEST_CASE("stall arithmetic holds for every gap") {
  for (unsigned gap = 0; gap < 40; ++gap) {
    const auto t = after_gap(gap, false);
    const std::uint64_t expected = gap + 1 >= kMacLatencyCycles ? 0 : kMacLatencyCycles - 1 - gap;
    CHECK(t.stall_cycles_total == expected);
  }
}

TEST_CASE("machine: unzip of a freshly zipped value hits the cache") {
  const auto on = testing::run_source(zip_gap_unzip(5), config(ProtectionKind::Zipper, 1, true));
  const auto off = testing::run_source(zip_gap_unzip(5), config(ProtectionKind::Zipper, 1, false));
  CHECK(on.cache_hits == 1);
  CHECK(on.stall_cycles == 14);
  CHECK(off.cache_hits == 0);
  CHECK(off.stall_cycles == 14);
  const auto far = testing::run_source(zip_gap_unzip(25), config(ProtectionKind::Zipper, 1, false));
  CHECK(far.stall_cycles == 0);
  CHECK(far.cycles == 1 + 1 + 25 + 1 + 1);
}

TEST_CASE("cache hits avoid occupying the unit for the next request") {
  // zip; unzip (hit); zip again with the same inputs (hit): no second stall.
  const auto src = "main:\n li ra, 0x1234\n zip\n unzip\n zip\n halt\n";
  const auto on = testing::run_source(src, config(ProtectionKind::Zipper, 3, true));
  const auto off = testing::run_source(src, config(ProtectionKind::Zipper, 3, false));
  CHECK(on.cache_hits == 2);
  CHECK(on.stall_cycles == 19);
  CHECK(off.stall_cycles == 19 + 19);
}

TEST_CASE("zip and unzip are free outside Zipper mode") {
  const auto src = zip_gap_unzip(0);
  for (auto kind : {ProtectionKind::Baseline, ProtectionKind::ShadowParallel,
                    ProtectionKind::ShadowCompact}) {
    const auto r = testing::run_source(src, config(kind));
    CHECK(r.cycles == 2);
    CHECK(r.mac_ops == 0);
    CHECK(r.stall_cycles == 0);
  }
}

TEST_CASE("shadow stacks add one cycle per call and per return") {
  const auto img = testing::sample("call_dense");
  const auto base = testing::run(img, config(ProtectionKind::Baseline));
  for (auto kind : {ProtectionKind::ShadowParallel, ProtectionKind::ShadowCompact}) {
    const auto r = testing::run(img, config(kind));
    CHECK(r.shadow_ops > 0);
    CHECK(r.cycles == base.cycles + r.shadow_ops);
    CHECK(r.instructions == base.instructions);
  }
}

TEST_CASE("leaf-only code costs nothing under Zipper") {
  const auto img = testing::sample("leaf_dense");
  const auto base = testing::run(img, config(ProtectionKind::Baseline));
  const auto z = testing::run(img, config(ProtectionKind::Zipper));
  CHECK(z.cycles == base.cycles);
}

TEST_CASE("the cache never makes a run slower") {
  for (auto name : {"fact", "deep_recursion", "call_dense", "setjmp_heavy"}) {
    CAPTURE(name);
    const auto img = testing::sample(name);
    const auto on = testing::run(img, config(ProtectionKind::Zipper, 4, true));
    const auto off = testing::run(img, config(ProtectionKind::Zipper, 4, false));
    CHECK(on.cycles <= off.cycles);
    CHECK(on.instructions == off.instructions);
    CHECK(on.stall_cycles + on.instructions <= on.cycles + on.mac_ops);
  }
}

TEST_CASE("overhead report") {
  const auto img = testing::sample("call_dense");
  const auto base = testing::run(img, config(ProtectionKind::Baseline));
  const auto z = testing::run(img, config(ProtectionKind::Zipper));
  const auto rep = overhead_report(base, z, "call_dense");
  CHECK(rep.benchmark == "call_dense");
  CHECK(rep.mode == "zipper");
  CHECK(rep.base_cycles == base.cycles);
  CHECK(rep.cycles == z.cycles);
  CHECK(rep.slowdown == doctest::Approx(double(z.cycles) / double(base.cycles) - 1.0));
  CHECK(rep.stalls == z.stall_cycles);

  const auto other = testing::run(testing::sample("fact"), config(ProtectionKind::Zipper));
  CHECK_THROWS_AS((void)overhead_report(base, other), Error);
  RunResult empty = base;
  empty.cycles = 0;
  CHECK_THROWS_AS((void)overhead_report(empty, z), Error);
}
