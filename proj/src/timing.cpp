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

#include "zipvm/timing.hpp"

#include <algorithm>

#include "zipvm/error.hpp"
#include "zipvm/machine.hpp"

namespace zipvm {

TimingState account_instruction(TimingState t, const Instruction& instr, bool cache_hit) {
  if (instr.op != Opcode::Zip && instr.op != Opcode::Unzip) {
    t.cycle += 1;
    return t;
  }
  if (t.mac_busy_until > t.cycle) {
    t.stall_cycles_total += t.mac_busy_until - t.cycle;
    t.cycle = t.mac_busy_until;
  }
  const std::uint64_t issue = t.cycle;
  t.cycle += 1;
  t.mac_ops_total += 1;
  if (cache_hit) {
    t.cache_hits_total += 1;
  } else {
    t.mac_busy_until = issue + kMacLatencyCycles;
  }
  return t;
}

TimingModel::TimingModel(ProtectionKind mode, bool cache_enabled) : mode_(mode) {
  state_.cache_enabled = cache_enabled;
}

void TimingModel::account(const Instruction& instr, const MacActivity& mac) {
  switch (mode_) {
    case ProtectionKind::Baseline:
      if (instr.op == Opcode::Zip || instr.op == Opcode::Unzip) return;
      state_.cycle += 1;
      return;
    case ProtectionKind::ShadowParallel:
    case ProtectionKind::ShadowCompact:
      if (instr.op == Opcode::Zip || instr.op == Opcode::Unzip) return;
      state_.cycle += 1;
      if (instr.op == Opcode::Call || instr.op == Opcode::Ret) {
        state_.cycle += 1;
        ++shadow_ops_;
      }
      return;
    case ProtectionKind::Zipper:
      break;
  }

  if (instr.op == Opcode::Zip || instr.op == Opcode::Unzip) {
    state_ = account_instruction(state_, instr, mac.misses == 0);
    return;
  }
  if (instr.op == Opcode::Setjmp || instr.op == Opcode::Longjmp) {
    if (state_.mac_busy_until > state_.cycle) {
      state_.stall_cycles_total += state_.mac_busy_until - state_.cycle;
      state_.cycle = state_.mac_busy_until;
    }
    const std::uint64_t issue = state_.cycle;
    state_.cycle += 2;
    state_.mac_ops_total += mac.requests;
    state_.cache_hits_total += mac.requests - mac.misses;
    if (mac.misses > 0) state_.mac_busy_until = issue + kMacLatencyCycles * mac.misses;
    return;
  }
  state_.cycle += 1;
}

OverheadReport overhead_report(const RunResult& base, const RunResult& prot,
                               const std::string& benchmark) {
  if (base.image_fingerprint != prot.image_fingerprint) {
    throw Error("overhead_report: runs come from different images");
  }
  if (base.cycles == 0) throw Error("overhead_report: base run has zero cycles");
  OverheadReport r;
  r.benchmark = benchmark;
  r.mode = prot.mode_name;
  r.cache_enabled = prot.cache_enabled;
  r.base_cycles = base.cycles;
  r.cycles = prot.cycles;
  r.slowdown = static_cast<double>(prot.cycles) / static_cast<double>(base.cycles) - 1.0;
  r.stalls = prot.stall_cycles;
  r.mac_ops = prot.mac_ops;
  r.cache_hits = prot.cache_hits;
  return r;
}

}  // namespace zipvm
