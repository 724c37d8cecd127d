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

#include "zipvm/machine.hpp"

#include <cstdio>
#include <random>

#include "zipvm/error.hpp"

namespace zipvm {

std::string_view mode_name(ProtectionKind kind) noexcept {
  switch (kind) {
    case ProtectionKind::Baseline: return "baseline";
    case ProtectionKind::ShadowParallel: return "shadow-parallel";
    case ProtectionKind::ShadowCompact: return "shadow-compact";
    case ProtectionKind::Zipper: return "zipper";
  }
  return "?";
}

std::optional<ProtectionKind> parse_mode(std::string_view name) noexcept {
  for (auto k : all_modes()) {
    if (mode_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view fault_name(FaultKind kind) noexcept {
  switch (kind) {
    case FaultKind::ReturnMacMismatch: return "ReturnMacMismatch";
    case FaultKind::ShadowMismatch: return "ShadowMismatch";
    case FaultKind::JumpBufferMacMismatch: return "JumpBufferMacMismatch";
  }
  return "?";
}

std::string_view status_name(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::Running: return "running";
    case RunStatus::Halted: return "halted";
    case RunStatus::Faulted: return "faulted";
    case RunStatus::Error: return "error";
    case RunStatus::CycleLimit: return "cycle-limit";
  }
  return "?";
}

Machine::Machine(const ProgramImage& image, const MachineConfig& config)
    : image_(image), config_(config) {
  config_.widths.validate();
  if (config_.widths.address_bits + config_.widths.mac_bits > 64) {
    throw Error("address + MAC width must fit one 64-bit register");
  }
  if ((std::uint64_t{1} << std::min(config_.widths.address_bits, 63u)) <
      std::uint64_t{config_.memory_bytes}) {
    throw Error("address width too small for the configured memory");
  }
  if (config_.memory_bytes < layout::kMinMemoryBytes) {
    throw Error("memory must be at least " + std::to_string(layout::kMinMemoryBytes) + " bytes");
  }
  if (image_.code_base != layout::kCodeBase ||
      image_.code_end() > layout::kCodeLimit) {
    throw Error("image code does not fit the code region");
  }
  if (image_.data_base != layout::kDataBase ||
      image_.data_base + image_.data.size() > layout::kDataLimit) {
    throw Error("image data does not fit the data region");
  }
  if (!image_.is_code_address(image_.entry)) throw Error("image entry is not a code address");

  mem_.assign(config_.memory_bytes, 0);
  for (std::size_t i = 0; i < image_.code.size(); ++i) {
    const std::uint32_t w = encode(image_.code[i]);
    for (int b = 0; b < 4; ++b) {
      mem_[image_.code_base + i * kInstructionBytes + b] = static_cast<std::uint8_t>(w >> (8 * b));
    }
  }
  std::copy(image_.data.begin(), image_.data.end(), mem_.begin() + static_cast<std::ptrdiff_t>(image_.data_base));

  std::mt19937_64 rng(config_.seed);
  const MacKey key{rng()};
  top_ = rng() & config_.widths.mac_mask();
  const std::uint64_t base_slot = rng() % layout::kCompactBaseSlots;
  compact_base_ = config_.mode.compact_base.value_or(layout::kCompactRegionBase + 8 * base_slot);
  write_u64(layout::kShadowPtrSlot, compact_base_);

  mac_ = MacUnit(config_.widths, key, config_.cache_enabled);
  timing_ = TimingModel(config_.mode.kind, config_.cache_enabled);
  regs_[kRegSp] = layout::kStackTop;
  pc_ = image_.entry;
}

void Machine::set_reg(unsigned i, std::uint64_t v) {
  if (i >= kNumRegisters) throw VmError("register index out of range");
  write_reg(i, v);
}

void Machine::check_range(std::uint64_t addr, std::uint64_t len) const {
  if (addr > mem_.size() || len > mem_.size() - addr) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "memory access out of bounds at 0x%llx (+%llu)",
                  static_cast<unsigned long long>(addr), static_cast<unsigned long long>(len));
    throw VmError(buf);
  }
}

std::uint64_t Machine::read_u64(std::uint64_t addr) const {
  check_range(addr, 8);
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= std::uint64_t{mem_[addr + b]} << (8 * b);
  return v;
}

void Machine::write_u64(std::uint64_t addr, std::uint64_t value) {
  check_range(addr, 8);
  for (int b = 0; b < 8; ++b) mem_[addr + b] = static_cast<std::uint8_t>(value >> (8 * b));
}

std::vector<std::uint8_t> Machine::read_bytes(std::uint64_t addr, std::size_t len) const {
  check_range(addr, len);
  return {mem_.begin() + static_cast<std::ptrdiff_t>(addr),
          mem_.begin() + static_cast<std::ptrdiff_t>(addr + len)};
}

void Machine::write_bytes(std::uint64_t addr, std::span<const std::uint8_t> bytes) {
  check_range(addr, bytes.size());
  std::copy(bytes.begin(), bytes.end(), mem_.begin() + static_cast<std::ptrdiff_t>(addr));
}

std::span<const std::uint8_t> Machine::data_region() const {
  return std::span<const std::uint8_t>(mem_).subspan(image_.data_base,
                                                     layout::kDataLimit - image_.data_base);
}

std::uint64_t Machine::pack_ra(std::uint64_t addr, MacValue mac) const noexcept {
  const auto& w = config_.widths;
  return (addr & w.address_mask()) | ((mac & w.mac_mask()) << (64 - w.mac_bits));
}

std::uint64_t Machine::ra_address(std::uint64_t word) const noexcept {
  return word & config_.widths.address_mask();
}

MacValue Machine::ra_mac_field(std::uint64_t word) const noexcept {
  return (word >> (64 - config_.widths.mac_bits)) & config_.widths.mac_mask();
}

std::uint64_t Machine::check_code_target(std::uint64_t addr, const char* what) const {
  if (!image_.is_code_address(addr)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s to non-code address 0x%llx", what,
                  static_cast<unsigned long long>(addr));
    throw VmError(buf);
  }
  return addr;
}

void Machine::raise(FaultKind kind) {
  fault_ = SecurityFault{kind, pc_, timing_.cycles()};
  status_ = RunStatus::Faulted;
}

MacValue Machine::mac_request(std::uint64_t addr, MacValue prev, MacActivity& activity) {
  const MacResult r = mac_.compute(MacRequest{addr, prev});
  ++activity.requests;
  if (!r.hit) ++activity.misses;
  return r.value;
}

RunStatus Machine::step() {
  if (status_ != RunStatus::Running) return status_;
  const std::uint64_t pc_before = pc_;
  const std::uint64_t cycle_before = timing_.cycles();
  Instruction in{};
  try {
    (void)check_code_target(pc_, "fetch");
    in = image_.code[(pc_ - image_.code_base) / kInstructionBytes];
    const MacActivity activity = exec(in);
    timing_.account(in, activity);
    ++instructions_;
    if (in.op == Opcode::Zip || in.op == Opcode::Unzip) {
      if (zipper()) ++zip_unzip_;
    }
    if (fault_) fault_->cycle = timing_.cycles();
  } catch (const VmError& e) {
    status_ = RunStatus::Error;
    error_ = e.what();
  }
  if (config_.trace) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%llu 0x%llx %s %c",
                  static_cast<unsigned long long>(cycle_before),
                  static_cast<unsigned long long>(pc_before),
                  std::string(mnemonic(in.op)).c_str(),
                  status_ == RunStatus::Faulted ? 'F' : (status_ == RunStatus::Error ? 'E' : '-'));
    trace_.emplace_back(buf);
  }
  return status_;
}

MacActivity Machine::exec(const Instruction& in) {
  const std::uint64_t next = pc_ + kInstructionBytes;
  const std::uint64_t a = regs_[in.rs1];
  const std::uint64_t b = regs_[in.rs2];
  MacActivity none;
  switch (in.op) {
    case Opcode::Halt:
      exit_value_ = regs_[kRegA0];
      status_ = RunStatus::Halted;
      return none;
    case Opcode::Nop: break;
    case Opcode::Add: write_reg(in.rd, a + b); break;
    case Opcode::Sub: write_reg(in.rd, a - b); break;
    case Opcode::Mul: write_reg(in.rd, a * b); break;
    case Opcode::And: write_reg(in.rd, a & b); break;
    case Opcode::Or: write_reg(in.rd, a | b); break;
    case Opcode::Xor: write_reg(in.rd, a ^ b); break;
    case Opcode::Shl: write_reg(in.rd, a << (b & 63)); break;
    case Opcode::Shr: write_reg(in.rd, a >> (b & 63)); break;
    case Opcode::Slt:
      write_reg(in.rd, static_cast<std::int64_t>(a) < static_cast<std::int64_t>(b) ? 1 : 0);
      break;
    case Opcode::Sltu: write_reg(in.rd, a < b ? 1 : 0); break;
    case Opcode::Addi: write_reg(in.rd, a + static_cast<std::uint64_t>(in.imm)); break;
    case Opcode::Ori: write_reg(in.rd, a | static_cast<std::uint64_t>(in.imm)); break;
    case Opcode::Lui: write_reg(in.rd, static_cast<std::uint64_t>(in.imm) << 16); break;
    case Opcode::Ld: write_reg(in.rd, read_u64(a + static_cast<std::uint64_t>(in.imm))); break;
    case Opcode::St: write_u64(a + static_cast<std::uint64_t>(in.imm), b); break;
    case Opcode::Beq:
    case Opcode::Bne:
    case Opcode::Blt: {
      const bool taken = in.op == Opcode::Beq   ? a == b
                         : in.op == Opcode::Bne ? a != b
                                                : static_cast<std::int64_t>(a) < static_cast<std::int64_t>(b);
      if (taken) {
        pc_ = check_code_target(pc_ + static_cast<std::uint64_t>(in.imm * kInstructionBytes), "branch");
        return none;
      }
      break;
    }
    case Opcode::Jmp:
      pc_ = check_code_target(static_cast<std::uint64_t>(in.imm), "jump");
      return none;
    case Opcode::Call: return exec_call(static_cast<std::uint64_t>(in.imm));
    case Opcode::Ret: return exec_ret();
    case Opcode::Zip: {
      auto act = exec_zip();
      pc_ = next;
      return act;
    }
    case Opcode::Unzip: {
      auto act = exec_unzip();
      if (!fault_) pc_ = next;
      return act;
    }
    case Opcode::Setjmp: {
      auto act = exec_setjmp(a);
      pc_ = next;
      return act;
    }
    case Opcode::Longjmp: return exec_longjmp(a, b);
    case Opcode::Print: output_.push_back(a); break;
  }
  pc_ = next;
  return none;
}

MacActivity Machine::exec_call(std::uint64_t target) {
  (void)check_code_target(target, "call");
  const std::uint64_t ret = pc_ + kInstructionBytes;
  switch (config_.mode.kind) {
    case ProtectionKind::ShadowParallel:
      write_u64(regs_[kRegSp] + config_.mode.parallel_offset, ret);
      break;
    case ProtectionKind::ShadowCompact: {
      const std::uint64_t ptr = read_u64(layout::kShadowPtrSlot);
      write_u64(ptr, ret);
      write_u64(layout::kShadowPtrSlot, ptr + 8);
      break;
    }
    default:
      break;
  }
  regs_[kRegRa] = ret;
  pc_ = target;
  return {};
}

MacActivity Machine::exec_ret() {
  const std::uint64_t target = ra_address(regs_[kRegRa]);
  std::optional<std::uint64_t> expected;
  switch (config_.mode.kind) {
    case ProtectionKind::ShadowParallel:
      expected = read_u64(regs_[kRegSp] + config_.mode.parallel_offset);
      break;
    case ProtectionKind::ShadowCompact: {
      const std::uint64_t ptr = read_u64(layout::kShadowPtrSlot) - 8;
      expected = read_u64(ptr);
      write_u64(layout::kShadowPtrSlot, ptr);
      break;
    }
    default:
      break;
  }
  if (expected && *expected != target) {
    raise(FaultKind::ShadowMismatch);
    return {};
  }
  pc_ = check_code_target(target, "return");
  return {};
}

MacActivity Machine::exec_zip() {
  MacActivity act;
  if (!zipper()) return act;
  const std::uint64_t addr = ra_address(regs_[kRegRa]);
  const MacValue old_top = top_;
  top_ = mac_request(addr, old_top, act);
  regs_[kRegRa] = pack_ra(addr, old_top);
  return act;
}

MacActivity Machine::exec_unzip() {
  MacActivity act;
  if (!zipper()) return act;
  const std::uint64_t word = regs_[kRegRa];
  const std::uint64_t addr = ra_address(word);
  const MacValue field = ra_mac_field(word);
  if (mac_request(addr, field, act) != top_) {
    raise(FaultKind::ReturnMacMismatch);
    return act;
  }
  top_ = field;
  regs_[kRegRa] = addr;
  return act;
}

MacActivity Machine::exec_setjmp(std::uint64_t buf) {
  MacActivity act;
  check_range(buf, jmpbuf::kBytes);
  const std::uint64_t saved_pc = pc_ + kInstructionBytes;
  const std::uint64_t saved_sp = regs_[kRegSp];
  std::uint64_t saved_top = 0;
  std::uint64_t auth = 0;
  if (zipper()) {
    const auto& w = config_.widths;
    saved_top = top_;
    const MacValue inner = mac_request(saved_pc & w.address_mask(), saved_top, act);
    auth = mac_request(saved_sp & w.address_mask(), inner, act);
  } else if (config_.mode.kind == ProtectionKind::ShadowCompact) {
    saved_top = read_u64(layout::kShadowPtrSlot);
  }
  write_u64(buf + jmpbuf::kPc, saved_pc);
  write_u64(buf + jmpbuf::kSp, saved_sp);
  write_u64(buf + jmpbuf::kTop, saved_top);
  write_u64(buf + jmpbuf::kAuth, auth);
  regs_[kRegA0] = 0;
  return act;
}

MacActivity Machine::exec_longjmp(std::uint64_t buf, std::uint64_t value) {
  MacActivity act;
  check_range(buf, jmpbuf::kBytes);
  const std::uint64_t saved_pc = read_u64(buf + jmpbuf::kPc);
  const std::uint64_t saved_sp = read_u64(buf + jmpbuf::kSp);
  const std::uint64_t saved_top = read_u64(buf + jmpbuf::kTop);
  const std::uint64_t auth = read_u64(buf + jmpbuf::kAuth);
  if (zipper()) {
    const auto& w = config_.widths;
    // Bits outside the authenticated widths must be zero.
    const bool canonical = (saved_pc & ~w.address_mask()) == 0 &&
                           (saved_sp & ~w.address_mask()) == 0 &&
                           (saved_top & ~w.mac_mask()) == 0 && (auth & ~w.mac_mask()) == 0;
    bool ok = false;
    if (canonical) {
      const MacValue inner = mac_request(saved_pc, saved_top, act);
      ok = mac_request(saved_sp, inner, act) == auth;
    }
    if (!ok) {
      raise(FaultKind::JumpBufferMacMismatch);
      return act;
    }
    top_ = saved_top;
  } else if (config_.mode.kind == ProtectionKind::ShadowCompact) {
    write_u64(layout::kShadowPtrSlot, saved_top);
  }
  pc_ = check_code_target(saved_pc, "longjmp");
  regs_[kRegSp] = saved_sp;
  regs_[kRegA0] = value == 0 ? 1 : value;
  return act;
}

RunResult Machine::run(std::uint64_t max_cycles) {
  while (status_ == RunStatus::Running) {
    if (timing_.cycles() >= max_cycles) {
      status_ = RunStatus::CycleLimit;
      break;
    }
    step();
  }
  return result();
}

RunResult Machine::result() const {
  RunResult r;
  r.status = status_;
  r.exit_value = exit_value_;
  r.fault = fault_;
  r.error = error_;
  const auto& t = timing_.state();
  r.cycles = t.cycle;
  r.instructions = instructions_;
  r.stall_cycles = t.stall_cycles_total;
  r.mac_ops = t.mac_ops_total;
  r.cache_hits = t.cache_hits_total;
  r.zip_unzip_executed = zip_unzip_;
  r.shadow_ops = timing_.shadow_ops();
  r.output = output_;
  r.trace = trace_;
  r.mode_name = std::string(mode_name(config_.mode.kind));
  r.widths = config_.widths;
  r.cache_enabled = config_.cache_enabled;
  r.seed = config_.seed;
  r.image_fingerprint = image_.fingerprint();
  return r;
}

}  // namespace zipvm
