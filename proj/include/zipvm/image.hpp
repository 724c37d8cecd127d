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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zipvm/isa.hpp"

namespace zipvm {

/// Fixed address-space layout shared by the assembler, loader and attacker.
namespace layout {
inline constexpr std::uint64_t kShadowPtrSlot = 0x800;  // compact shadow stack pointer
inline constexpr std::uint64_t kCodeBase = 0x1000;
inline constexpr std::uint64_t kCodeLimit = 0x20000;
inline constexpr std::uint64_t kDataBase = 0x20000;
inline constexpr std::uint64_t kDataLimit = 0x40000;
inline constexpr std::uint64_t kStackLimit = 0x40000;
inline constexpr std::uint64_t kStackTop = 0x80000;
inline constexpr std::uint64_t kParallelShadowOffset = 0x40000;
inline constexpr std::uint64_t kCompactRegionBase = 0xC8000;
inline constexpr std::uint64_t kCompactRegionLimit = 0x100000;
inline constexpr std::uint64_t kCompactBaseSlots = 8192;  // randomized base range, in words
inline constexpr std::uint64_t kMinMemoryBytes = 0x100000;
}  // namespace layout

struct FunctionInfo {
  std::string name;
  std::uint64_t start = 0;  // first instruction address
  std::uint64_t end = 0;    // one past the last instruction
  bool leaf = true;         // body contains no call

  friend bool operator==(const FunctionInfo&, const FunctionInfo&) = default;
};

/// An assembled program: code, initialized data, symbols and function table.
struct ProgramImage {
  std::uint64_t code_base = layout::kCodeBase;
  std::vector<Instruction> code;
  std::uint64_t data_base = layout::kDataBase;
  std::vector<std::uint8_t> data;
  std::map<std::string, std::uint64_t> symbols;
  std::uint64_t entry = layout::kCodeBase;
  std::vector<FunctionInfo> functions;

  [[nodiscard]] std::uint64_t code_end() const noexcept {
    return code_base + code.size() * kInstructionBytes;
  }
  [[nodiscard]] bool is_code_address(std::uint64_t addr) const noexcept {
    return addr >= code_base && addr < code_end() &&
           (addr - code_base) % kInstructionBytes == 0;
  }
  /// Throws zipvm::Error for an unknown symbol.
  [[nodiscard]] std::uint64_t symbol(const std::string& name) const;
  [[nodiscard]] std::optional<std::uint64_t> find_symbol(const std::string& name) const;
  [[nodiscard]] const FunctionInfo* function_at(std::uint64_t addr) const noexcept;

  /// FNV-1a over the encoded code and the data bytes.
  [[nodiscard]] std::uint64_t fingerprint() const;

  friend bool operator==(const ProgramImage&, const ProgramImage&) = default;
};

/// Binary image format, version 1 (all integers little-endian):
///   "ZVIM" u16 version u16 reserved
///   u64 code_base u64 data_base u64 entry
///   u32 n_code u32 n_data u32 n_symbols u32 n_functions
///   n_code x u32 instruction words
///   n_data bytes
///   n_symbols x { u16 len, name bytes, u64 address }
///   n_functions x { u16 len, name bytes, u64 start, u64 end, u8 leaf }
inline constexpr std::uint16_t kImageFormatVersion = 1;

[[nodiscard]] std::vector<std::uint8_t> serialize_image(const ProgramImage& image);
/// Throws zipvm::Error on a malformed or truncated buffer.
[[nodiscard]] ProgramImage deserialize_image(std::span<const std::uint8_t> bytes);

void save_image(const ProgramImage& image, const std::filesystem::path& path);
[[nodiscard]] ProgramImage load_image_file(const std::filesystem::path& path);

}  // namespace zipvm
