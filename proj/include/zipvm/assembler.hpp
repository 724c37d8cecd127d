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

#include <string>
#include <string_view>

#include "zipvm/image.hpp"

namespace zipvm {

/// Assembles toy-ISA source text into an image.
///
/// Grammar, one statement per line (`;` or `#` start a comment):
///
///     label:                     defines a symbol at the current address
///     .text | .data              switch section
///     .entry NAME                entry point (default: `main`)
///     .func NAME [LOCALS]        instrumented function, see below
///     .rawfunc NAME              function boundary without instrumentation
///     .endfunc
///     .word V, ...               64-bit little-endian data (numbers or symbols)
///     .byte B, ...               raw bytes
///     .zero N                    N zero bytes
///     MNEMONIC OPERANDS          instruction, operands separated by commas
///
/// Registers are r0..r15 with aliases zero (r0), ra (r1), sp (r2), a0 (r3).
/// Branch and jump targets are labels or absolute addresses. Pseudo
/// instructions: `li rd, imm`, `la rd, symbol`, `mv rd, rs`, `j target`.
///
/// A `.func` body that contains a `call` is non-leaf and gets the return
/// address protection sequence: the prologue is `zip`, then the frame is
/// allocated and ra spilled to the top slot of the frame; every `ret` is
/// replaced by reload ra, free frame, `unzip`, `ret`. The frame holds LOCALS
/// (default 1) 8-byte slots starting at 0(sp) plus the ra slot, rounded up to
/// 16 bytes. Leaf functions are emitted unchanged.
///
/// Throws AsmError (with the source line) on undefined or duplicate symbols,
/// malformed operands, unknown mnemonics and a missing entry symbol.
[[nodiscard]] ProgramImage assemble(std::string_view source);

/// Renders an image back to source that reassembles to an equal image.
/// Functions are emitted as `.rawfunc` so no instrumentation is re-applied;
/// data is emitted as `.byte` directives.
[[nodiscard]] std::string disassemble(const ProgramImage& image);

/// Size in bytes of the frame `.func NAME LOCALS` allocates.
[[nodiscard]] constexpr unsigned frame_bytes(unsigned locals) noexcept {
  return ((locals + 1) * 8 + 15) / 16 * 16;
}

}  // namespace zipvm
