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

#include "zipvm/keccak.hpp"

namespace zipvm {
namespace {

// Keccak round constants, truncated to the 16-bit lane width.
constexpr std::array<std::uint16_t, kKeccakRounds> kRoundConstants = {
    0x0001, 0x8082, 0x808A, 0x8000, 0x808B, 0x0001, 0x8081,
    0x8009, 0x008A, 0x0088, 0x8009, 0x000A, 0x808B, 0x008B,
    0x8089, 0x8003, 0x8002, 0x0080, 0x800A, 0x000A,
};

// rho offsets along the pi walk, reduced mod 16.
constexpr std::array<unsigned, 24> kRhoOffsets = {
    1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14,
    27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44,
};

constexpr std::array<unsigned, 24> kPiLanes = {
    10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4,
    15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1,
};

constexpr std::uint16_t rotl16(std::uint16_t x, unsigned k) noexcept {
  k &= 15u;
  if (k == 0) return x;
  return static_cast<std::uint16_t>((x << k) | (x >> (16u - k)));
}

}  // namespace

void keccak_f400(KeccakState& st) noexcept {
  std::uint16_t a[25];
  for (std::size_t i = 0; i < 25; ++i) a[i] = st[i];
  for (std::size_t round = 0; round < kKeccakRounds; ++round) {
    // theta
    std::uint16_t bc[5];
#pragma GCC unroll 5
    for (std::size_t i = 0; i < 5; ++i) {
      bc[i] = static_cast<std::uint16_t>(a[i] ^ a[i + 5] ^ a[i + 10] ^ a[i + 15] ^ a[i + 20]);
    }
#pragma GCC unroll 5
    for (std::size_t i = 0; i < 5; ++i) {
      const auto t =
          static_cast<std::uint16_t>(bc[(i + 4) % 5] ^ rotl16(bc[(i + 1) % 5], 1));
#pragma GCC unroll 5
      for (std::size_t y = 0; y < 25; y += 5) a[y + i] ^= t;
    }

    // rho + pi
    std::uint16_t carry = a[1];
#pragma GCC unroll 24
    for (std::size_t i = 0; i < 24; ++i) {
      const unsigned j = kPiLanes[i];
      const std::uint16_t v = a[j];
      a[j] = rotl16(carry, kRhoOffsets[i]);
      carry = v;
    }

    // chi
#pragma GCC unroll 5
    for (std::size_t y = 0; y < 25; y += 5) {
      const std::uint16_t r0 = a[y], r1 = a[y + 1], r2 = a[y + 2], r3 = a[y + 3], r4 = a[y + 4];
      a[y] = static_cast<std::uint16_t>(r0 ^ (~r1 & r2));
      a[y + 1] = static_cast<std::uint16_t>(r1 ^ (~r2 & r3));
      a[y + 2] = static_cast<std::uint16_t>(r2 ^ (~r3 & r4));
      a[y + 3] = static_cast<std::uint16_t>(r3 ^ (~r4 & r0));
      a[y + 4] = static_cast<std::uint16_t>(r4 ^ (~r0 & r1));
    }

    // iota
    a[0] ^= kRoundConstants[round];
  }
  for (std::size_t i = 0; i < 25; ++i) st[i] = a[i];
}

bool keccak_get_bit(const KeccakState& state, std::size_t index) noexcept {
  return ((state[index / kKeccakLaneBits] >> (index % kKeccakLaneBits)) & 1u) != 0;
}

void keccak_set_bit(KeccakState& state, std::size_t index, bool value) noexcept {
  const auto mask =
      static_cast<std::uint16_t>(1u << (index % kKeccakLaneBits));
  auto& lane = state[index / kKeccakLaneBits];
  lane = value ? static_cast<std::uint16_t>(lane | mask)
               : static_cast<std::uint16_t>(lane & ~mask);
}

}  // namespace zipvm
