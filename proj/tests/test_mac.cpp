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

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracle/keccak_reference.hpp"
#include "zipvm/mac.hpp"

using zipvm::MacKey;
using zipvm::MacRequest;
using zipvm::MacWidths;

TEST_CASE("compute_mac matches the bit-level reference at several widths") {
  std::mt19937_64 rng(99);
  const std::array<MacWidths, 5> widths = {
      MacWidths{40, 24}, MacWidths{39, 25}, MacWidths{8, 8}, MacWidths{64, 64}, MacWidths{1, 1}};
  for (const auto& w : widths) {
    CAPTURE(w.address_bits);
    CAPTURE(w.mac_bits);
    for (int i = 0; i < 40; ++i) {
      const MacKey key{rng()};
      const MacRequest req{rng() & w.address_mask(), rng() & w.mac_mask()};
      CHECK(zipvm::compute_mac(key, req, w) ==
            oracle::mac_reference(key.bits, req.address, req.prev_mac, w.address_bits,
                                  w.mac_bits));
    }
  }
}

TEST_CASE("mac is deterministic and below 2^Nm") {
  const MacWidths w{40, 24};
  const MacKey key{0x0123456789abcdefull};
  const MacRequest req{0x1234, 0xabcdef};
  const auto a = zipvm::compute_mac(key, req, w);
  CHECK(a == zipvm::compute_mac(key, req, w));
  CHECK(a < (1ull << 24));
}

TEST_CASE("output histogram over all 2^16 inputs at (8, 8) is near uniform") {
  const MacWidths w{8, 8};
  const MacKey key{0x5eed};
  std::vector<unsigned> buckets(256, 0);
  for (std::uint64_t a = 0; a < 256; ++a) {
    for (std::uint64_t m = 0; m < 256; ++m) ++buckets[zipvm::compute_mac(key, {a, m}, w)];
  }
  double chi2 = 0;
  for (unsigned b : buckets) {
    CHECK(b > 0);
    chi2 += (b - 256.0) * (b - 256.0) / 256.0;
  }
  // 255 degrees of freedom; 340 is past the 0.0003 upper tail.
  CHECK(chi2 < 340.0);
}

TEST_CASE("every single input bit flip changes the output at rate 1 - 2^-Nm") {
  const MacWidths w{40, 8};
  std::mt19937_64 rng(7);
  const unsigned total_bits = 64 + w.address_bits + w.mac_bits;
  for (unsigned bit = 0; bit < total_bits; ++bit) {
    unsigned changed = 0;
    for (int t = 0; t < 1000; ++t) {
      MacKey key{rng()};
      MacRequest req{rng() & w.address_mask(), rng() & w.mac_mask()};
      const auto before = zipvm::compute_mac(key, req, w);
      if (bit < 64) key.bits ^= 1ull << bit;
      else if (bit < 64 + w.address_bits) req.address ^= 1ull << (bit - 64);
      else req.prev_mac ^= 1ull << (bit - 64 - w.address_bits);
      changed += zipvm::compute_mac(key, req, w) != before ? 1 : 0;
    }
    CAPTURE(bit);
    // Expected 996.1 of 1000; binomial sd about 2.
    CHECK(changed >= 985);
  }
}

TEST_CASE("preimage existence at (8, 8) tracks 1 - (1 - 2^-8)^256") {
  const MacWidths w{8, 8};
  std::mt19937_64 rng(1234);
  const int trials = 4000;
  int exist = 0;
  for (int t = 0; t < trials; ++t) {
    const MacKey key{rng()};
    const std::uint64_t addr = rng() & 0xff;
    const std::uint64_t target = rng() & 0xff;
    for (std::uint64_t m = 0; m < 256; ++m) {
      if (zipvm::compute_mac(key, {addr, m}, w) == target) {
        ++exist;
        break;
      }
    }
  }
  const double expect = 1.0 - std::pow(1.0 - 1.0 / 256.0, 256.0);
  CHECK(std::fabs(exist / double(trials) - expect) <= 0.03);
}

TEST_CASE("compute_mac rejects inputs wider than the configuration") {
  const MacWidths w{8, 8};
  CHECK_THROWS_AS((void)zipvm::compute_mac({1}, {0x100, 0}, w), std::invalid_argument);
  CHECK_THROWS_AS((void)zipvm::compute_mac({1}, {0, 0x100}, w), std::invalid_argument);
}

TEST_CASE("configure_widths validates its bounds") {
  CHECK(zipvm::configure_widths(40, 24).widths() == MacWidths{40, 24});
  CHECK(zipvm::configure_widths(39, 25).widths() == MacWidths{39, 25});
  CHECK(zipvm::configure_widths(8, 8).widths() == MacWidths{8, 8});
  CHECK(zipvm::configure_widths(64, 64).widths() == MacWidths{64, 64});
  CHECK_THROWS_AS((void)zipvm::configure_widths(40, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)zipvm::configure_widths(0, 24), std::invalid_argument);
  CHECK_THROWS_AS((void)zipvm::configure_widths(65, 24), std::invalid_argument);
  CHECK_THROWS_AS((void)zipvm::configure_widths(40, 65), std::invalid_argument);
}

TEST_CASE("cache hits on immediate reuse") {
  auto unit = zipvm::configure_widths(40, 24, MacKey{42});
  const MacRequest r{0x1000, 5};
  const auto first = unit.compute(r);
  const auto second = unit.compute(r);
  CHECK_FALSE(first.hit);
  CHECK(second.hit);
  CHECK(first.value == second.value);
}

TEST_CASE("five distinct requests evict the first under LRU") {
  auto unit = zipvm::configure_widths(40, 24, MacKey{42});
  for (std::uint64_t i = 0; i < 5; ++i) CHECK_FALSE(unit.compute({0x1000 + 4 * i, 0}).hit);
  CHECK(unit.cache().size() == zipvm::MacCache::kCapacity);
  CHECK_FALSE(unit.compute({0x1000, 0}).hit);
}

TEST_CASE("a hit refreshes recency") {
  auto unit = zipvm::configure_widths(40, 24, MacKey{42});
  for (std::uint64_t i = 0; i < 4; ++i) (void)unit.compute({i, 0});
  CHECK(unit.compute({0, 0}).hit);       // 0 becomes most recent
  (void)unit.compute({4, 0});            // evicts 1
  CHECK(unit.compute({0, 0}).hit);
  CHECK_FALSE(unit.compute({1, 0}).hit);
}

TEST_CASE("cache is transparent over random request sequences") {
  std::mt19937_64 rng(5);
  for (int seq = 0; seq < 1000; ++seq) {
    const MacKey key{rng()};
    auto cached = zipvm::configure_widths(40, 24, key, true);
    auto plain = zipvm::configure_widths(40, 24, key, false);
    for (int i = 0; i < 12; ++i) {
      // A small pool so that hits actually happen.
      const MacRequest r{rng() % 6, rng() % 3};
      const auto a = cached.compute(r);
      const auto b = plain.compute(r);
      REQUIRE(a.value == b.value);
      REQUIRE_FALSE(b.hit);
      REQUIRE(a.value == zipvm::compute_mac(key, r, {40, 24}));
    }
    CHECK(cached.cache().size() <= zipvm::MacCache::kCapacity);
  }
}

TEST_CASE("changing the key flushes the cache") {
  auto unit = zipvm::configure_widths(40, 24, MacKey{1});
  (void)unit.compute({8, 0});
  unit.set_key(MacKey{2});
  CHECK(unit.cache().size() == 0);
  const auto r = unit.compute({8, 0});
  CHECK_FALSE(r.hit);
  CHECK(r.value == zipvm::compute_mac({2}, {8, 0}, {40, 24}));
}
