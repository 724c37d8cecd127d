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

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

namespace zipvm {

using MacValue = std::uint64_t;

/// 64-bit secret held in the Key register.
struct MacKey {
  std::uint64_t bits = 0;
  friend bool operator==(MacKey, MacKey) = default;
};

/// Bit widths of the MAC input/output. Defaults: 40-bit addresses, 24-bit MACs.
struct MacWidths {
  unsigned address_bits = 40;
  unsigned mac_bits = 24;

  /// Throws std::invalid_argument unless 1 <= Nm <= 64, 1 <= Na <= 64 and
  /// Na + Nm <= 128.
  void validate() const;

  [[nodiscard]] std::uint64_t address_mask() const noexcept;
  [[nodiscard]] std::uint64_t mac_mask() const noexcept;

  friend bool operator==(const MacWidths&, const MacWidths&) = default;
};

/// MAC input: an Na-bit return address plus the Nm-bit previous chain value.
struct MacRequest {
  std::uint64_t address = 0;
  MacValue prev_mac = 0;
  friend bool operator==(const MacRequest&, const MacRequest&) = default;
};

/// Keyed truncated MAC over one Keccak-f[400] call.
///
/// The 256-bit rate block is key(64) || address(Na) || prev_mac(Nm), bit
/// packed little-endian from bit 0, followed by pad10*1 up to bit 255. The
/// result is the first Nm bits of the permuted state.
[[nodiscard]] MacValue compute_mac(MacKey key, MacRequest req, MacWidths widths);

/// Result of a MAC unit request.
struct MacResult {
  MacValue value = 0;
  bool hit = false;
};

/// Four-entry least-recently-used cache of (address, prev_mac) -> MAC.
class MacCache {
 public:
  static constexpr std::size_t kCapacity = 4;

  /// Returns true and fills `value` on a hit; a hit becomes most recent.
  bool lookup(const MacRequest& req, MacValue& value) noexcept;
  /// Inserts as most recent, evicting the least recently used entry when full.
  void insert(const MacRequest& req, MacValue value) noexcept;
  void clear() noexcept { size_ = 0; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }

 private:
  struct Entry {
    MacRequest req;
    MacValue value = 0;
  };
  // entries_[0] is the most recently used.
  std::array<Entry, kCapacity> entries_{};
  std::size_t size_ = 0;
};

/// The MAC functional unit: key, widths and the optional result cache.
class MacUnit {
 public:
  MacUnit() = default;
  MacUnit(MacWidths widths, MacKey key, bool cache_enabled = true);

  [[nodiscard]] MacResult compute(const MacRequest& req);
  /// Uncached evaluation; never touches the cache.
  [[nodiscard]] MacValue compute_uncached(const MacRequest& req) const {
    return compute_mac(key_, req, widths_);
  }

  void set_key(MacKey key) noexcept;
  void set_cache_enabled(bool enabled) noexcept;

  [[nodiscard]] const MacWidths& widths() const noexcept { return widths_; }
  [[nodiscard]] bool cache_enabled() const noexcept { return cache_enabled_; }
  [[nodiscard]] const MacCache& cache() const noexcept { return cache_; }
  [[nodiscard]] MacKey key() const noexcept { return key_; }

 private:
  MacWidths widths_{};
  MacKey key_{};
  bool cache_enabled_ = true;
  MacCache cache_{};
};

/// Builds a MAC unit at the given widths. Throws std::invalid_argument when
/// the widths are out of range.
[[nodiscard]] MacUnit configure_widths(unsigned address_bits, unsigned mac_bits,
                                       MacKey key = {}, bool cache_enabled = true);

}  // namespace zipvm
