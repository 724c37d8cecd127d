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

#include "zipvm/mac.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "zipvm/keccak.hpp"

namespace zipvm {
namespace {

constexpr std::uint64_t low_mask(unsigned bits) noexcept {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

// Little-endian bit buffer covering the 256-bit rate.
class RateBlock {
 public:
  void append(std::uint64_t value, unsigned bits) noexcept {
    for (unsigned done = 0; done < bits;) {
      const unsigned word = pos_ / 64;
      const unsigned offset = pos_ % 64;
      const unsigned take = std::min(bits - done, 64u - offset);
      const std::uint64_t chunk = (value >> done) & low_mask(take);
      words_[word] |= chunk << offset;
      done += take;
      pos_ += take;
    }
  }

  void pad() noexcept {
    words_[pos_ / 64] |= std::uint64_t{1} << (pos_ % 64);
    words_[3] |= std::uint64_t{1} << 63;
  }

  void absorb_into(KeccakState& state) const noexcept {
    for (std::size_t lane = 0; lane < 16; ++lane) {
      state[lane] ^= static_cast<std::uint16_t>(words_[lane / 4] >> (16 * (lane % 4)));
    }
  }

 private:
  std::array<std::uint64_t, 4> words_{};
  unsigned pos_ = 0;
};

}  // namespace

void MacWidths::validate() const {
  if (mac_bits < 1 || mac_bits > 64) {
    throw std::invalid_argument("MAC width must be in [1, 64], got " +
                                std::to_string(mac_bits));
  }
  if (address_bits < 1 || address_bits > 64) {
    throw std::invalid_argument("address width must be in [1, 64], got " +
                                std::to_string(address_bits));
  }
  if (address_bits + mac_bits > 128) {
    throw std::invalid_argument("address + MAC width exceeds 128 bits");
  }
}

std::uint64_t MacWidths::address_mask() const noexcept { return low_mask(address_bits); }
std::uint64_t MacWidths::mac_mask() const noexcept { return low_mask(mac_bits); }

MacValue compute_mac(MacKey key, MacRequest req, MacWidths widths) {
  if ((req.address & ~widths.address_mask()) != 0 ||
      (req.prev_mac & ~widths.mac_mask()) != 0) {
    throw std::invalid_argument("MAC request exceeds configured widths");
  }
  RateBlock block;
  block.append(key.bits, 64);
  block.append(req.address, widths.address_bits);
  block.append(req.prev_mac, widths.mac_bits);
  block.pad();

  KeccakState state{};
  block.absorb_into(state);
  keccak_f400(state);

  const std::uint64_t squeezed = std::uint64_t{state[0]} |
                                 (std::uint64_t{state[1]} << 16) |
                                 (std::uint64_t{state[2]} << 32) |
                                 (std::uint64_t{state[3]} << 48);
  return squeezed & widths.mac_mask();
}

bool MacCache::lookup(const MacRequest& req, MacValue& value) noexcept {
  for (std::size_t i = 0; i < size_; ++i) {
    if (entries_[i].req == req) {
      const Entry hit = entries_[i];
      for (std::size_t j = i; j > 0; --j) entries_[j] = entries_[j - 1];
      entries_[0] = hit;
      value = hit.value;
      return true;
    }
  }
  return false;
}

void MacCache::insert(const MacRequest& req, MacValue value) noexcept {
  if (size_ < kCapacity) ++size_;
  for (std::size_t j = size_ - 1; j > 0; --j) entries_[j] = entries_[j - 1];
  entries_[0] = Entry{req, value};
}

MacUnit::MacUnit(MacWidths widths, MacKey key, bool cache_enabled)
    : widths_(widths), key_(key), cache_enabled_(cache_enabled) {
  widths_.validate();
}

MacResult MacUnit::compute(const MacRequest& req) {
  MacResult result;
  if (cache_enabled_ && cache_.lookup(req, result.value)) {
    result.hit = true;
    return result;
  }
  result.value = compute_mac(key_, req, widths_);
  if (cache_enabled_) cache_.insert(req, result.value);
  return result;
}

void MacUnit::set_key(MacKey key) noexcept {
  key_ = key;
  cache_.clear();
}

void MacUnit::set_cache_enabled(bool enabled) noexcept {
  cache_enabled_ = enabled;
  cache_.clear();
}

MacUnit configure_widths(unsigned address_bits, unsigned mac_bits, MacKey key,
                         bool cache_enabled) {
  return MacUnit(MacWidths{address_bits, mac_bits}, key, cache_enabled);
}

}  // namespace zipvm
