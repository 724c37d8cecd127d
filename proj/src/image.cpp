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

#include "zipvm/image.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "zipvm/error.hpp"

namespace zipvm {
namespace {

constexpr char kMagic[4] = {'Z', 'V', 'I', 'M'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
    }
  }
  void put_string(const std::string& s) {
    if (s.size() > 0xFFFF) throw Error("symbol name too long");
    put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void put_bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::string get_string() {
    const auto len = get<std::uint16_t>();
    need(len);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  std::span<const std::uint8_t> get_bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] bool done() const noexcept { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error("image truncated");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t ProgramImage::symbol(const std::string& name) const {
  auto it = symbols.find(name);
  if (it == symbols.end()) throw Error("unknown symbol '" + name + "'");
  return it->second;
}

std::optional<std::uint64_t> ProgramImage::find_symbol(const std::string& name) const {
  auto it = symbols.find(name);
  if (it == symbols.end()) return std::nullopt;
  return it->second;
}

const FunctionInfo* ProgramImage::function_at(std::uint64_t addr) const noexcept {
  for (const auto& f : functions) {
    if (addr >= f.start && addr < f.end) return &f;
  }
  return nullptr;
}

std::uint64_t ProgramImage::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ull;
  };
  for (const auto& in : code) {
    const std::uint32_t w = encode(in);
    for (int i = 0; i < 4; ++i) mix(static_cast<std::uint8_t>(w >> (8 * i)));
  }
  for (auto b : data) mix(b);
  return h;
}

std::vector<std::uint8_t> serialize_image(const ProgramImage& image) {
  Writer w;
  for (char c : kMagic) w.put<std::uint8_t>(static_cast<std::uint8_t>(c));
  w.put<std::uint16_t>(kImageFormatVersion);
  w.put<std::uint16_t>(0);
  w.put<std::uint64_t>(image.code_base);
  w.put<std::uint64_t>(image.data_base);
  w.put<std::uint64_t>(image.entry);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(image.code.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(image.data.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(image.symbols.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(image.functions.size()));
  for (const auto& in : image.code) w.put<std::uint32_t>(encode(in));
  w.put_bytes(image.data);
  for (const auto& [name, addr] : image.symbols) {
    w.put_string(name);
    w.put<std::uint64_t>(addr);
  }
  for (const auto& f : image.functions) {
    w.put_string(f.name);
    w.put<std::uint64_t>(f.start);
    w.put<std::uint64_t>(f.end);
    w.put<std::uint8_t>(f.leaf ? 1 : 0);
  }
  return w.take();
}

ProgramImage deserialize_image(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (char c : kMagic) {
    if (r.get<std::uint8_t>() != static_cast<std::uint8_t>(c)) throw Error("bad image magic");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kImageFormatVersion) {
    throw Error("unsupported image version " + std::to_string(version));
  }
  (void)r.get<std::uint16_t>();
  ProgramImage image;
  image.code_base = r.get<std::uint64_t>();
  image.data_base = r.get<std::uint64_t>();
  image.entry = r.get<std::uint64_t>();
  const auto n_code = r.get<std::uint32_t>();
  const auto n_data = r.get<std::uint32_t>();
  const auto n_sym = r.get<std::uint32_t>();
  const auto n_func = r.get<std::uint32_t>();
  image.code.reserve(n_code);
  for (std::uint32_t i = 0; i < n_code; ++i) image.code.push_back(decode(r.get<std::uint32_t>()));
  const auto data = r.get_bytes(n_data);
  image.data.assign(data.begin(), data.end());
  for (std::uint32_t i = 0; i < n_sym; ++i) {
    auto name = r.get_string();
    image.symbols[name] = r.get<std::uint64_t>();
  }
  for (std::uint32_t i = 0; i < n_func; ++i) {
    FunctionInfo f;
    f.name = r.get_string();
    f.start = r.get<std::uint64_t>();
    f.end = r.get<std::uint64_t>();
    f.leaf = r.get<std::uint8_t>() != 0;
    image.functions.push_back(std::move(f));
  }
  if (!r.done()) throw Error("trailing bytes after image");
  return image;
}

void save_image(const ProgramImage& image, const std::filesystem::path& path) {
  const auto bytes = serialize_image(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

ProgramImage load_image_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_image(bytes);
}

}  // namespace zipvm
