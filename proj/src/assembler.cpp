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

#include "zipvm/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "zipvm/error.hpp"

namespace zipvm {
namespace {

struct Statement {
  std::size_t line = 0;
  std::vector<std::string> labels;
  std::string op;  // mnemonic or directive, lower-cased; empty for label-only
  std::vector<std::string> args;
};

enum class Fixup { None, Branch, Jump, Hi16, Lo16 };

struct CodeItem {
  Instruction in;
  Fixup fixup = Fixup::None;
  std::string symbol;
  std::uint64_t absolute = 0;  // numeric target when symbol is empty
  std::size_t line = 0;
};

struct DataFixup {
  std::size_t offset = 0;
  std::string symbol;
  std::size_t line = 0;
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
  auto tail = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
  if (!head(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), tail);
}

std::optional<std::int64_t> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  const auto sv = static_cast<std::int64_t>(v);
  return neg ? -sv : sv;
}

std::optional<unsigned> parse_register(std::string_view s) {
  const std::string r = lower(std::string(s));
  if (r == "zero") return kRegZero;
  if (r == "ra") return kRegRa;
  if (r == "sp") return kRegSp;
  if (r == "a0") return kRegA0;
  if (r.size() >= 2 && r[0] == 'r') {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(r.data() + 1, r.data() + r.size(), v);
    if (ec == std::errc{} && ptr == r.data() + r.size() && v < kNumRegisters) return v;
  }
  return std::nullopt;
}

std::vector<std::string> split_args(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::vector<Statement> parse_lines(std::string_view source) {
  std::vector<Statement> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    const std::size_t nl = source.find('\n', pos);
    std::string_view raw = source.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? source.size() + 1 : nl + 1;
    ++line_no;

    const auto cut = raw.find_first_of(";#");
    std::string text = trim(raw.substr(0, cut));
    if (text.empty()) continue;

    Statement st;
    st.line = line_no;
    // leading labels
    for (;;) {
      const auto colon = text.find(':');
      if (colon == std::string::npos) break;
      std::string label = trim(std::string_view(text).substr(0, colon));
      if (!is_identifier(label)) break;
      st.labels.push_back(label);
      text = trim(std::string_view(text).substr(colon + 1));
    }
    if (!text.empty()) {
      const auto sp = text.find_first_of(" \t");
      st.op = lower(text.substr(0, sp));
      if (sp != std::string::npos) {
        const std::string rest = trim(std::string_view(text).substr(sp));
        if (st.op == ".func" || st.op == ".rawfunc" || st.op == ".entry" ||
            st.op == ".zero") {
          std::istringstream ss(rest);
          for (std::string tok; ss >> tok;) st.args.push_back(tok);
        } else {
          st.args = split_args(rest);
        }
      }
    }
    out.push_back(std::move(st));
  }
  return out;
}

class Assembler {
 public:
  ProgramImage run(std::string_view source) {
    auto statements = parse_lines(source);
    mark_leaf_functions(statements);
    for (const auto& st : statements) emit(st);
    if (current_func_) throw AsmError(func_line_, "missing .endfunc for '" + current_func_->name + "'");
    return link();
  }

 private:
  enum class Section { Text, Data };

  struct OpenFunction {
    std::string name;
    bool instrumented = false;
    bool leaf = true;
    unsigned frame = 16;
    std::uint64_t start = 0;
  };

  void mark_leaf_functions(const std::vector<Statement>& statements) {
    std::optional<std::size_t> open;
    for (const auto& st : statements) {
      if (st.op == ".func" || st.op == ".rawfunc") {
        if (open) throw AsmError(st.line, "nested function definition");
        open = st.line;
        leaf_by_line_[st.line] = true;
      } else if (st.op == ".endfunc") {
        open.reset();
      } else if (st.op == "call" && open) {
        leaf_by_line_[*open] = false;
      }
    }
  }

  [[nodiscard]] std::uint64_t code_pc() const {
    return layout::kCodeBase + code_.size() * kInstructionBytes;
  }

  void define(const std::string& name, std::uint64_t addr, std::size_t line) {
    if (parse_register(name)) throw AsmError(line, "label '" + name + "' shadows a register");
    if (!symbols_.emplace(name, addr).second) {
      throw AsmError(line, "duplicate label '" + name + "'");
    }
  }

  void emit(const Statement& st) {
    const std::uint64_t here =
        section_ == Section::Text ? code_pc() : layout::kDataBase + data_.size();
    for (const auto& l : st.labels) define(l, here, st.line);
    if (st.op.empty()) return;
    if (st.op[0] == '.') {
      directive(st);
    } else {
      if (section_ != Section::Text) throw AsmError(st.line, "instruction in .data section");
      instruction(st);
    }
  }

  void expect_args(const Statement& st, std::size_t n) {
    if (st.args.size() != n) {
      throw AsmError(st.line, "'" + st.op + "' expects " + std::to_string(n) +
                                  " operand(s), got " + std::to_string(st.args.size()));
    }
  }

  std::int64_t number(const Statement& st, const std::string& s) {
    auto v = parse_number(s);
    if (!v) throw AsmError(st.line, "malformed number '" + s + "'");
    return *v;
  }

  unsigned reg(const Statement& st, const std::string& s) {
    auto r = parse_register(s);
    if (!r) throw AsmError(st.line, "malformed register '" + s + "'");
    return *r;
  }

  void directive(const Statement& st) {
    if (st.op == ".text") {
      section_ = Section::Text;
    } else if (st.op == ".data") {
      section_ = Section::Data;
    } else if (st.op == ".entry") {
      expect_args(st, 1);
      entry_ = st.args[0];
      entry_line_ = st.line;
    } else if (st.op == ".func" || st.op == ".rawfunc") {
      if (section_ != Section::Text) throw AsmError(st.line, "function in .data section");
      if (st.args.empty() || !is_identifier(st.args[0])) {
        throw AsmError(st.line, "'" + st.op + "' needs a function name");
      }
      OpenFunction f;
      f.name = st.args[0];
      f.instrumented = st.op == ".func";
      f.leaf = leaf_by_line_.at(st.line);
      f.start = code_pc();
      unsigned locals = 1;
      if (st.args.size() == 2 && f.instrumented) {
        const auto n = number(st, st.args[1]);
        if (n < 0 || n > 1000) throw AsmError(st.line, "bad local slot count");
        locals = static_cast<unsigned>(n);
      } else if (st.args.size() > (f.instrumented ? 2u : 1u)) {
        throw AsmError(st.line, "too many operands for '" + st.op + "'");
      }
      f.frame = frame_bytes(locals);
      define(f.name, f.start, st.line);
      func_line_ = st.line;
      current_func_ = f;
      if (f.instrumented && !f.leaf) {
        push(Instruction{Opcode::Zip}, st.line);
        push(Instruction{Opcode::Addi, kRegSp, kRegSp, 0, -static_cast<std::int64_t>(f.frame)}, st.line);
        push(Instruction{Opcode::St, 0, kRegSp, kRegRa, static_cast<std::int64_t>(f.frame) - 8}, st.line);
      }
    } else if (st.op == ".endfunc") {
      if (!current_func_) throw AsmError(st.line, ".endfunc without .func");
      functions_.push_back(FunctionInfo{current_func_->name, current_func_->start, code_pc(),
                                        current_func_->leaf});
      current_func_.reset();
    } else if (st.op == ".word") {
      require_data(st);
      for (const auto& a : st.args) {
        if (auto v = parse_number(a)) {
          append_word(static_cast<std::uint64_t>(*v));
        } else if (is_identifier(a)) {
          data_fixups_.push_back(DataFixup{data_.size(), a, st.line});
          append_word(0);
        } else {
          throw AsmError(st.line, "malformed .word operand '" + a + "'");
        }
      }
    } else if (st.op == ".byte") {
      require_data(st);
      for (const auto& a : st.args) {
        const auto v = number(st, a);
        if (v < -128 || v > 255) throw AsmError(st.line, "byte out of range '" + a + "'");
        data_.push_back(static_cast<std::uint8_t>(v));
      }
    } else if (st.op == ".zero") {
      require_data(st);
      expect_args(st, 1);
      const auto n = number(st, st.args[0]);
      if (n < 0 || n > static_cast<std::int64_t>(layout::kDataLimit - layout::kDataBase)) {
        throw AsmError(st.line, "bad .zero size");
      }
      data_.insert(data_.end(), static_cast<std::size_t>(n), 0);
    } else {
      throw AsmError(st.line, "unknown directive '" + st.op + "'");
    }
  }

  void require_data(const Statement& st) {
    if (section_ != Section::Data) throw AsmError(st.line, "'" + st.op + "' outside .data");
  }

  void append_word(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) data_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void push(Instruction in, std::size_t line, Fixup fix = Fixup::None, std::string sym = {},
            std::uint64_t absolute = 0) {
    code_.push_back(CodeItem{in, fix, std::move(sym), absolute, line});
  }

  // Branch/jump target: label or absolute numeric address.
  void push_target(Instruction in, const Statement& st, const std::string& target, Fixup fix) {
    if (auto v = parse_number(target)) {
      if (*v < 0) throw AsmError(st.line, "negative target address");
      push(in, st.line, fix, {}, static_cast<std::uint64_t>(*v));
    } else if (is_identifier(target)) {
      push(in, st.line, fix, target);
    } else {
      throw AsmError(st.line, "malformed target '" + target + "'");
    }
  }

  // "imm(rs)" memory operand.
  std::pair<std::int64_t, unsigned> mem_operand(const Statement& st, const std::string& s) {
    const auto open = s.find('(');
    const auto close = s.rfind(')');
    if (open == std::string::npos || close != s.size() - 1 || close < open) {
      throw AsmError(st.line, "malformed memory operand '" + s + "'");
    }
    const std::string off = trim(std::string_view(s).substr(0, open));
    const std::int64_t imm = off.empty() ? 0 : number(st, off);
    return {imm, reg(st, trim(std::string_view(s).substr(open + 1, close - open - 1)))};
  }

  void check_imm16(const Statement& st, std::int64_t v, bool unsigned_imm) {
    const bool ok = unsigned_imm ? (v >= 0 && v <= 0xFFFF) : (v >= -32768 && v <= 32767);
    if (!ok) throw AsmError(st.line, "immediate out of range: " + std::to_string(v));
  }

  void instruction(const Statement& st) {
    const std::string& m = st.op;
    // pseudo instructions
    if (m == "li") {
      expect_args(st, 2);
      const unsigned rd = reg(st, st.args[0]);
      const auto v = number(st, st.args[1]);
      if (v >= -32768 && v <= 32767) {
        push(Instruction{Opcode::Addi, static_cast<std::uint8_t>(rd), kRegZero, 0, v}, st.line);
      } else if (v >= 0 && v <= 0xFFFFFFFFll) {
        push(Instruction{Opcode::Lui, static_cast<std::uint8_t>(rd), 0, 0, (v >> 16) & 0xFFFF}, st.line);
        push(Instruction{Opcode::Ori, static_cast<std::uint8_t>(rd), static_cast<std::uint8_t>(rd), 0,
                         v & 0xFFFF},
             st.line);
      } else {
        throw AsmError(st.line, "li immediate out of 32-bit range");
      }
      return;
    }
    if (m == "la") {
      expect_args(st, 2);
      const auto rd = static_cast<std::uint8_t>(reg(st, st.args[0]));
      if (!is_identifier(st.args[1])) throw AsmError(st.line, "la needs a symbol");
      push(Instruction{Opcode::Lui, rd}, st.line, Fixup::Hi16, st.args[1]);
      push(Instruction{Opcode::Ori, rd, rd}, st.line, Fixup::Lo16, st.args[1]);
      return;
    }
    if (m == "mv") {
      expect_args(st, 2);
      push(Instruction{Opcode::Addi, static_cast<std::uint8_t>(reg(st, st.args[0])),
                       static_cast<std::uint8_t>(reg(st, st.args[1])), 0, 0},
           st.line);
      return;
    }
    if (m == "j") {
      expect_args(st, 1);
      push_target(Instruction{Opcode::Jmp}, st, st.args[0], Fixup::Jump);
      return;
    }

    const auto info = find_opcode(m);
    if (!info) throw AsmError(st.line, "unknown mnemonic '" + m + "'");
    Instruction in{info->op};
    auto r8 = [&](const std::string& s) { return static_cast<std::uint8_t>(reg(st, s)); };
    switch (info->format) {
      case Format::None:
        expect_args(st, 0);
        if (in.op == Opcode::Ret && current_func_ && current_func_->instrumented &&
            !current_func_->leaf) {
          const auto frame = static_cast<std::int64_t>(current_func_->frame);
          push(Instruction{Opcode::Ld, kRegRa, kRegSp, 0, frame - 8}, st.line);
          push(Instruction{Opcode::Addi, kRegSp, kRegSp, 0, frame}, st.line);
          push(Instruction{Opcode::Unzip}, st.line);
        }
        push(in, st.line);
        return;
      case Format::Reg3:
        expect_args(st, 3);
        in.rd = r8(st.args[0]);
        in.rs1 = r8(st.args[1]);
        in.rs2 = r8(st.args[2]);
        break;
      case Format::RegImm:
        expect_args(st, 3);
        in.rd = r8(st.args[0]);
        in.rs1 = r8(st.args[1]);
        in.imm = number(st, st.args[2]);
        check_imm16(st, in.imm, in.op == Opcode::Ori);
        break;
      case Format::Upper:
        expect_args(st, 2);
        in.rd = r8(st.args[0]);
        in.imm = number(st, st.args[1]);
        check_imm16(st, in.imm, true);
        break;
      case Format::Load: {
        expect_args(st, 2);
        in.rd = r8(st.args[0]);
        auto [imm, base] = mem_operand(st, st.args[1]);
        check_imm16(st, imm, false);
        in.imm = imm;
        in.rs1 = static_cast<std::uint8_t>(base);
        break;
      }
      case Format::Store: {
        expect_args(st, 2);
        in.rs2 = r8(st.args[0]);
        auto [imm, base] = mem_operand(st, st.args[1]);
        check_imm16(st, imm, false);
        in.imm = imm;
        in.rs1 = static_cast<std::uint8_t>(base);
        break;
      }
      case Format::Branch:
        expect_args(st, 3);
        in.rs1 = r8(st.args[0]);
        in.rs2 = r8(st.args[1]);
        push_target(in, st, st.args[2], Fixup::Branch);
        return;
      case Format::Jump:
        expect_args(st, 1);
        push_target(in, st, st.args[0], Fixup::Jump);
        return;
      case Format::Reg1:
        expect_args(st, 1);
        in.rs1 = r8(st.args[0]);
        break;
      case Format::Reg2:
        expect_args(st, 2);
        in.rs1 = r8(st.args[0]);
        in.rs2 = r8(st.args[1]);
        break;
    }
    push(in, st.line);
  }

  std::uint64_t resolve(const std::string& name, std::size_t line) const {
    auto it = symbols_.find(name);
    if (it == symbols_.end()) throw AsmError(line, "undefined symbol '" + name + "'");
    return it->second;
  }

  ProgramImage link() {
    ProgramImage image;
    if (code_.size() * kInstructionBytes > layout::kCodeLimit - layout::kCodeBase) {
      throw AsmError(0, "code section too large");
    }
    if (data_.size() > layout::kDataLimit - layout::kDataBase) {
      throw AsmError(0, "data section too large");
    }
    image.code.reserve(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
      CodeItem item = code_[i];
      const std::uint64_t pc = layout::kCodeBase + i * kInstructionBytes;
      const std::uint64_t target =
          item.symbol.empty() ? item.absolute : resolve(item.symbol, item.line);
      switch (item.fixup) {
        case Fixup::None:
          break;
        case Fixup::Branch: {
          const auto delta = static_cast<std::int64_t>(target) - static_cast<std::int64_t>(pc);
          if (delta % static_cast<std::int64_t>(kInstructionBytes) != 0) {
            throw AsmError(item.line, "misaligned branch target");
          }
          item.in.imm = delta / static_cast<std::int64_t>(kInstructionBytes);
          if (item.in.imm < -32768 || item.in.imm > 32767) {
            throw AsmError(item.line, "branch target out of range");
          }
          break;
        }
        case Fixup::Jump:
          if (target % kInstructionBytes != 0) throw AsmError(item.line, "misaligned jump target");
          item.in.imm = static_cast<std::int64_t>(target);
          break;
        case Fixup::Hi16:
          if (target > 0xFFFFFFFFull) throw AsmError(item.line, "symbol address exceeds 32 bits");
          item.in.imm = static_cast<std::int64_t>((target >> 16) & 0xFFFF);
          break;
        case Fixup::Lo16:
          item.in.imm = static_cast<std::int64_t>(target & 0xFFFF);
          break;
      }
      try {
        (void)encode(item.in);
      } catch (const VmError& e) {
        throw AsmError(item.line, e.what());
      }
      image.code.push_back(item.in);
    }
    for (const auto& fix : data_fixups_) {
      const std::uint64_t v = resolve(fix.symbol, fix.line);
      for (int b = 0; b < 8; ++b) data_[fix.offset + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    image.data = std::move(data_);
    image.symbols = symbols_;
    image.functions = std::move(functions_);

    if (entry_) {
      if (auto v = parse_number(*entry_)) {
        image.entry = static_cast<std::uint64_t>(*v);
      } else {
        image.entry = resolve(*entry_, entry_line_);
      }
    } else {
      auto it = symbols_.find("main");
      if (it == symbols_.end()) throw AsmError(0, "no entry symbol (define 'main' or use .entry)");
      image.entry = it->second;
    }
    if (!image.is_code_address(image.entry)) throw AsmError(entry_line_, "entry is not a code address");
    return image;
  }

  Section section_ = Section::Text;
  std::vector<CodeItem> code_;
  std::vector<std::uint8_t> data_;
  std::vector<DataFixup> data_fixups_;
  std::map<std::string, std::uint64_t> symbols_;
  std::vector<FunctionInfo> functions_;
  std::map<std::size_t, bool> leaf_by_line_;
  std::optional<OpenFunction> current_func_;
  std::size_t func_line_ = 0;
  std::optional<std::string> entry_;
  std::size_t entry_line_ = 0;
};

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

ProgramImage assemble(std::string_view source) { return Assembler{}.run(source); }

std::string disassemble(const ProgramImage& image) {
  std::multimap<std::uint64_t, std::string> labels;
  std::set<std::string> function_names;
  for (const auto& f : image.functions) function_names.insert(f.name);
  for (const auto& [name, addr] : image.symbols) {
    if (!function_names.count(name)) labels.emplace(addr, name);
  }

  std::string entry_name = hex(image.entry);
  for (const auto& [name, addr] : image.symbols) {
    if (addr == image.entry) {
      entry_name = name;
      break;
    }
  }

  std::ostringstream out;
  out << "; zipvm disassembly\n";
  out << ".entry " << entry_name << "\n";
  out << ".text\n";
  auto emit_labels = [&](std::uint64_t addr) {
    auto [lo, hi] = labels.equal_range(addr);
    for (auto it = lo; it != hi; ++it) out << it->second << ":\n";
  };
  const FunctionInfo* open = nullptr;
  for (std::size_t i = 0; i <= image.code.size(); ++i) {
    const std::uint64_t pc = image.code_base + i * kInstructionBytes;
    if (open && pc == open->end) {
      out << ".endfunc\n";
      open = nullptr;
    }
    for (const auto& f : image.functions) {
      if (f.start == pc && !open && (f.end > f.start || i == image.code.size())) {
        out << ".rawfunc " << f.name << "\n";
        open = &f;
        if (f.end == f.start) {
          out << ".endfunc\n";
          open = nullptr;
        }
      }
    }
    emit_labels(pc);
    if (i < image.code.size()) out << "    " << format_instruction(image.code[i], pc) << "\n";
  }

  out << ".data\n";
  std::size_t i = 0;
  while (i <= image.data.size()) {
    emit_labels(image.data_base + i);
    if (i == image.data.size()) break;
    std::size_t stop = std::min(image.data.size(), i + 16);
    auto next = labels.upper_bound(image.data_base + i);
    if (next != labels.end() && next->first < image.data_base + stop) {
      stop = static_cast<std::size_t>(next->first - image.data_base);
    }
    out << "    .byte ";
    for (std::size_t j = i; j < stop; ++j) {
      out << (j > i ? ", " : "") << hex(image.data[j]);
    }
    out << "\n";
    i = stop;
  }
  return out.str();
}

}  // namespace zipvm
