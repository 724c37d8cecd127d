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

#include "zipvm/redteam.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "zipvm/assembler.hpp"
#include "zipvm/error.hpp"
#include "zipvm/programs.hpp"
#include "parallel.hpp"

namespace zipvm {
namespace {

constexpr std::string_view kLibraryText =
#include "attack_library.inc"
    ;

using Vars = std::map<std::string, std::uint64_t>;

// Evaluates operand expressions. With no machine attached it only checks
// syntax and the capabilities each term needs.
class Evaluator {
 public:
  Evaluator(const AttackerCapabilities& caps, const Machine* machine, const Vars* vars)
      : caps_(caps), m_(machine), vars_(vars) {}

  std::uint64_t eval(std::string_view expr) {
    if (expr.empty()) fail("empty expression");
    std::uint64_t total = 0;
    bool negate = false;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= expr.size(); ++i) {
      const char c = i < expr.size() ? expr[i] : '\0';
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (depth < 0) fail("unbalanced parentheses in '" + std::string(expr) + "'");
      if (depth == 0 && (c == '+' || c == '-' || c == '\0')) {
        if (i == start && i < expr.size() && c == '-' && i == 0) {
          negate = true;
          start = i + 1;
          continue;
        }
        const std::uint64_t v = term(expr.substr(start, i - start));
        total = negate ? total - v : total + v;
        negate = c == '-';
        start = i + 1;
      }
    }
    if (depth != 0) fail("unbalanced parentheses in '" + std::string(expr) + "'");
    return total;
  }

  std::vector<std::string> errors;

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ScenarioError(msg); }

  void need(bool ok, const std::string& what) {
    if (!ok) errors.push_back(what);
  }

  std::uint64_t term(std::string_view t) {
    if (t.empty()) fail("malformed expression");
    if (std::isdigit(static_cast<unsigned char>(t[0]))) {
      int base = 10;
      std::string_view digits = t;
      if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
        base = 16;
        digits = t.substr(2);
      }
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
      if (ec != std::errc{} || p != digits.data() + digits.size()) {
        fail("malformed number '" + std::string(t) + "'");
      }
      return v;
    }
    if (t == "sp") {
      need(caps_.knows_layout, "'sp' requires the layout capability");
      return m_ ? m_->reg(kRegSp) : 0;
    }
    if (t == "top" || t == "key") {
      errors.push_back("the " + std::string(t) + " register is not observable by the attacker");
      return 0;
    }
    const std::string name(t.substr(1));
    switch (t[0]) {
      case '@':
        if (!m_) return 0;
        return m_->image().symbol(name);
      case '$':
        if (!vars_) return 0;
        if (auto it = vars_->find(name); it != vars_->end()) return it->second;
        fail("undefined variable '$" + name + "'");
      case '%':
        need(caps_.knows_layout, "'%" + name + "' requires the layout capability");
        return layout_constant(name);
      default:
        break;
    }
    if (auto open = t.find('('); open != std::string_view::npos && t.back() == ')') {
      const auto fn = t.substr(0, open);
      const std::uint64_t inner = eval(t.substr(open + 1, t.size() - open - 2));
      if (fn == "addr") return m_ ? m_->ra_address(inner) : 0;
      if (fn == "macf") return m_ ? m_->ra_mac_field(inner) : 0;
      fail("unknown function '" + std::string(fn) + "'");
    }
    fail("malformed term '" + std::string(t) + "'");
  }

  std::uint64_t layout_constant(const std::string& name) const {
    if (name == "shadow_offset") {
      return m_ ? m_->config().mode.parallel_offset : layout::kParallelShadowOffset;
    }
    if (name == "shadow_ptr_slot") return layout::kShadowPtrSlot;
    if (name == "stack_top") return layout::kStackTop;
    if (name == "data_base") return layout::kDataBase;
    fail("unknown layout constant '%" + name + "'");
  }

  const AttackerCapabilities& caps_;
  const Machine* m_;
  const Vars* vars_;
};

std::string var_name(const AttackAction& a) {
  if (a.var.size() < 2 || a.var[0] != '$') {
    throw ScenarioError("line " + std::to_string(a.line) + ": expected a $variable, got '" +
                        a.var + "'");
  }
  return a.var.substr(1);
}

void run_action(const AttackAction& a, const AttackerCapabilities& caps, Machine& m, Vars& vars,
                std::mt19937_64& rng) {
  Evaluator ev(caps, &m, &vars);
  switch (a.kind) {
    case ActionKind::Read:
      vars[var_name(a)] = m.read_u64(ev.eval(a.operands.at(0)));
      break;
    case ActionKind::Write:
      m.write_u64(ev.eval(a.operands.at(0)), ev.eval(a.operands.at(1)));
      break;
    case ActionKind::Mac: {
      const auto addr = ev.eval(a.operands.at(0)) & m.widths().address_mask();
      const auto prev = ev.eval(a.operands.at(1)) & m.widths().mac_mask();
      // The leaked key value, used off-machine; Top stays untouched.
      vars[var_name(a)] = compute_mac(m.key(), MacRequest{addr, prev}, m.widths());
      break;
    }
    case ActionKind::Pack:
      vars[var_name(a)] = m.pack_ra(ev.eval(a.operands.at(0)), ev.eval(a.operands.at(1)));
      break;
    case ActionKind::Guess:
      vars[var_name(a)] = rng() & m.widths().mac_mask();
      break;
    case ActionKind::LocateShadow:
      vars[var_name(a)] = m.read_u64(layout::kShadowPtrSlot);
      break;
    case ActionKind::WriteTop:
    case ActionKind::WriteKey:
    case ActionKind::ReadTop:
    case ActionKind::ReadKey:
      throw ScenarioError("dedicated registers are not accessible");
  }
}

struct ActionSpec {
  std::string_view word;
  ActionKind kind;
  bool has_var;
  std::size_t operands;
};

constexpr ActionSpec kActions[] = {
    {"read", ActionKind::Read, true, 1},
    {"write", ActionKind::Write, false, 2},
    {"mac", ActionKind::Mac, true, 2},
    {"pack", ActionKind::Pack, true, 2},
    {"guess", ActionKind::Guess, true, 0},
    {"locate_shadow", ActionKind::LocateShadow, true, 0},
    {"write_top", ActionKind::WriteTop, false, 1},
    {"write_key", ActionKind::WriteKey, false, 1},
    {"read_top", ActionKind::ReadTop, true, 0},
    {"read_key", ActionKind::ReadKey, true, 0},
};

std::optional<unsigned> parse_uint(std::string_view s) {
  unsigned v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

AttackReport run_attack(const AttackScenario& sc, const ProgramImage& image, ProtectionKind mode,
                        std::uint64_t seed, std::uint64_t max_cycles) {
  AttackReport report;
  report.scenario = sc.name;
  report.mode = mode;
  report.seed = seed;

  MachineConfig cfg;
  cfg.mode.kind = mode;
  cfg.seed = seed;
  if (sc.mac_bits) cfg.widths.mac_bits = *sc.mac_bits;
  Machine m(image, cfg);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);

  Vars vars;
  Evaluator statics(sc.caps, &m, &vars);
  std::vector<std::optional<std::uint64_t>> stage_pc;
  for (const auto& st : sc.stages) {
    stage_pc.push_back(st.trigger.pc ? std::optional(statics.eval(*st.trigger.pc)) : std::nullopt);
  }
  const std::uint64_t goal = statics.eval(sc.goal);

  std::vector<unsigned> hits(sc.stages.size(), 0);
  std::size_t next = 0;
  bool bypassed = false;
  while (m.status() == RunStatus::Running) {
    if (m.timing().cycle >= max_cycles) {
      report.diagnostic = "cycle limit reached";
      break;
    }
    for (std::size_t s = 0; s < sc.stages.size(); ++s) {
      if (stage_pc[s] && m.pc() == *stage_pc[s]) ++hits[s];
    }
    while (next < sc.stages.size()) {
      const auto& trig = sc.stages[next].trigger;
      const bool fire = stage_pc[next]
                            ? (m.pc() == *stage_pc[next] && hits[next] >= trig.hit)
                            : (trig.cycle && m.timing().cycle >= *trig.cycle);
      if (!fire) break;
      try {
        for (const auto& a : sc.stages[next].actions) run_action(a, sc.caps, m, vars, rng);
      } catch (const VmError& e) {
        report.verdict = Verdict::Failed;
        report.diagnostic = std::string("attacker action failed: ") + e.what();
        report.cycles = m.timing().cycle;
        return report;
      }
      ++next;
    }
    if (next == sc.stages.size() && m.pc() == goal) {
      bypassed = true;
      break;
    }
    m.step();
  }

  report.cycles = m.timing().cycle;
  if (m.status() == RunStatus::Faulted) {
    report.verdict = Verdict::Detected;
    report.fault = m.fault()->kind;
  } else if (bypassed) {
    report.verdict = Verdict::Bypassed;
  } else {
    report.verdict = Verdict::Failed;
    if (next < sc.stages.size()) {
      report.diagnostic = "trigger never hit (stage " + std::to_string(next + 1) + ")";
    } else if (m.status() == RunStatus::Error) {
      report.diagnostic = "machine error: " + m.result().error;
    } else if (report.diagnostic.empty()) {
      report.diagnostic = "goal not reached; program " + std::string(status_name(m.status()));
    }
  }
  return report;
}

void check_valid(const AttackScenario& sc) {
  const auto errs = validate_scenario(sc);
  if (errs.empty()) return;
  std::string msg = "scenario '" + sc.name + "' rejected:";
  for (const auto& e : errs) msg += "\n  " + e;
  throw ScenarioError(msg);
}

}  // namespace

std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::Detected: return "detected";
    case Verdict::Bypassed: return "bypassed";
    case Verdict::Failed: return "failed";
  }
  return "?";
}

std::vector<std::string> validate_scenario(const AttackScenario& sc) {
  std::vector<std::string> errs;
  auto where = [](const AttackAction& a) { return "line " + std::to_string(a.line) + ": "; };
  Evaluator ev(sc.caps, nullptr, nullptr);
  auto check_expr = [&](const std::string& e, const std::string& prefix) {
    try {
      ev.eval(e);
    } catch (const ScenarioError& err) {
      errs.push_back(prefix + err.what());
    }
  };
  if (sc.name.empty()) errs.emplace_back("scenario has no name");
  if (sc.goal.empty()) errs.emplace_back("scenario has no goal");
  if (sc.program_source.empty()) errs.emplace_back("scenario has no program");
  check_expr(sc.goal, "goal: ");
  for (const auto& st : sc.stages) {
    if (!st.trigger.pc && !st.trigger.cycle) errs.emplace_back("stage without a trigger");
    if (st.trigger.pc) check_expr(*st.trigger.pc, "trigger: ");
    for (const auto& a : st.actions) {
      switch (a.kind) {
        case ActionKind::Read:
        case ActionKind::LocateShadow:
          if (!sc.caps.read_memory) errs.push_back(where(a) + "reading memory is not granted");
          if (a.kind == ActionKind::LocateShadow && !sc.caps.knows_layout) {
            errs.push_back(where(a) + "locate_shadow requires the layout capability");
          }
          break;
        case ActionKind::Write:
          if (!sc.caps.write_memory) errs.push_back(where(a) + "writing memory is not granted");
          break;
        case ActionKind::Mac:
          if (!sc.caps.knows_key) errs.push_back(where(a) + "mac requires the leaked key");
          break;
        case ActionKind::Pack:
        case ActionKind::Guess:
          break;
        case ActionKind::WriteTop:
        case ActionKind::WriteKey:
        case ActionKind::ReadTop:
        case ActionKind::ReadKey:
          errs.push_back(where(a) + "Top and Key registers are outside the attacker's reach");
          break;
      }
      for (const auto& op : a.operands) check_expr(op, where(a));
    }
  }
  for (auto& e : ev.errors) errs.push_back(std::move(e));
  if (sc.mac_bits && (*sc.mac_bits < 1 || *sc.mac_bits > 24)) {
    errs.emplace_back("mac_bits must be in [1, 24]");
  }
  return errs;
}

AttackReport attach_and_run(const AttackScenario& sc, ProtectionKind mode, std::uint64_t seed,
                            std::uint64_t max_cycles) {
  check_valid(sc);
  return run_attack(sc, assemble(sc.program_source), mode, seed, max_cycles);
}

RunResult benign_run(const AttackScenario& sc, ProtectionKind mode, std::uint64_t seed,
                     std::uint64_t max_cycles) {
  MachineConfig cfg;
  cfg.mode.kind = mode;
  cfg.seed = seed;
  if (sc.mac_bits) cfg.widths.mac_bits = *sc.mac_bits;
  Machine m(assemble(sc.program_source), cfg);
  return m.run(max_cycles);
}

std::vector<AttackScenario> parse_scenarios(std::string_view text,
                                            const std::filesystem::path& base_dir) {
  std::vector<AttackScenario> out;
  std::optional<AttackScenario> cur;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  auto err = [&](const std::string& msg) {
    return ScenarioError("line " + std::to_string(line_no) + ": " + msg);
  };
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];

    if (kw == "scenario") {
      if (cur) throw err("missing 'end' before new scenario");
      if (tok.size() != 2) throw err("usage: scenario NAME");
      cur.emplace();
      cur->name = tok[1];
      continue;
    }
    if (!cur) throw err("'" + kw + "' outside a scenario block");
    if (kw == "end") {
      if (cur->program_source.empty()) throw err("scenario '" + cur->name + "' has no program");
      out.push_back(std::move(*cur));
      cur.reset();
    } else if (kw == "description") {
      const auto pos = line.find("description") + 11;
      const auto first = line.find_first_not_of(" \t", pos);
      cur->description = first == std::string::npos ? "" : line.substr(first);
      while (!cur->description.empty() && std::isspace(static_cast<unsigned char>(cur->description.back()))) {
        cur->description.pop_back();
      }
    } else if (kw == "program") {
      if (tok.size() != 2) throw err("usage: program BUILTIN_NAME");
      auto src = builtin_program(tok[1]);
      if (!src) throw err("unknown built-in program '" + tok[1] + "'");
      cur->program = tok[1];
      cur->program_source = std::string(*src);
    } else if (kw == "program_file") {
      if (tok.size() != 2) throw err("usage: program_file PATH");
      const auto path = base_dir / tok[1];
      std::ifstream f(path);
      if (!f) throw err("cannot open program file '" + path.string() + "'");
      std::ostringstream ss;
      ss << f.rdbuf();
      cur->program = path.filename().string();
      cur->program_source = ss.str();
    } else if (kw == "caps") {
      cur->caps = AttackerCapabilities{false, false, false, false};
      for (std::size_t i = 1; i < tok.size(); ++i) {
        if (tok[i] == "read") cur->caps.read_memory = true;
        else if (tok[i] == "write") cur->caps.write_memory = true;
        else if (tok[i] == "key") cur->caps.knows_key = true;
        else if (tok[i] == "layout") cur->caps.knows_layout = true;
        else throw err("unknown capability '" + tok[i] + "'");
      }
    } else if (kw == "goal") {
      if (tok.size() != 2) throw err("usage: goal EXPR");
      cur->goal = tok[1];
    } else if (kw == "mac_bits") {
      auto v = tok.size() == 2 ? parse_uint(tok[1]) : std::nullopt;
      if (!v) throw err("usage: mac_bits N");
      cur->mac_bits = *v;
    } else if (kw == "probabilistic") {
      cur->probabilistic = true;
    } else if (kw == "stage") {
      AttackStage st;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string::npos) throw err("malformed trigger '" + tok[i] + "'");
        const auto key = tok[i].substr(0, eq);
        const auto val = tok[i].substr(eq + 1);
        if (key == "pc") {
          st.trigger.pc = val;
        } else if (key == "cycle") {
          auto v = parse_uint(val);
          if (!v) throw err("malformed cycle '" + val + "'");
          st.trigger.cycle = *v;
        } else if (key == "hit") {
          auto v = parse_uint(val);
          if (!v || *v == 0) throw err("malformed hit count '" + val + "'");
          st.trigger.hit = *v;
        } else {
          throw err("unknown trigger key '" + key + "'");
        }
      }
      cur->stages.push_back(std::move(st));
    } else {
      const auto spec = std::find_if(std::begin(kActions), std::end(kActions),
                                     [&](const ActionSpec& s) { return s.word == kw; });
      if (spec == std::end(kActions)) throw err("unknown keyword '" + kw + "'");
      if (cur->stages.empty()) throw err("action before any 'stage'");
      const std::size_t want = spec->operands + (spec->has_var ? 1 : 0);
      if (tok.size() - 1 != want) {
        throw err("'" + kw + "' expects " + std::to_string(want) + " operand(s)");
      }
      AttackAction a;
      a.kind = spec->kind;
      a.line = line_no;
      std::size_t i = 1;
      if (spec->has_var) a.var = tok[i++];
      for (; i < tok.size(); ++i) a.operands.push_back(tok[i]);
      cur->stages.back().actions.push_back(std::move(a));
    }
  }
  if (cur) throw err("missing 'end' for scenario '" + cur->name + "'");
  return out;
}

std::vector<AttackScenario> load_scenario_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open scenario file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenarios(ss.str(), path.parent_path());
}

std::vector<AttackScenario> scenario_library() { return parse_scenarios(kLibraryText); }

const ModeTally& DetectionMatrix::tally(ProtectionKind mode) const {
  for (const auto& t : tallies) {
    if (t.mode == mode) return t;
  }
  throw Error("mode not in matrix: " + std::string(mode_name(mode)));
}

std::vector<AttackReport> DetectionMatrix::cell(const std::string& scenario,
                                                ProtectionKind mode) const {
  std::vector<AttackReport> out;
  for (const auto& r : reports) {
    if (r.scenario == scenario && r.mode == mode) out.push_back(r);
  }
  return out;
}

bool DetectionMatrix::zipper_clean(std::span<const AttackScenario> scs) const {
  if (std::find(modes.begin(), modes.end(), ProtectionKind::Zipper) == modes.end()) return true;
  if (tally(ProtectionKind::Zipper).false_positives != 0) return false;
  for (const auto& sc : scs) {
    if (sc.probabilistic) continue;
    for (const auto& r : cell(sc.name, ProtectionKind::Zipper)) {
      if (r.verdict != Verdict::Detected) return false;
    }
  }
  return true;
}

DetectionMatrix run_matrix(std::span<const AttackScenario> scenarios,
                           std::span<const ProtectionKind> modes, std::uint64_t base_seed,
                           std::uint64_t runs) {
  if (scenarios.empty() || modes.empty() || runs == 0) {
    throw Error("run_matrix needs at least one scenario, mode and run");
  }
  for (const auto& sc : scenarios) check_valid(sc);

  DetectionMatrix mx;
  mx.modes.assign(modes.begin(), modes.end());
  mx.base_seed = base_seed;
  mx.runs_per_cell = runs;
  std::vector<ProgramImage> images;
  for (const auto& sc : scenarios) {
    mx.scenarios.push_back(sc.name);
    images.push_back(assemble(sc.program_source));
  }

  const std::size_t per_scenario = modes.size() * runs;
  const std::size_t jobs = scenarios.size() * per_scenario;
  mx.reports.resize(jobs);
  std::vector<char> benign_fault(jobs, 0);
  detail::parallel_for(jobs, [&](std::size_t i) {
    const std::size_t s = i / per_scenario;
    const std::size_t mode_i = (i % per_scenario) / runs;
    const std::uint64_t seed = base_seed + i % runs;
    mx.reports[i] = run_attack(scenarios[s], images[s], modes[mode_i], seed, 1'000'000);

    MachineConfig cfg;
    cfg.mode.kind = modes[mode_i];
    cfg.seed = seed;
    if (scenarios[s].mac_bits) cfg.widths.mac_bits = *scenarios[s].mac_bits;
    Machine benign(images[s], cfg);
    const auto r = benign.run(1'000'000);
    benign_fault[i] = r.status != RunStatus::Halted ? 1 : 0;
  });

  for (std::size_t mode_i = 0; mode_i < modes.size(); ++mode_i) {
    ModeTally t;
    t.mode = modes[mode_i];
    for (std::size_t i = 0; i < jobs; ++i) {
      if ((i % per_scenario) / runs != mode_i) continue;
      const auto& r = mx.reports[i];
      ++t.applied;
      if (r.verdict == Verdict::Detected) ++t.secured;
      if (r.verdict == Verdict::Bypassed) ++t.bypassed;
      if (r.verdict == Verdict::Failed) ++t.failed;
      ++t.benign_runs;
      t.false_positives += static_cast<std::uint64_t>(benign_fault[i]);
    }
    mx.tallies.push_back(t);
  }
  return mx;
}

double brute_force_bypass_rate(std::uint64_t attempts, unsigned mac_bits, std::uint64_t seed) {
  if (attempts == 0) throw Error("brute_force_bypass_rate needs at least one attempt");
  auto lib = scenario_library();
  auto it = std::find_if(lib.begin(), lib.end(),
                         [](const AttackScenario& s) { return s.name == "brute_force_top"; });
  AttackScenario sc = *it;
  sc.mac_bits = mac_bits;
  check_valid(sc);
  const ProgramImage image = assemble(sc.program_source);
  std::vector<char> bypassed(attempts, 0);
  detail::parallel_for(attempts, [&](std::size_t i) {
    const auto r = run_attack(sc, image, ProtectionKind::Zipper, seed + i, 1'000'000);
    bypassed[i] = r.verdict == Verdict::Bypassed ? 1 : 0;
  });
  const auto hits = std::count(bypassed.begin(), bypassed.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(attempts);
}

}  // namespace zipvm
