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

#include "zipvm/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"

namespace zipvm {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fingerprint_hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json fault_json(const std::optional<SecurityFault>& f) {
  if (!f) return nullptr;
  return {{"kind", fault_name(f->kind)}, {"pc", f->pc}, {"cycle", f->cycle}};
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// ---- run -------------------------------------------------------------------

ordered_json run_json(const RunResult& r) {
  ordered_json j;
  j["kind"] = "run";
  j["status"] = status_name(r.status);
  j["exit_value"] = r.exit_value;
  j["fault"] = fault_json(r.fault);
  j["error"] = r.error;
  j["cycles"] = r.cycles;
  j["instructions"] = r.instructions;
  j["stall_cycles"] = r.stall_cycles;
  j["mac_ops"] = r.mac_ops;
  j["cache_hits"] = r.cache_hits;
  j["zip_unzip_executed"] = r.zip_unzip_executed;
  j["shadow_ops"] = r.shadow_ops;
  j["output"] = r.output;
  j["trace"] = r.trace;
  j["mode"] = r.mode_name;
  j["mac_bits"] = r.widths.mac_bits;
  j["address_bits"] = r.widths.address_bits;
  j["cache_enabled"] = r.cache_enabled;
  j["seed"] = r.seed;
  j["image_fingerprint"] = fingerprint_hex(r.image_fingerprint);
  return j;
}

constexpr std::string_view kRunCsvHeader =
    "mode,status,exit_value,fault,cycles,instructions,stall_cycles,mac_ops,cache_hits,"
    "zip_unzip_executed,shadow_ops,mac_bits,address_bits,cache_enabled,seed";

std::string run_csv(const RunResult& r) {
  std::ostringstream o;
  o << kRunCsvHeader << "\n"
    << r.mode_name << ',' << status_name(r.status) << ',' << r.exit_value << ','
    << (r.fault ? fault_name(r.fault->kind) : "") << ',' << r.cycles << ',' << r.instructions
    << ',' << r.stall_cycles << ',' << r.mac_ops << ',' << r.cache_hits << ','
    << r.zip_unzip_executed << ',' << r.shadow_ops << ',' << r.widths.mac_bits << ','
    << r.widths.address_bits << ',' << (r.cache_enabled ? 1 : 0) << ',' << r.seed << "\n";
  return o.str();
}

std::string run_text(const RunResult& r) {
  std::ostringstream o;
  for (const auto& line : r.trace) o << line << "\n";
  for (auto v : r.output) o << "print " << v << "\n";
  o << "status:       " << status_name(r.status) << "\n";
  if (r.fault) {
    o << "fault:        " << fault_name(r.fault->kind) << " at pc " << hex(r.fault->pc)
      << ", cycle " << r.fault->cycle << "\n";
  }
  if (!r.error.empty()) o << "error:        " << r.error << "\n";
  o << "exit value:   " << r.exit_value << "\n"
    << "cycles:       " << r.cycles << "\n"
    << "instructions: " << r.instructions << "\n"
    << "stalls:       " << r.stall_cycles << "\n"
    << "mac ops:      " << r.mac_ops << " (" << r.cache_hits << " cache hits)\n"
    << "mode:         " << r.mode_name << " (Nm=" << r.widths.mac_bits
    << ", Na=" << r.widths.address_bits << ", cache " << (r.cache_enabled ? "on" : "off")
    << ", seed " << r.seed << ")\n";
  return o.str();
}

// ---- attack matrix ---------------------------------------------------------

bool is_probabilistic(std::span<const AttackScenario> scs, const std::string& name) {
  return std::any_of(scs.begin(), scs.end(), [&](const AttackScenario& s) {
    return s.name == name && s.probabilistic;
  });
}

ordered_json tally_json(const ModeTally& t, std::string_view name) {
  return {{"mode", name},
          {"applied", t.applied},
          {"secured", t.secured},
          {"bypassed", t.bypassed},
          {"failed", t.failed},
          {"benign_runs", t.benign_runs},
          {"false_positives", t.false_positives}};
}

ordered_json matrix_json(const DetectionMatrix& m, std::span<const AttackScenario> scs) {
  ordered_json j;
  j["kind"] = "attack";
  j["base_seed"] = m.base_seed;
  j["runs_per_cell"] = m.runs_per_cell;
  j["modes"] = ordered_json::array();
  for (auto k : m.modes) j["modes"].push_back(mode_name(k));
  j["scenarios"] = ordered_json::array();
  for (const auto& s : m.scenarios) {
    j["scenarios"].push_back({{"name", s}, {"probabilistic", is_probabilistic(scs, s)}});
  }
  j["reports"] = ordered_json::array();
  for (const auto& r : m.reports) {
    j["reports"].push_back({{"scenario", r.scenario},
                            {"mode", mode_name(r.mode)},
                            {"seed", r.seed},
                            {"verdict", verdict_name(r.verdict)},
                            {"fault", r.fault ? ordered_json(fault_name(*r.fault)) : nullptr},
                            {"cycles", r.cycles},
                            {"diagnostic", r.diagnostic}});
  }
  j["tallies"] = ordered_json::array();
  for (const auto& t : m.tallies) j["tallies"].push_back(tally_json(t, mode_name(t.mode)));
  j["zipper_clean"] = m.zipper_clean(scs);
  return j;
}

std::string matrix_csv(const DetectionMatrix& m) {
  std::ostringstream o;
  o << "scenario,mode,seed,verdict,fault,cycles,diagnostic\n";
  for (const auto& r : m.reports) {
    o << r.scenario << ',' << mode_name(r.mode) << ',' << r.seed << ',' << verdict_name(r.verdict)
      << ',' << (r.fault ? fault_name(*r.fault) : "") << ',' << r.cycles << ','
      << csv_field(r.diagnostic) << "\n";
  }
  return o.str();
}

std::string cell_text(const std::vector<AttackReport>& rs) {
  if (rs.size() == 1) return std::string(verdict_name(rs[0].verdict));
  std::uint64_t d = 0, b = 0, f = 0;
  for (const auto& r : rs) {
    if (r.verdict == Verdict::Detected) ++d;
    else if (r.verdict == Verdict::Bypassed) ++b;
    else ++f;
  }
  return std::to_string(d) + "/" + std::to_string(b) + "/" + std::to_string(f);
}

std::string matrix_text(const DetectionMatrix& m, std::span<const AttackScenario> scs) {
  std::ostringstream o;
  const std::uint64_t last = m.base_seed + m.runs_per_cell - 1;
  o << "Attack test against defenses (seeds " << m.base_seed << ".." << last << ")\n";
  if (m.runs_per_cell > 1) o << "cells: detected/bypassed/failed\n";
  o << "\n";

  std::size_t name_w = 10;
  for (const auto& s : m.scenarios) name_w = std::max(name_w, s.size() + 2);
  std::vector<std::size_t> col_w;
  o << pad("scenario", name_w);
  for (auto k : m.modes) {
    col_w.push_back(std::max<std::size_t>(mode_name(k).size(), 12) + 2);
    o << pad(std::string(mode_name(k)), col_w.back());
  }
  o << "\n";
  for (const auto& s : m.scenarios) {
    o << pad(s + (is_probabilistic(scs, s) ? "*" : ""), name_w);
    for (std::size_t i = 0; i < m.modes.size(); ++i) {
      o << pad(cell_text(m.cell(s, m.modes[i])), col_w[i]);
    }
    o << "\n";
  }

  o << "\n"
    << pad("defense", 18) << pad("applied", 9, true) << pad("secured", 9, true)
    << pad("bypassed", 10, true) << pad("failed", 8, true) << pad("benign FP", 11, true)
    << "\n";
  auto row = [&](std::string_view name, const ModeTally& t) {
    o << pad(std::string(name), 18) << pad(std::to_string(t.applied), 9, true)
      << pad(std::to_string(t.secured), 9, true) << pad(std::to_string(t.bypassed), 10, true)
      << pad(std::to_string(t.failed), 8, true) << pad(std::to_string(t.false_positives), 11, true)
      << "\n";
  };
  for (const auto& t : m.tallies) row(mode_name(t.mode), t);
  const auto has = [&](ProtectionKind k) {
    return std::find(m.modes.begin(), m.modes.end(), k) != m.modes.end();
  };
  if (has(ProtectionKind::ShadowParallel) && has(ProtectionKind::ShadowCompact)) {
    ModeTally sum;
    for (auto k : {ProtectionKind::ShadowParallel, ProtectionKind::ShadowCompact}) {
      const auto& t = m.tally(k);
      sum.applied += t.applied;
      sum.secured += t.secured;
      sum.bypassed += t.bypassed;
      sum.failed += t.failed;
      sum.false_positives += t.false_positives;
    }
    row("shadow (both)", sum);
  }
  if (std::any_of(m.scenarios.begin(), m.scenarios.end(),
                  [&](const std::string& s) { return is_probabilistic(scs, s); })) {
    o << "\n* outcome depends on guessing a MAC value\n";
  }
  if (has(ProtectionKind::Zipper)) {
    o << "zipper: " << (m.zipper_clean(scs) ? "all deterministic attacks detected"
                                            : "NOT all deterministic attacks detected")
      << "\n";
  }
  return o.str();
}

// ---- bench -----------------------------------------------------------------

constexpr std::string_view kBenchFooter =
    "Cycle counts come from the in-order timing model on synthetic workloads.\n"
    "Absolute overhead percentages measured with full benchmark suites on real\n"
    "hardware are not reproducible with this model; compare configurations\n"
    "against each other instead.\n";

ordered_json bench_json(const BenchSuite& s) {
  ordered_json j;
  j["kind"] = "bench";
  j["seed"] = s.seed;
  j["mac_bits"] = s.widths.mac_bits;
  j["address_bits"] = s.widths.address_bits;
  j["entries"] = ordered_json::array();
  for (const auto& e : s.entries) {
    j["entries"].push_back({{"benchmark", e.benchmark},
                            {"mode", e.config.label()},
                            {"cache_enabled", e.config.cache_enabled},
                            {"base_cycles", e.overhead.base_cycles},
                            {"cycles", e.overhead.cycles},
                            {"slowdown", e.overhead.slowdown},
                            {"stalls", e.overhead.stalls},
                            {"mac_ops", e.overhead.mac_ops},
                            {"cache_hits", e.overhead.cache_hits},
                            {"exit_value", e.run.exit_value},
                            {"instructions", e.run.instructions}});
  }
  j["note"] = std::string(kBenchFooter);
  return j;
}

std::string bench_csv(const BenchSuite& s) {
  std::ostringstream o;
  o << kBenchCsvHeader << "\n";
  for (const auto& e : s.entries) {
    o << e.benchmark << ',' << e.config.label() << ',' << e.overhead.cycles << ','
      << fixed(e.overhead.slowdown, 6) << ',' << e.overhead.stalls << ',' << e.overhead.mac_ops
      << ',' << e.overhead.cache_hits << "\n";
  }
  return o.str();
}

std::string bench_text(const BenchSuite& s) {
  std::ostringstream o;
  o << "Runtime overhead (cycles / slowdown vs baseline), seed " << s.seed << ", Nm="
    << s.widths.mac_bits << "\n\n";
  std::vector<std::string> labels;
  for (const auto& c : bench_configs()) labels.push_back(c.label());
  o << pad("benchmark", 16);
  for (const auto& l : labels) o << pad(l, 24, true);
  o << "\n";
  std::string current;
  for (const auto& e : s.entries) {
    if (e.benchmark != current) {
      if (!current.empty()) o << "\n";
      current = e.benchmark;
      o << pad(current, 16);
    }
    const std::string cell = std::to_string(e.overhead.cycles) + " / " +
                             fixed(100.0 * e.overhead.slowdown, 2) + "%";
    o << pad(cell, 24, true);
  }
  o << "\n\n" << kBenchFooter;
  return o.str();
}

// ---- analysis --------------------------------------------------------------

std::string formula(const SecurityParams& p) {
  std::string s = "2^" + std::to_string(p.key_bits - 1);
  if (p.gadgets > 0) {
    s += " + " + std::to_string(p.gadgets) + "*2^" + std::to_string(p.mac_bits - 1);
  }
  return s;
}

ordered_json check_json(const std::optional<ToleranceCheck>& c) {
  if (!c) return nullptr;
  return {{"value", c->value}, {"target", c->target}, {"tolerance", c->tolerance},
          {"pass", c->pass}};
}

ordered_json analysis_json(const AnalysisReport& a) {
  ordered_json j;
  j["kind"] = "analyze";
  j["params"] = {{"Ns", a.params.key_bits},
                 {"Nm", a.params.mac_bits},
                 {"Na", a.params.address_bits},
                 {"N", a.params.gadgets}};
  j["expected_guesses"] = a.expected_guesses.str();
  j["expected_guesses_formula"] = formula(a.params);
  j["prob_no_valid_collision"] = a.prob_no_collision ? ordered_json(*a.prob_no_collision) : nullptr;
  j["collision_existence_exact"] = a.collision_exact;
  j["collision_existence_limit"] = a.collision_limit;
  if (a.collision_mc) {
    const auto& c = *a.collision_mc;
    j["montecarlo_collision"] = {{"mac_bits", c.mac_bits}, {"address_bits", c.address_bits},
                                 {"trials", c.trials},     {"seed", c.seed},
                                 {"hits", c.hits},         {"empirical", c.empirical},
                                 {"analytic", c.analytic}, {"limit", c.limit},
                                 {"check", check_json(a.collision_check)}};
  } else {
    j["montecarlo_collision"] = nullptr;
  }
  if (a.guess_mc) {
    const auto& g = *a.guess_mc;
    j["montecarlo_guess_cost"] = {{"mac_bits", g.mac_bits},
                                  {"trials", g.trials},
                                  {"seed", g.seed},
                                  {"censored_mean", g.censored_mean},
                                  {"conditional_mean", g.conditional_mean},
                                  {"existing_trials", g.existing_trials},
                                  {"unique_mean", g.unique_mean},
                                  {"unique_trials", g.unique_trials},
                                  {"nominal", g.nominal},
                                  {"check", check_json(a.guess_check)}};
  } else {
    j["montecarlo_guess_cost"] = nullptr;
  }
  return j;
}

std::string analysis_csv(const AnalysisReport& a) {
  std::ostringstream o;
  o << "quantity,value\n"
    << "Ns," << a.params.key_bits << "\nNm," << a.params.mac_bits << "\nNa,"
    << a.params.address_bits << "\nN," << a.params.gadgets << "\n"
    << "expected_guesses," << a.expected_guesses.str() << "\n"
    << "prob_no_valid_collision," << (a.prob_no_collision ? fixed(*a.prob_no_collision, 6) : "")
    << "\n"
    << "collision_existence_exact," << fixed(a.collision_exact, 6) << "\n"
    << "collision_existence_limit," << fixed(a.collision_limit, 6) << "\n";
  if (a.collision_mc) {
    o << "mc_collision_empirical," << fixed(a.collision_mc->empirical, 6) << "\n"
      << "mc_collision_pass," << (a.collision_check->pass ? 1 : 0) << "\n";
  }
  if (a.guess_mc) {
    o << "mc_guess_censored_mean," << fixed(a.guess_mc->censored_mean, 3) << "\n"
      << "mc_guess_conditional_mean," << fixed(a.guess_mc->conditional_mean, 3) << "\n"
      << "mc_guess_unique_mean," << fixed(a.guess_mc->unique_mean, 3) << "\n"
      << "mc_guess_pass," << (a.guess_check->pass ? 1 : 0) << "\n";
  }
  return o.str();
}

std::string verdict(const ToleranceCheck& c) {
  return std::string(c.pass ? "PASS" : "FAIL") + " (target " + fixed(c.target, 4) + " +- " +
         fixed(c.tolerance, 4) + ")";
}

std::string analysis_text(const AnalysisReport& a) {
  const auto& p = a.params;
  std::ostringstream o;
  o << "Brute-force attempts (Ns=" << p.key_bits << ", Nm=" << p.mac_bits << ", N=" << p.gadgets
    << ")\n  " << formula(p) << " = " << a.expected_guesses.str() << "\n";
  if (a.prob_no_collision) {
    o << "Probability that no valid collision exists for some gadget (N=" << p.gadgets
      << ")\n  1 - (1 - 1/e)^" << p.gadgets << " = " << fixed(*a.prob_no_collision, 6) << "\n";
  }
  o << "Collision existence for one target\n  exact at Nm=" << p.mac_bits << ": "
    << fixed(a.collision_exact, 6) << "   limit 1 - 1/e: " << fixed(a.collision_limit, 6)
    << "\n";
  if (a.collision_mc) {
    const auto& c = *a.collision_mc;
    o << "Monte Carlo collision existence (Nm=" << c.mac_bits << ", Na=" << c.address_bits
      << ", " << c.trials << " trials, seed " << c.seed << ")\n  empirical "
      << fixed(c.empirical, 4) << " vs analytic " << fixed(c.analytic, 4) << "  "
      << verdict(*a.collision_check) << "\n";
  }
  if (a.guess_mc) {
    const auto& g = *a.guess_mc;
    o << "Monte Carlo guess cost (Nm=" << g.mac_bits << ", " << g.trials << " trials, seed "
      << g.seed << ")\n"
      << "  conditional mean " << fixed(g.conditional_mean, 2) << " over " << g.existing_trials
      << " trials with a preimage  " << verdict(*a.guess_check) << "\n"
      << "  censored mean    " << fixed(g.censored_mean, 2) << " (no preimage counts 2^"
      << g.mac_bits << ")\n"
      << "  unique preimage  " << fixed(g.unique_mean, 2) << " over " << g.unique_trials
      << " trials\n";
  }
  return o.str();
}

}  // namespace

std::optional<ReportFormat> parse_format(std::string_view name) noexcept {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "text") return ReportFormat::Text;
  return std::nullopt;
}

std::string render_run(const RunResult& r, ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::Json: return dump(run_json(r));
    case ReportFormat::Csv: return run_csv(r);
    case ReportFormat::Text: return run_text(r);
  }
  return {};
}

std::string render_matrix(const DetectionMatrix& m, std::span<const AttackScenario> scenarios,
                          ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::Json: return dump(matrix_json(m, scenarios));
    case ReportFormat::Csv: return matrix_csv(m);
    case ReportFormat::Text: return matrix_text(m, scenarios);
  }
  return {};
}

std::string render_bench(const BenchSuite& s, ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::Json: return dump(bench_json(s));
    case ReportFormat::Csv: return bench_csv(s);
    case ReportFormat::Text: return bench_text(s);
  }
  return {};
}

std::string render_analysis(const AnalysisReport& a, ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::Json: return dump(analysis_json(a));
    case ReportFormat::Csv: return analysis_csv(a);
    case ReportFormat::Text: return analysis_text(a);
  }
  return {};
}

}  // namespace zipvm
