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

#include <algorithm>
#include <sstream>
#include <string>

#include "json.hpp"

#include "doctest.h"
#include "support.hpp"
#include "zipvm/bench.hpp"
#include "zipvm/reports.hpp"

using namespace zipvm;
using nlohmann::json;

namespace {

const BenchSuite& suite() {
  static const BenchSuite s = run_bench({});
  return s;
}

const BenchEntry& entry(const std::string& bench, const std::string& label) {
  const auto& e = suite().entries;
  auto it = std::find_if(e.begin(), e.end(), [&](const BenchEntry& x) {
    return x.benchmark == bench && x.config.label() == label;
  });
  REQUIRE(it != e.end());
  return *it;
}

}  // namespace

TEST_CASE("bench configuration labels") {
  std::vector<std::string> labels;
  for (const auto& c : bench_configs()) labels.push_back(c.label());
  CHECK(labels == std::vector<std::string>{"baseline", "shadow-parallel", "shadow-compact",
                                           "zipper/cache-off", "zipper/cache-on"});
  CHECK(benchmark_names().size() == 4);
}

TEST_CASE("bench suite covers every benchmark and configuration") {
  const auto& s = suite();
  CHECK(s.entries.size() == benchmark_names().size() * bench_configs().size());
  for (const auto& e : s.entries) {
    CAPTURE(e.benchmark);
    CAPTURE(e.config.label());
    CHECK(e.run.status == RunStatus::Halted);
    const auto& base = entry(e.benchmark, "baseline");
    CHECK(e.overhead.base_cycles == base.run.cycles);
    CHECK(e.run.exit_value == base.run.exit_value);
    CHECK(e.overhead.slowdown >= 0.0);
  }
  CHECK(entry("leaf_dense", "zipper/cache-on").overhead.slowdown == 0.0);
  // call_dense: 200 calls to an instrumented function, every MAC gap >= 20.
  for (const char* label : {"zipper/cache-on", "zipper/cache-off"}) {
    const auto& z = entry("call_dense", label);
    CHECK(z.run.stall_cycles == 0);
    CHECK(z.overhead.cycles - z.overhead.base_cycles == 2 * 200);
    CHECK(z.overhead.slowdown ==
          doctest::Approx(2.0 * 200 / static_cast<double>(z.overhead.base_cycles)).epsilon(1e-12));
  }
  const auto& on = entry("deep_recursion", "zipper/cache-on");
  const auto& off = entry("deep_recursion", "zipper/cache-off");
  CHECK(on.overhead.slowdown <= off.overhead.slowdown);
  CHECK(on.run.cache_hits > 0);
}

TEST_CASE("bench rejects unknown benchmarks and runaway programs") {
  BenchOptions o;
  o.benchmarks = {"nope"};
  CHECK_THROWS_AS((void)run_bench(o), Error);
  o.benchmarks = {"deep_recursion"};
  o.max_cycles = 100;
  CHECK_THROWS_AS((void)run_bench(o), Error);
}

TEST_CASE("format names") {
  CHECK(parse_format("json") == ReportFormat::Json);
  CHECK(parse_format("csv") == ReportFormat::Csv);
  CHECK(parse_format("text") == ReportFormat::Text);
  CHECK_FALSE(parse_format("xml"));
}

TEST_CASE("bench csv has the fixed header and one row per entry") {
  const auto csv = render_bench(suite(), ReportFormat::Csv);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kBenchCsvHeader);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(rows == suite().entries.size());
}

TEST_CASE("bench json round-trips the numbers") {
  const auto j = json::parse(render_bench(suite(), ReportFormat::Json));
  CHECK(j["kind"] == "bench");
  REQUIRE(j["entries"].size() == suite().entries.size());
  const auto& e0 = suite().entries[0];
  CHECK(j["entries"][0]["cycles"] == e0.run.cycles);
  CHECK(j["entries"][0]["benchmark"] == e0.benchmark);
  const auto text = render_bench(suite(), ReportFormat::Text);
  CHECK(text.find("deep_recursion") != std::string::npos);
}

TEST_CASE("run reports") {
  auto cfg = testing::config(ProtectionKind::Zipper, 4);
  cfg.trace = true;
  const auto r = testing::run(testing::sample("fact"), cfg);
  const auto j = json::parse(render_run(r, ReportFormat::Json));
  CHECK(j["kind"] == "run");
  CHECK(j["status"] == "halted");
  CHECK(j["exit_value"] == 3628800);
  CHECK(j["fault"].is_null());
  CHECK(j["cycles"] == r.cycles);
  CHECK(j["trace"].size() == r.instructions);
  CHECK(j["mode"] == "zipper");
  CHECK(j["seed"] == 4);
  const auto csv = render_run(r, ReportFormat::Csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(render_run(r, ReportFormat::Text).find("3628800") != std::string::npos);
}

TEST_CASE("faulting run reports carry the fault") {
  auto img = testing::sample("vuln_suite");
  Machine m(img, testing::config(ProtectionKind::Zipper, 1));
  while (m.pc() != img.symbol("vuln_ret")) m.step();
  m.write_u64(m.reg(kRegSp) + 8, img.symbol("win"));
  const auto r = m.run(1000);
  const auto j = json::parse(render_run(r, ReportFormat::Json));
  CHECK(j["status"] == "faulted");
  CHECK(j["fault"]["kind"] == "ReturnMacMismatch");
  CHECK(j["fault"]["pc"] == r.fault->pc);
}

TEST_CASE("matrix reports") {
  const auto lib = scenario_library();
  const std::vector<ProtectionKind> modes{ProtectionKind::ShadowParallel,
                                          ProtectionKind::ShadowCompact, ProtectionKind::Zipper};
  const auto m = run_matrix(lib, modes, 0, 2);
  const auto j = json::parse(render_matrix(m, lib, ReportFormat::Json));
  CHECK(j["kind"] == "attack");
  CHECK(j["reports"].size() == m.reports.size());
  CHECK(j["zipper_clean"] == true);
  CHECK(j["tallies"].size() == 3);
  const auto text = render_matrix(m, lib, ReportFormat::Text);
  CHECK(text.find("shadow (both)") != std::string::npos);
  CHECK(text.find("brute_force_top*") != std::string::npos);
  const auto csv = render_matrix(m, lib, ReportFormat::Csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == m.reports.size() + 1);
}

TEST_CASE("analysis reports keep the big integer exact") {
  const auto a = analyze({64, 24, 40, 5}, {});
  const auto j = json::parse(render_analysis(a, ReportFormat::Json));
  CHECK(j["kind"] == "analyze");
  CHECK(j["expected_guesses"] == "9223372036896718848");
  CHECK(j["montecarlo_collision"].is_null());
  CHECK(j["prob_no_valid_collision"].get<double>() == doctest::Approx(0.8990756));
  CHECK(render_analysis(a, ReportFormat::Text).find("9223372036896718848") != std::string::npos);
  CHECK_FALSE(render_analysis(a, ReportFormat::Csv).empty());
}
