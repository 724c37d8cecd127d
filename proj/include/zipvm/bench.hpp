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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "zipvm/machine.hpp"
#include "zipvm/timing.hpp"

namespace zipvm {

struct BenchConfig {
  ProtectionKind kind = ProtectionKind::Zipper;
  bool cache_enabled = true;

  /// "baseline", "shadow-parallel", "zipper/cache-off", ...
  [[nodiscard]] std::string label() const;
};

/// baseline, shadow-parallel, shadow-compact, zipper cache-off, zipper cache-on.
[[nodiscard]] std::vector<BenchConfig> bench_configs();

/// deep_recursion, call_dense, leaf_dense, setjmp_heavy.
[[nodiscard]] std::vector<std::string> benchmark_names();

struct BenchOptions {
  std::vector<std::string> benchmarks = benchmark_names();
  std::uint64_t seed = 0;
  MacWidths widths{};
  std::uint64_t max_cycles = 50'000'000;
};

struct BenchEntry {
  std::string benchmark;
  BenchConfig config;
  RunResult run;
  OverheadReport overhead;  // against the baseline run of the same benchmark
};

struct BenchSuite {
  std::uint64_t seed = 0;
  MacWidths widths{};
  std::vector<BenchEntry> entries;  // benchmark-major, configs in bench_configs() order
};

/// Runs every benchmark under every configuration. Throws zipvm::Error when
/// a benchmark is unknown or any run does not halt cleanly.
[[nodiscard]] BenchSuite run_bench(const BenchOptions& opts = {});

}  // namespace zipvm
