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

#include "zipvm/bench.hpp"

#include "zipvm/assembler.hpp"
#include "zipvm/error.hpp"
#include "zipvm/programs.hpp"
#include "parallel.hpp"

namespace zipvm {

std::string BenchConfig::label() const {
  std::string s(mode_name(kind));
  if (kind == ProtectionKind::Zipper) s += cache_enabled ? "/cache-on" : "/cache-off";
  return s;
}

std::vector<BenchConfig> bench_configs() {
  return {{ProtectionKind::Baseline, true},
          {ProtectionKind::ShadowParallel, true},
          {ProtectionKind::ShadowCompact, true},
          {ProtectionKind::Zipper, false},
          {ProtectionKind::Zipper, true}};
}

std::vector<std::string> benchmark_names() {
  return {"deep_recursion", "call_dense", "leaf_dense", "setjmp_heavy"};
}

BenchSuite run_bench(const BenchOptions& opts) {
  const auto configs = bench_configs();
  std::vector<ProgramImage> images;
  for (const auto& name : opts.benchmarks) {
    auto src = builtin_program(name);
    if (!src) throw Error("unknown benchmark '" + name + "'");
    images.push_back(assemble(*src));
  }

  BenchSuite suite;
  suite.seed = opts.seed;
  suite.widths = opts.widths;
  suite.entries.resize(images.size() * configs.size());
  detail::parallel_for(suite.entries.size(), [&](std::size_t i) {
    const std::size_t b = i / configs.size();
    auto& e = suite.entries[i];
    e.benchmark = opts.benchmarks[b];
    e.config = configs[i % configs.size()];
    MachineConfig mc;
    mc.mode.kind = e.config.kind;
    mc.cache_enabled = e.config.cache_enabled;
    mc.seed = opts.seed;
    mc.widths = opts.widths;
    Machine m(images[b], mc);
    e.run = m.run(opts.max_cycles);
    if (e.run.status != RunStatus::Halted) {
      throw Error("benchmark '" + e.benchmark + "' under " + e.config.label() + " ended with " +
                  std::string(status_name(e.run.status)));
    }
  });
  for (std::size_t i = 0; i < suite.entries.size(); ++i) {
    auto& e = suite.entries[i];
    const auto& base = suite.entries[i - i % configs.size()].run;
    e.overhead = overhead_report(base, e.run, e.benchmark);
  }
  return suite;
}

}  // namespace zipvm
