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

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "zipvm/bench.hpp"
#include "zipvm/machine.hpp"
#include "zipvm/redteam.hpp"
#include "zipvm/secanalysis.hpp"

namespace zipvm {

enum class ReportFormat : std::uint8_t { Json, Csv, Text };
[[nodiscard]] std::optional<ReportFormat> parse_format(std::string_view name) noexcept;

// JSON output follows the schemas under schemas/. CSV column order is fixed.
[[nodiscard]] std::string render_run(const RunResult& r, ReportFormat fmt);
/// `scenarios` supplies the probabilistic flags; pass the list the matrix ran.
[[nodiscard]] std::string render_matrix(const DetectionMatrix& m,
                                        std::span<const AttackScenario> scenarios,
                                        ReportFormat fmt);
[[nodiscard]] std::string render_bench(const BenchSuite& s, ReportFormat fmt);
[[nodiscard]] std::string render_analysis(const AnalysisReport& a, ReportFormat fmt);

/// Header row of the benchmark CSV.
inline constexpr std::string_view kBenchCsvHeader =
    "benchmark,mode,cycles,slowdown,stalls,mac_ops,cache_hits";

}  // namespace zipvm
