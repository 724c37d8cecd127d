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

// zipvm command-line driver. Links only the C interface.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zipvm/zipvm.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CString {
  char* p = nullptr;
  ~CString() { zv_string_free(p); }
};

struct ImageHandle {
  zv_image* p = nullptr;
  ~ImageHandle() { zv_image_free(p); }
};

struct MachineHandle {
  zv_machine* p = nullptr;
  ~MachineHandle() { zv_machine_free(p); }
};

struct Common {
  std::string format = "text";
  std::string output;
  std::uint64_t seed = 0;
};

const std::map<std::string, zv_format> kFormats{
    {"json", ZV_FORMAT_JSON}, {"csv", ZV_FORMAT_CSV}, {"text", ZV_FORMAT_TEXT}};
const std::map<std::string, zv_mode> kModes{{"baseline", ZV_MODE_BASELINE},
                                            {"shadow-parallel", ZV_MODE_SHADOW_PARALLEL},
                                            {"shadow-compact", ZV_MODE_SHADOW_COMPACT},
                                            {"zipper", ZV_MODE_ZIPPER}};

int report_error(const char* what, zv_status s) {
  std::fprintf(stderr, "zipvm: %s: %s: %s\n", what, zv_status_string(s), zv_last_error());
  return s == ZV_ERR_VM ? kExitFailure : kExitUsage;
}

std::string extension(const std::string& format) { return format == "text" ? "txt" : format; }

// Writes to --output, or to $ZIPVM_OUT_DIR/<command>.<ext> when only the
// environment variable is set, or to stdout.
int emit(const std::string& text, const Common& c, const std::string& command) {
  fs::path target = c.output;
  const char* dir = std::getenv("ZIPVM_OUT_DIR");
  if (dir && *dir) {
    if (target.empty()) target = fs::path(dir) / (command + "." + extension(c.format));
    else if (target.is_relative()) target = fs::path(dir) / target;
  }
  if (target.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return kExitOk;
  }
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  std::ofstream f(target, std::ios::binary);
  f << text;
  if (!f) {
    std::fprintf(stderr, "zipvm: cannot write '%s'\n", target.string().c_str());
    return kExitUsage;
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  cmd->add_option("--output,-o", c.output, "Output file (default: stdout or $ZIPVM_OUT_DIR)");
  cmd->add_option("--seed", c.seed, "Seed for keys, initial Top and layout randomization")
      ->capture_default_str();
}

zv_status load_image(const std::string& spec, ImageHandle& img) {
  constexpr std::string_view kBuiltin = "builtin:";
  if (spec.rfind(kBuiltin, 0) == 0) {
    return zv_image_load_builtin(spec.substr(kBuiltin.size()).c_str(), &img.p);
  }
  return zv_image_load_file(spec.c_str(), &img.p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zipvm: toy-ISA machine with chained return-address MACs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", zv_version());

  // run
  Common run_c;
  std::string image_spec;
  std::string mode = "zipper";
  unsigned nm = 24, na = 40, ns = 64;
  std::string cache = "on";
  bool trace = false;
  std::uint64_t max_cycles = 100'000'000;
  auto* run = app.add_subcommand("run", "Execute a program and report the outcome");
  run->add_option("image", image_spec, "Assembly file, binary image, or builtin:NAME")->required();
  run->add_option("--mode", mode, "Protection mode")
      ->check(CLI::IsMember({"baseline", "shadow-parallel", "shadow-compact", "zipper"}))
      ->capture_default_str();
  run->add_option("--Nm", nm, "MAC bits")->capture_default_str();
  run->add_option("--Na", na, "Address bits")->capture_default_str();
  run->add_option("--Ns", ns, "Key bits (the key register is 64 bits wide)")
      ->check(CLI::IsMember({64u}))
      ->capture_default_str();
  run->add_option("--cache", cache, "MAC result cache")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  run->add_flag("--trace", trace, "Include a per-instruction trace");
  run->add_option("--max-cycles", max_cycles, "Cycle budget")->capture_default_str();
  add_common(run, run_c);

  // attack
  Common atk_c;
  std::vector<std::string> modes{"all"};
  std::string scenario_file;
  std::uint64_t runs = 1;
  auto* attack = app.add_subcommand("attack", "Run attack scenarios against each defense");
  attack->add_option("--scenarios", scenario_file, "Scenario file (default: built-in library)");
  attack
      ->add_option("--modes", modes,
                   "Defenses: baseline, shadow-parallel, shadow-compact, zipper, shadow, all")
      ->delimiter(',')
      ->check(CLI::IsMember(
          {"baseline", "shadow-parallel", "shadow-compact", "zipper", "shadow", "all"}))
      ->capture_default_str();
  attack->add_option("--runs", runs, "Seeds per cell (seed, seed+1, ...)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(attack, atk_c);

  // bench
  Common bench_c;
  unsigned bench_nm = 24, bench_na = 40;
  auto* bench = app.add_subcommand("bench", "Cycle overhead of each defense on synthetic workloads");
  bench->add_option("--Nm", bench_nm, "MAC bits")->capture_default_str();
  bench->add_option("--Na", bench_na, "Address bits")->capture_default_str();
  add_common(bench, bench_c);

  // analyze
  Common an_c;
  zv_analysis_params params;
  zv_analysis_params_init(&params);
  auto* analyze = app.add_subcommand("analyze", "Brute-force and collision arithmetic");
  analyze->add_option("--Ns", params.key_bits, "Key bits")->capture_default_str();
  analyze->add_option("--Nm", params.mac_bits, "MAC bits")->capture_default_str();
  analyze->add_option("--Na", params.address_bits, "Address bits")->capture_default_str();
  analyze->add_option("--N", params.gadgets, "Gadgets in the attack")->capture_default_str();
  bool mc = false;
  analyze->add_flag("--mc", mc, "Run the Monte Carlo estimators (Nm <= 16)");
  analyze->add_option("--trials", params.trials, "Monte Carlo trials")->capture_default_str();
  add_common(analyze, an_c);

  // assemble / disassemble
  std::string asm_in, asm_out;
  auto* assemble = app.add_subcommand("assemble", "Assemble to a binary image");
  assemble->add_option("source", asm_in, "Assembly file")->required();
  assemble->add_option("--output,-o", asm_out, "Binary image path")->required();
  std::string dis_in;
  Common dis_c;
  auto* disassemble = app.add_subcommand("disassemble", "Print an image as assembly");
  disassemble->add_option("image", dis_in, "Assembly file, binary image, or builtin:NAME")
      ->required();
  disassemble->add_option("--output,-o", dis_c.output, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "zipvm: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (*run) {
    ImageHandle img;
    if (auto s = load_image(image_spec, img); s != ZV_OK) return report_error("load", s);
    zv_config cfg;
    zv_config_init(&cfg);
    cfg.mode = kModes.at(mode);
    cfg.mac_bits = nm;
    cfg.address_bits = na;
    cfg.cache_enabled = cache == "on";
    cfg.seed = run_c.seed;
    cfg.trace = trace;
    MachineHandle m;
    if (auto s = zv_machine_create(img.p, &cfg, &m.p); s != ZV_OK) {
      return report_error("configure", s);
    }
    zv_run_status status = ZV_RUNNING;
    if (auto s = zv_machine_run(m.p, max_cycles, &status); s != ZV_OK) {
      return report_error("run", s);
    }
    CString out;
    if (auto s = zv_machine_report(m.p, kFormats.at(run_c.format), &out.p); s != ZV_OK) {
      return report_error("report", s);
    }
    if (int rc = emit(out.p, run_c, "run"); rc != kExitOk) return rc;
    return status == ZV_HALTED ? kExitOk : kExitFailure;
  }

  if (*attack) {
    std::vector<zv_mode> selected;
    auto add = [&](zv_mode m) {
      for (auto x : selected) {
        if (x == m) return;
      }
      selected.push_back(m);
    };
    for (const auto& name : modes) {
      if (name == "all") {
        for (const auto& [n, m] : kModes) add(m);
      } else if (name == "shadow") {
        add(ZV_MODE_SHADOW_PARALLEL);
        add(ZV_MODE_SHADOW_COMPACT);
      } else {
        add(kModes.at(name));
      }
    }
    std::sort(selected.begin(), selected.end());
    CString out;
    int clean = 0;
    const auto s = zv_attack(scenario_file.empty() ? nullptr : scenario_file.c_str(),
                             selected.data(), selected.size(), atk_c.seed, runs,
                             kFormats.at(atk_c.format), &out.p, &clean);
    if (s != ZV_OK) return report_error("attack", s);
    if (int rc = emit(out.p, atk_c, "attack"); rc != kExitOk) return rc;
    return clean ? kExitOk : kExitFailure;
  }

  if (*bench) {
    CString out;
    const auto s = zv_bench(bench_c.seed, bench_nm, bench_na, kFormats.at(bench_c.format), &out.p);
    if (s != ZV_OK) return report_error("bench", s);
    return emit(out.p, bench_c, "bench");
  }

  if (*analyze) {
    params.monte_carlo = mc ? 1 : 0;
    params.seed = an_c.seed;
    CString out;
    const auto s = zv_analyze(&params, kFormats.at(an_c.format), &out.p);
    if (s != ZV_OK) return report_error("analyze", s);
    return emit(out.p, an_c, "analyze");
  }

  if (*assemble) {
    ImageHandle img;
    if (auto s = zv_image_load_file(asm_in.c_str(), &img.p); s != ZV_OK) {
      return report_error("assemble", s);
    }
    if (auto s = zv_image_save(img.p, asm_out.c_str()); s != ZV_OK) return report_error("save", s);
    return kExitOk;
  }

  if (*disassemble) {
    ImageHandle img;
    if (auto s = load_image(dis_in, img); s != ZV_OK) return report_error("load", s);
    CString out;
    if (auto s = zv_image_disassemble(img.p, &out.p); s != ZV_OK) {
      return report_error("disassemble", s);
    }
    dis_c.format = "text";
    return emit(out.p, dis_c, "disassemble");
  }
  return kExitUsage;
}
