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

#include "zipvm/zipvm.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "zipvm/assembler.hpp"
#include "zipvm/bench.hpp"
#include "zipvm/error.hpp"
#include "zipvm/machine.hpp"
#include "zipvm/programs.hpp"
#include "zipvm/redteam.hpp"
#include "zipvm/reports.hpp"
#include "zipvm/secanalysis.hpp"

struct zv_image {
  zipvm::ProgramImage image;
};

struct zv_machine {
  std::unique_ptr<zipvm::Machine> m;
};

namespace {

thread_local std::string g_last_error;

zv_status fail(zv_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename Fn>
zv_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    return fn();
  } catch (const zipvm::AsmError& e) {
    return fail(ZV_ERR_ASSEMBLY, e.what());
  } catch (const zipvm::ScenarioError& e) {
    return fail(ZV_ERR_SCENARIO, e.what());
  } catch (const zipvm::VmError& e) {
    return fail(ZV_ERR_VM, e.what());
  } catch (const zipvm::Error& e) {
    return fail(ZV_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ZV_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ZV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ZV_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ZV_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::optional<zipvm::ProtectionKind> to_kind(int mode) {
  if (mode < ZV_MODE_BASELINE || mode > ZV_MODE_ZIPPER) return std::nullopt;
  return static_cast<zipvm::ProtectionKind>(mode);
}

std::optional<zipvm::ReportFormat> to_format(int f) {
  switch (f) {
    case ZV_FORMAT_JSON: return zipvm::ReportFormat::Json;
    case ZV_FORMAT_CSV: return zipvm::ReportFormat::Csv;
    case ZV_FORMAT_TEXT: return zipvm::ReportFormat::Text;
    default: return std::nullopt;
  }
}

zv_run_status to_status(zipvm::RunStatus s) { return static_cast<zv_run_status>(s); }

bool read_file(const char* path, std::string& out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  out.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  return true;
}

}  // namespace

extern "C" {

ZV_API const char* zv_version(void) { return "1.0.0"; }

ZV_API const char* zv_last_error(void) { return g_last_error.c_str(); }

ZV_API const char* zv_status_string(zv_status status) {
  switch (status) {
    case ZV_OK: return "ok";
    case ZV_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ZV_ERR_CONFIG: return "configuration error";
    case ZV_ERR_IO: return "i/o error";
    case ZV_ERR_ASSEMBLY: return "assembly error";
    case ZV_ERR_SCENARIO: return "scenario error";
    case ZV_ERR_VM: return "machine error";
    case ZV_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ZV_API void zv_string_free(char* s) { std::free(s); }

ZV_API void zv_config_init(zv_config* config) {
  if (!config) return;
  config->mode = ZV_MODE_ZIPPER;
  config->mac_bits = 24;
  config->address_bits = 40;
  config->cache_enabled = 1;
  config->seed = 0;
  config->trace = 0;
}

ZV_API void zv_analysis_params_init(zv_analysis_params* params) {
  if (!params) return;
  const zipvm::SecurityParams p;
  const zipvm::AnalysisOptions o;
  params->key_bits = p.key_bits;
  params->mac_bits = p.mac_bits;
  params->address_bits = p.address_bits;
  params->gadgets = p.gadgets;
  params->monte_carlo = 0;
  params->trials = o.trials;
  params->seed = o.seed;
}

ZV_API zv_status zv_mode_parse(const char* name, zv_mode* out) {
  if (!name || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  auto k = zipvm::parse_mode(name);
  if (!k) return fail(ZV_ERR_CONFIG, std::string("unknown mode '") + name + "'");
  *out = static_cast<zv_mode>(*k);
  return ZV_OK;
}

ZV_API const char* zv_mode_name(zv_mode mode) {
  auto k = to_kind(mode);
  return k ? zipvm::mode_name(*k).data() : "unknown";
}

ZV_API zv_status zv_format_parse(const char* name, zv_format* out) {
  if (!name || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  auto f = zipvm::parse_format(name);
  if (!f) return fail(ZV_ERR_CONFIG, std::string("unknown format '") + name + "'");
  *out = static_cast<zv_format>(*f);
  return ZV_OK;
}

ZV_API zv_status zv_image_assemble(const char* source, size_t len, zv_image** out) {
  if (!source || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new zv_image{zipvm::assemble(std::string_view(source, len))};
    return ZV_OK;
  });
}

ZV_API zv_status zv_image_load_file(const char* path, zv_image** out) {
  if (!path || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::string bytes;
    if (!read_file(path, bytes)) return fail(ZV_ERR_IO, std::string("cannot open '") + path + "'");
    if (bytes.rfind("ZVIM", 0) == 0) {
      const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
      *out = new zv_image{zipvm::deserialize_image({p, bytes.size()})};
    } else {
      *out = new zv_image{zipvm::assemble(bytes)};
    }
    return ZV_OK;
  });
}

ZV_API zv_status zv_image_load_builtin(const char* name, zv_image** out) {
  if (!name || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto src = zipvm::builtin_program(name);
    if (!src) return fail(ZV_ERR_IO, std::string("no built-in program '") + name + "'");
    *out = new zv_image{zipvm::assemble(*src)};
    return ZV_OK;
  });
}

ZV_API zv_status zv_image_save(const zv_image* image, const char* path) {
  if (!image || !path) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto bytes = zipvm::serialize_image(image->image);
    std::ofstream f(path, std::ios::binary);
    if (!f) return fail(ZV_ERR_IO, std::string("cannot write '") + path + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return f ? ZV_OK : fail(ZV_ERR_IO, std::string("write failed: ") + path);
  });
}

ZV_API zv_status zv_image_disassemble(const zv_image* image, char** out) {
  if (!image || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(zipvm::disassemble(image->image));
    return ZV_OK;
  });
}

ZV_API uint64_t zv_image_fingerprint(const zv_image* image) {
  return image ? image->image.fingerprint() : 0;
}

ZV_API void zv_image_free(zv_image* image) { delete image; }

ZV_API zv_status zv_machine_create(const zv_image* image, const zv_config* config,
                                   zv_machine** out) {
  if (!image || !config || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  auto kind = to_kind(config->mode);
  if (!kind) return fail(ZV_ERR_INVALID_ARGUMENT, "invalid mode");
  return guarded([&] {
    zipvm::MachineConfig mc;
    mc.mode.kind = *kind;
    mc.widths = zipvm::MacWidths{config->address_bits, config->mac_bits};
    mc.cache_enabled = config->cache_enabled != 0;
    mc.seed = config->seed;
    mc.trace = config->trace != 0;
    *out = new zv_machine{std::make_unique<zipvm::Machine>(image->image, mc)};
    return ZV_OK;
  });
}

ZV_API void zv_machine_free(zv_machine* machine) { delete machine; }

ZV_API zv_status zv_machine_step(zv_machine* machine, zv_run_status* status) {
  if (!machine) return fail(ZV_ERR_INVALID_ARGUMENT, "null machine");
  return guarded([&] {
    const auto s = machine->m->step();
    if (status) *status = to_status(s);
    return ZV_OK;
  });
}

ZV_API zv_status zv_machine_run(zv_machine* machine, uint64_t max_cycles,
                                zv_run_status* status) {
  if (!machine) return fail(ZV_ERR_INVALID_ARGUMENT, "null machine");
  return guarded([&] {
    const auto r = machine->m->run(max_cycles);
    if (status) *status = to_status(r.status);
    return ZV_OK;
  });
}

ZV_API zv_status zv_machine_report(const zv_machine* machine, zv_format format, char** out) {
  if (!machine || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  auto f = to_format(format);
  if (!f) return fail(ZV_ERR_INVALID_ARGUMENT, "invalid format");
  return guarded([&] {
    *out = dup_string(zipvm::render_run(machine->m->result(), *f));
    return ZV_OK;
  });
}

ZV_API zv_run_status zv_machine_status(const zv_machine* machine) {
  return machine ? to_status(machine->m->status()) : ZV_ERROR;
}

ZV_API zv_fault zv_machine_fault(const zv_machine* machine) {
  if (!machine || !machine->m->fault()) return ZV_FAULT_NONE;
  return static_cast<zv_fault>(machine->m->fault()->kind);
}

ZV_API uint64_t zv_machine_pc(const zv_machine* machine) { return machine ? machine->m->pc() : 0; }

ZV_API uint64_t zv_machine_cycles(const zv_machine* machine) {
  return machine ? machine->m->timing().cycle : 0;
}

ZV_API zv_status zv_machine_reg(const zv_machine* machine, unsigned index, uint64_t* value) {
  if (!machine || !value) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  if (index >= zipvm::kNumRegisters) return fail(ZV_ERR_INVALID_ARGUMENT, "register out of range");
  *value = machine->m->reg(index);
  return ZV_OK;
}

ZV_API zv_status zv_machine_read_u64(const zv_machine* machine, uint64_t addr, uint64_t* value) {
  if (!machine || !value) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *value = machine->m->read_u64(addr);
    return ZV_OK;
  });
}

ZV_API zv_status zv_machine_write_u64(zv_machine* machine, uint64_t addr, uint64_t value) {
  if (!machine) return fail(ZV_ERR_INVALID_ARGUMENT, "null machine");
  return guarded([&] {
    machine->m->write_u64(addr, value);
    return ZV_OK;
  });
}

ZV_API zv_status zv_attack(const char* scenario_file, const zv_mode* modes, size_t mode_count,
                           uint64_t seed, uint64_t runs, zv_format format, char** out,
                           int* zipper_clean) {
  if (!out || (mode_count > 0 && !modes)) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  auto f = to_format(format);
  if (!f) return fail(ZV_ERR_INVALID_ARGUMENT, "invalid format");
  std::vector<zipvm::ProtectionKind> kinds;
  for (size_t i = 0; i < mode_count; ++i) {
    auto k = to_kind(modes[i]);
    if (!k) return fail(ZV_ERR_INVALID_ARGUMENT, "invalid mode");
    kinds.push_back(*k);
  }
  if (kinds.empty()) {
    const auto all = zipvm::all_modes();
    kinds.assign(all.begin(), all.end());
  }
  return guarded([&] {
    std::vector<zipvm::AttackScenario> scs;
    if (scenario_file) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(scenario_file, ec)) {
        return fail(ZV_ERR_IO, std::string("cannot open scenario file '") + scenario_file + "'");
      }
      scs = zipvm::load_scenario_file(scenario_file);
    } else {
      scs = zipvm::scenario_library();
    }
    const auto mx = zipvm::run_matrix(scs, kinds, seed, runs == 0 ? 1 : runs);
    *out = dup_string(zipvm::render_matrix(mx, scs, *f));
    if (zipper_clean) *zipper_clean = mx.zipper_clean(scs) ? 1 : 0;
    return ZV_OK;
  });
}

ZV_API zv_status zv_bench(uint64_t seed, unsigned mac_bits, unsigned address_bits,
                          zv_format format, char** out) {
  if (!out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  auto f = to_format(format);
  if (!f) return fail(ZV_ERR_INVALID_ARGUMENT, "invalid format");
  return guarded([&] {
    zipvm::BenchOptions opts;
    opts.seed = seed;
    opts.widths = zipvm::MacWidths{address_bits, mac_bits};
    *out = dup_string(zipvm::render_bench(zipvm::run_bench(opts), *f));
    return ZV_OK;
  });
}

ZV_API zv_status zv_analyze(const zv_analysis_params* params, zv_format format, char** out) {
  if (!params || !out) return fail(ZV_ERR_INVALID_ARGUMENT, "null argument");
  auto f = to_format(format);
  if (!f) return fail(ZV_ERR_INVALID_ARGUMENT, "invalid format");
  return guarded([&] {
    zipvm::SecurityParams p;
    p.key_bits = params->key_bits;
    p.mac_bits = params->mac_bits;
    p.address_bits = params->address_bits;
    p.gadgets = params->gadgets;
    zipvm::AnalysisOptions o;
    o.monte_carlo = params->monte_carlo != 0;
    o.trials = params->trials;
    o.seed = params->seed;
    *out = dup_string(zipvm::render_analysis(zipvm::analyze(p, o), *f));
    return ZV_OK;
  });
}

}  // extern "C"
