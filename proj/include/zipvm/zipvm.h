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

/* C interface to the zipvm library. All handles are opaque. Functions that
 * can fail return a zv_status; zv_last_error() then describes the failure on
 * the calling thread. Strings returned through char** are owned by the
 * caller and released with zv_string_free(). */

#ifndef ZIPVM_ZIPVM_H_
#define ZIPVM_ZIPVM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(ZIPVM_BUILDING)
#define ZV_API __declspec(dllexport)
#else
#define ZV_API __declspec(dllimport)
#endif
#else
#define ZV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum zv_status {
  ZV_OK = 0,
  ZV_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad enum value */
  ZV_ERR_CONFIG = 2,           /* widths, memory size, Monte Carlo limits */
  ZV_ERR_IO = 3,
  ZV_ERR_ASSEMBLY = 4,
  ZV_ERR_SCENARIO = 5,
  ZV_ERR_VM = 6,
  ZV_ERR_INTERNAL = 7
} zv_status;

typedef enum zv_mode {
  ZV_MODE_BASELINE = 0,
  ZV_MODE_SHADOW_PARALLEL = 1,
  ZV_MODE_SHADOW_COMPACT = 2,
  ZV_MODE_ZIPPER = 3
} zv_mode;

typedef enum zv_format { ZV_FORMAT_JSON = 0, ZV_FORMAT_CSV = 1, ZV_FORMAT_TEXT = 2 } zv_format;

typedef enum zv_run_status {
  ZV_RUNNING = 0,
  ZV_HALTED = 1,
  ZV_FAULTED = 2,
  ZV_ERROR = 3,
  ZV_CYCLE_LIMIT = 4
} zv_run_status;

typedef enum zv_fault {
  ZV_FAULT_NONE = -1,
  ZV_FAULT_RETURN_MAC = 0,
  ZV_FAULT_SHADOW = 1,
  ZV_FAULT_JUMP_BUFFER = 2
} zv_fault;

typedef struct zv_image zv_image;
typedef struct zv_machine zv_machine;

typedef struct zv_config {
  zv_mode mode;
  unsigned mac_bits;     /* Nm */
  unsigned address_bits; /* Na */
  int cache_enabled;
  uint64_t seed;
  int trace;
} zv_config;

typedef struct zv_analysis_params {
  unsigned key_bits;     /* Ns */
  unsigned mac_bits;     /* Nm */
  unsigned address_bits; /* Na */
  uint64_t gadgets;      /* N */
  int monte_carlo;
  uint64_t trials;
  uint64_t seed;
} zv_analysis_params;

ZV_API const char* zv_version(void);
ZV_API const char* zv_last_error(void);
ZV_API const char* zv_status_string(zv_status status);
ZV_API void zv_string_free(char* s);

/* Defaults: zipper, Nm=24, Na=40, cache on, seed 0, no trace. */
ZV_API void zv_config_init(zv_config* config);
ZV_API void zv_analysis_params_init(zv_analysis_params* params);
ZV_API zv_status zv_mode_parse(const char* name, zv_mode* out);
ZV_API const char* zv_mode_name(zv_mode mode);
ZV_API zv_status zv_format_parse(const char* name, zv_format* out);

/* Images. zv_image_load_file accepts assembly text or the binary format.
 * An unknown built-in name is reported as ZV_ERR_IO. */
ZV_API zv_status zv_image_assemble(const char* source, size_t len, zv_image** out);
ZV_API zv_status zv_image_load_file(const char* path, zv_image** out);
ZV_API zv_status zv_image_load_builtin(const char* name, zv_image** out);
ZV_API zv_status zv_image_save(const zv_image* image, const char* path);
ZV_API zv_status zv_image_disassemble(const zv_image* image, char** out);
ZV_API uint64_t zv_image_fingerprint(const zv_image* image);
ZV_API void zv_image_free(zv_image* image);

/* Machines. The image is copied; it may be freed after creation. */
ZV_API zv_status zv_machine_create(const zv_image* image, const zv_config* config,
                                   zv_machine** out);
ZV_API void zv_machine_free(zv_machine* machine);
ZV_API zv_status zv_machine_step(zv_machine* machine, zv_run_status* status);
ZV_API zv_status zv_machine_run(zv_machine* machine, uint64_t max_cycles,
                                zv_run_status* status);
ZV_API zv_status zv_machine_report(const zv_machine* machine, zv_format format, char** out);
ZV_API zv_run_status zv_machine_status(const zv_machine* machine);
ZV_API zv_fault zv_machine_fault(const zv_machine* machine);
ZV_API uint64_t zv_machine_pc(const zv_machine* machine);
ZV_API uint64_t zv_machine_cycles(const zv_machine* machine);
ZV_API zv_status zv_machine_reg(const zv_machine* machine, unsigned index, uint64_t* value);
ZV_API zv_status zv_machine_read_u64(const zv_machine* machine, uint64_t addr, uint64_t* value);
ZV_API zv_status zv_machine_write_u64(zv_machine* machine, uint64_t addr, uint64_t value);

/* Attack matrix over the built-in scenario library (scenario_file == NULL)
 * or a scenario file; mode_count == 0 selects every mode. *zipper_clean is
 * set to 1 when Zipper detected every deterministic scenario with no benign
 * false positives. */
ZV_API zv_status zv_attack(const char* scenario_file, const zv_mode* modes, size_t mode_count,
                           uint64_t seed, uint64_t runs, zv_format format, char** out,
                           int* zipper_clean);

/* Benchmark suite under every protection configuration. */
ZV_API zv_status zv_bench(uint64_t seed, unsigned mac_bits, unsigned address_bits,
                          zv_format format, char** out);

/* Security arithmetic, optionally with Monte Carlo checks. */
ZV_API zv_status zv_analyze(const zv_analysis_params* params, zv_format format, char** out);

#ifdef __cplusplus
}
#endif

#endif /* ZIPVM_ZIPVM_H_ */
