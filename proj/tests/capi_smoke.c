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

/* Plain C client: the public header must compile as C. */

#include <stdio.h>
#include <string.h>

#include "zipvm/zipvm.h"

int main(void) {
  const char* src = "main:\n li r3, 42\n print r3\n halt\n";
  zv_image* img = NULL;
  zv_machine* m = NULL;
  zv_config cfg;
  zv_run_status st;
  uint64_t r3 = 0;
  if (zv_image_assemble(src, strlen(src), &img) != ZV_OK) return 1;
  zv_config_init(&cfg);
  cfg.mode = ZV_MODE_SHADOW_PARALLEL;
  if (zv_machine_create(img, &cfg, &m) != ZV_OK) return 1;
  zv_image_free(img);
  if (zv_machine_run(m, 1000, &st) != ZV_OK || st != ZV_HALTED) return 1;
  zv_machine_reg(m, 3, &r3);
  zv_machine_free(m);
  if (r3 != 42) return 1;
  printf("ok %s\n", zv_version());
  return 0;
}
