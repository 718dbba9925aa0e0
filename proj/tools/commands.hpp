// Copyright 2026 The labeltree Authors
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

#include "run_config.hpp"

namespace labeltree::cli {

// Each command returns 0 on success and throws on failure.
int cmd_gen(const RunConfig& cfg);
int cmd_build(const RunConfig& cfg);
int cmd_gt(const RunConfig& cfg);
int cmd_query(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_update_bench(const RunConfig& cfg);
int cmd_integrate(const RunConfig& cfg);
int cmd_rebuild(const RunConfig& cfg);

}  // namespace labeltree::cli
