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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "labeltree/index.hpp"

namespace labeltree::cli {

struct TreeSection {
  std::uint32_t branch_factor = 16;
  std::uint32_t leaf_capacity = 64;
  std::uint32_t max_depth = 0;
  std::uint32_t slot_bits = 8;
  std::uint32_t kmeans_iters = 25;
};

struct LabelSection {
  std::uint32_t buffer_capacity = 64;
  std::string filter_mode = "bloom";
  double bloom_fp_rate = 0.01;
  double bloom_expected_labels = 0.0;
  std::uint64_t bloom_seed = 0x5EEDB100Full;
};

struct SearchSection {
  std::size_t k = 10;
  /// Values are integers or "inf".
  std::vector<std::string> ef{"64"};
  std::size_t beam_width = 4;
  float alpha = 1.0f;
  std::size_t temp_cache = 0;
};

struct MaintenanceSection {
  double rebuild_threshold = 0.5;
  std::string rebuild_mode = "local";
};

struct WorkloadSection {
  std::size_t n = 20000;
  std::size_t dim = 16;
  std::size_t levels = 20;
  double lo = 0.001;
  double hi = 0.2;
  std::size_t labels_per_level = 1;
  bool correlated = false;
  std::size_t queries = 100;
  std::size_t ops = 10000;
  std::size_t readers = 0;
  /// Relative weights of insert_vector, delete_vector, insert_label, delete_label.
  std::vector<double> update_mix{1.0, 1.0, 1.0, 1.0};
};

struct IoSection {
  std::string data;
  std::string labels;
  std::string queries;
  std::string format = "fvecs";
  std::size_t raw_dim = 0;
  std::string index;
  std::string gt;
  std::string out;
  std::string out_dir;
  /// Where update-bench saves the updated index; empty skips saving.
  std::string index_out;
  std::string predicate;
  std::string predicates;
  std::int64_t label = -1;
};

/// Every knob a command can read. Resolved as defaults, then the config
/// file, then command-line flags.
struct RunConfig {
  TreeSection tree;
  LabelSection labels;
  SearchSection search;
  MaintenanceSection maintenance;
  WorkloadSection workload;
  IoSection io;
  std::uint64_t seed = 0;

  IndexConfig index_config() const;
  SearchParams search_params(const std::string& ef) const;
  nlohmann::json to_json() const;
};

/// Reads a .toml or .json file into `cfg`; keys absent from the file keep
/// their current values. Throws Error on unknown keys or bad types.
void load_config_file(const std::filesystem::path& path, RunConfig& cfg);

std::size_t parse_ef(const std::string& text);

std::string version_string();

}  // namespace labeltree::cli
