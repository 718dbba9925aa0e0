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

#include <cstddef>
#include <string>
#include <vector>

#include "labeltree/index.hpp"

namespace labeltree {

struct InvariantOptions {
  /// Base leaves hold at most leaf_capacity live vectors unless they sit at
  /// max_depth. Holds right after build or rebuild only.
  bool leaf_capacity = false;
  /// mean_radius matches a recomputation from the live members. Build-time only.
  bool exact_radius = false;
  /// Every node filter equals a fresh recomputation from its own buffers and
  /// its children's filters.
  bool fresh_filters = true;
};

struct InvariantReport {
  std::vector<std::string> violations;
  std::size_t nodes_checked = 0;
  std::size_t buffers_checked = 0;

  bool ok() const { return violations.empty(); }
  /// First few violations, one per line.
  std::string summary(std::size_t max_lines = 10) const;
};

/// Full structural sweep: tree shape and sizes, id contiguity, key map
/// bijection, buffer order and ranges, per-label partition and canonical
/// placement, capacity bounds, registry consistency and filter soundness.
InvariantReport check_invariants(const FilteredIndex& index, const InvariantOptions& opts = {});

/// Sorted global id order lists every subtree as one contiguous run, and
/// every stored id lies in its leaf's range.
InvariantReport check_contiguity(const BaseIndex& base);

}  // namespace labeltree
