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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "labeltree/dataset.hpp"
#include "labeltree/predicate.hpp"
#include "labeltree/search.hpp"

namespace labeltree {

/// Brute-force filtered k-NN: evaluates `predicate` on every raw label set,
/// scans all qualifiers, and returns the k closest in (distance, key) order
/// plus every further qualifier tied with the k-th distance.
/// `distance_count`, when given, is incremented once per qualifier scanned.
GroundTruthEntry exact_filtered_knn(const Dataset& ds, const LabelAssignment& labels,
                                    std::span<const float> query, const Predicate& predicate,
                                    std::size_t k, std::uint64_t* distance_count = nullptr);

/// Same contract as exact_filtered_knn, computed by sorting every qualifier.
/// Kept as an independent cross-check.
GroundTruthEntry exact_filtered_knn_sorted(const Dataset& ds, const LabelAssignment& labels,
                                           std::span<const float> query, const Predicate& predicate,
                                           std::size_t k);

/// Per query: u32 count, then (u64 key, f32 distance) pairs; little-endian.
void save_ground_truth(const std::string& path, const std::vector<GroundTruthEntry>& truth);
std::vector<GroundTruthEntry> load_ground_truth(const std::string& path);

}  // namespace labeltree
