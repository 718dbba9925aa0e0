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
#include <limits>
#include <span>
#include <vector>

#include "labeltree/common.hpp"

namespace labeltree {

struct TreeNode;

struct SearchParams {
  std::size_t k = 10;
  /// Result-set working size; kUnboundedEf visits the whole per-label tree.
  std::size_t ef = 64;
  std::size_t beam_width = 4;
  /// Weight of the cluster radius in the node score.
  float alpha = 1.0f;

  static constexpr std::size_t kUnboundedEf = std::numeric_limits<std::size_t>::max();

  void validate() const;
};

struct SearchStats {
  std::uint64_t centroid_distances = 0;
  std::uint64_t vector_distances = 0;
  std::uint64_t buffers_visited = 0;
  std::uint64_t nodes_popped = 0;

  SearchStats& operator+=(const SearchStats& o) {
    centroid_distances += o.centroid_distances;
    vector_distances += o.vector_distances;
    buffers_visited += o.buffers_visited;
    nodes_popped += o.nodes_popped;
    return *this;
  }
};

struct Hit {
  ExternalKey key = 0;
  /// Euclidean distance to the query.
  float distance = 0.0f;

  friend bool operator==(const Hit&, const Hit&) = default;
};

struct SearchResult {
  std::vector<Hit> hits;  // ascending distance, ties by key
  SearchStats stats;
};

/// Node score: centroid distance minus alpha times the mean cluster radius,
/// an estimate of the closest the query can get to any member.
float node_score(const TreeNode& node, std::span<const float> query, float alpha);

/// Ground truth for one query: the exact top-k plus every vector tied with
/// the k-th distance.
struct GroundTruthEntry {
  std::vector<Hit> hits;
  std::size_t qualified = 0;
};

/// |R ∩ R*| / k over the first k hits of `result`. When the truth holds
/// fewer than k vectors the denominator shrinks to the truth size.
double recall_at_k(std::span<const Hit> result, const GroundTruthEntry& truth, std::size_t k);

}  // namespace labeltree
