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
#include <vector>

#include "labeltree/base_tree.hpp"
#include "labeltree/common.hpp"

namespace labeltree {

/// Node of a temporary per-predicate tree: the base node it mirrors and the
/// slice [begin, end) of the qualified id list that falls under it.
struct TempNode {
  const TreeNode* base = nullptr;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::vector<std::uint32_t> children;

  bool is_leaf() const { return children.empty(); }
  std::uint32_t count() const { return end - begin; }
};

struct TempBuildStats {
  std::uint64_t binary_searches = 0;
  /// There is no code path in construction that evaluates a distance; the
  /// counter exists so callers can assert it.
  std::uint64_t distance_computations = 0;
};

/// Lightweight mirror of the base tree over a sorted list of qualified ids,
/// built purely from id-range binary searches.
class TempIndex {
 public:
  TempIndex() = default;

  /// `qualified` must be strictly ascending. A node becomes a leaf when its
  /// slice holds at most `buffer_capacity` ids or its base node is a leaf;
  /// otherwise the slice is split at every child's id range and the
  /// non-empty parts recurse.
  static TempIndex build(std::vector<VectorId> qualified, const BaseIndex& base,
                         std::size_t buffer_capacity);

  bool empty() const { return nodes_.empty(); }
  const std::vector<VectorId>& ids() const { return ids_; }
  const std::vector<TempNode>& nodes() const { return nodes_; }
  const TempNode& root() const { return nodes_.front(); }
  std::span<const VectorId> slice(const TempNode& node) const {
    return {ids_.data() + node.begin, node.count()};
  }
  const TempBuildStats& stats() const { return stats_; }

 private:
  std::uint32_t build_node(const BaseIndex& base, const TreeNode& node, std::uint32_t begin,
                           std::uint32_t end, std::size_t capacity);

  std::vector<VectorId> ids_;
  std::vector<TempNode> nodes_;
  TempBuildStats stats_;
};

}  // namespace labeltree
