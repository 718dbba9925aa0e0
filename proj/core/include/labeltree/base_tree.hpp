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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "labeltree/bloom.hpp"
#include "labeltree/common.hpp"
#include "labeltree/dataset.hpp"
#include "labeltree/vector_id.hpp"

namespace labeltree {

/// One vector position inside a leaf. Deleted slots stay as tombstones until
/// the leaf is rebuilt so that ids held by readers remain stable.
struct Slot {
  ExternalKey key = 0;
  LabelSet labels;
  bool live = true;
};

/// Node of the hierarchical k-means tree. Every node also carries the
/// per-label state embedded into it: buffers for per-label trees that end
/// here and a filter over the per-label trees that pass through it.
struct TreeNode {
  std::uint64_t prefix = 0;
  std::uint32_t depth = 0;
  std::uint32_t branch = 0;  // index within the parent's children
  TreeNode* parent = nullptr;

  std::vector<float> centroid;
  /// Mean Euclidean distance of member vectors to the centroid, exact as of
  /// the last (re)build.
  float mean_radius = 0.0f;
  std::vector<std::unique_ptr<TreeNode>> children;

  /// Live vectors below this node.
  std::size_t size = 0;
  /// Vector inserts and deletes routed through this node since its rebuild.
  std::uint64_t update_count = 0;

  // leaf payload
  std::vector<Slot> slots;
  std::vector<float> slot_vectors;  // slots.size() x dim

  /// Sorted vector ids per label whose per-label tree has a leaf here.
  std::map<LabelId, std::vector<VectorId>> buffers;
  LabelFilter filter;

  bool is_leaf() const { return children.empty(); }
  const std::vector<VectorId>* buffer(LabelId label) const {
    auto it = buffers.find(label);
    return it == buffers.end() ? nullptr : &it->second;
  }
  std::span<const float> slot_vector(std::size_t slot, std::size_t dim) const {
    return {slot_vectors.data() + slot * dim, dim};
  }
};

/// Hierarchical k-means tree over every indexed vector plus the external key
/// map. Ids encode each vector's root-to-leaf path (see IdLayout).
class BaseIndex {
 public:
  BaseIndex() = default;
  BaseIndex(BaseIndex&&) noexcept = default;
  BaseIndex& operator=(BaseIndex&&) noexcept = default;

  /// Recursively splits `ds` with k-means until a node holds at most
  /// leaf_capacity vectors or sits at max_depth. `labels`, when given, is
  /// copied into the slots. Oversized leaves at max_depth are kept and noted
  /// in warnings().
  static BaseIndex build(const Dataset& ds, const TreeConfig& cfg, std::uint64_t seed,
                         const LabelAssignment* labels = nullptr);
  /// Single empty root leaf with a zero centroid.
  static BaseIndex empty(std::size_t dim, const TreeConfig& cfg);

  const TreeConfig& config() const { return cfg_; }
  const IdLayout& layout() const { return layout_; }
  std::size_t dim() const { return dim_; }
  std::size_t n_live() const { return n_live_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  TreeNode& root() { return *root_; }
  const TreeNode& root() const { return *root_; }

  IdRange node_range(const TreeNode& node) const { return layout_.range(node.prefix, node.depth); }

  /// Greedy descent by Euclidean centroid distance, lowest index on ties.
  /// `distance_count`, when given, is incremented per centroid evaluated.
  const TreeNode& nearest_leaf(std::span<const float> x, std::uint64_t* distance_count = nullptr) const;
  TreeNode& nearest_leaf(std::span<const float> x, std::uint64_t* distance_count = nullptr);

  /// Leaf holding `id`, found by following the encoded path from `from`
  /// (which must contain `id`). No distance computations.
  const TreeNode& leaf_of(VectorId id, const TreeNode& from) const;
  TreeNode& leaf_of(VectorId id, TreeNode& from);
  const TreeNode& leaf_of(VectorId id) const { return leaf_of(id, *root_); }
  TreeNode& leaf_of(VectorId id) { return leaf_of(id, *root_); }

  /// Resolves a live id; throws Error if the id is unknown or tombstoned.
  const Slot& slot(VectorId id) const;
  std::span<const float> vector(VectorId id) const;
  std::span<const float> vector(VectorId id, const TreeNode& from) const;

  std::optional<VectorId> find(ExternalKey key) const;
  ExternalKey key_of(VectorId id) const { return slot(id).key; }
  const std::unordered_map<ExternalKey, VectorId>& key_map() const { return key_to_id_; }

  /// Node with exactly this (prefix, depth), or nullptr.
  TreeNode* find_node(std::uint64_t prefix, std::uint32_t depth);

  void for_each_node(const std::function<void(const TreeNode&)>& fn) const;
  void for_each_node(const std::function<void(TreeNode&)>& fn);
  /// Calls fn(id, slot, vector) for every live slot in ascending id order.
  void for_each_live(const std::function<void(VectorId, const Slot&, std::span<const float>)>& fn,
                     const TreeNode* from = nullptr) const;

  /// Appends a vector to the greedy nearest leaf. Updates sizes and update
  /// counters along the path. Throws on duplicate key or slot exhaustion.
  VectorId insert(ExternalKey key, std::span<const float> x);
  /// Tombstones the slot of `key` and returns its former id.
  VectorId erase(ExternalKey key);
  Slot& mutable_slot(VectorId id);

  /// Replaces the subtree at `node` with a freshly built one over its live
  /// vectors, keeping the node's (prefix, depth). Returns old -> new ids of
  /// the moved vectors. Buffers inside the old subtree are discarded.
  std::unordered_map<std::uint64_t, VectorId> rebuild_subtree(TreeNode& node, std::uint64_t seed);

  // Snapshot support.
  static BaseIndex from_parts(const TreeConfig& cfg, std::size_t dim, std::unique_ptr<TreeNode> root);

 private:
  std::unique_ptr<TreeNode> build_node(const Dataset& ds, const LabelAssignment* labels,
                                       std::vector<std::uint32_t> rows, std::uint64_t prefix,
                                       std::uint32_t depth, std::uint32_t branch, std::uint64_t seed);
  void index_keys(TreeNode& node);

  TreeConfig cfg_;
  IdLayout layout_;
  std::size_t dim_ = 0;
  std::unique_ptr<TreeNode> root_;
  std::unordered_map<ExternalKey, VectorId> key_to_id_;
  std::size_t n_live_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace labeltree
