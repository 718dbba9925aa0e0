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
#include <deque>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "labeltree/base_tree.hpp"
#include "labeltree/bloom.hpp"
#include "labeltree/dataset.hpp"
#include "labeltree/predicate.hpp"
#include "labeltree/search.hpp"
#include "labeltree/temp_index.hpp"

namespace labeltree {

struct IndexConfig {
  TreeConfig tree;
  /// Maximum ids per buffer outside base leaves.
  std::uint32_t buffer_capacity = 64;

  FilterMode filter_mode = FilterMode::kBloom;
  double bloom_fp_rate = 0.01;
  /// Items each node filter is sized for; 0 derives it as twice the mean
  /// number of per-label trees passing through a node, taken over nodes
  /// that at least one per-label tree passes through.
  double bloom_expected_labels = 0.0;
  std::uint64_t bloom_seed = 0x5EEDB100Full;

  /// A node is queued for rebuild once updates / size exceeds this ratio.
  double rebuild_threshold = 0.5;
  /// Temporary indexes kept per normalized predicate; 0 disables caching.
  std::size_t temp_cache_capacity = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-label bookkeeping: vector count and the nodes hosting its buffers,
/// keyed by the start of each host's id range.
struct LabelEntry {
  std::size_t count = 0;
  std::map<std::uint64_t, TreeNode*> hosts;
};

class LabelRegistry {
 public:
  const LabelEntry* find(LabelId label) const;
  LabelEntry& entry(LabelId label) { return labels_[label]; }
  void erase(LabelId label) { labels_.erase(label); }
  void clear() { labels_.clear(); }
  const std::map<LabelId, LabelEntry>& labels() const { return labels_; }

  std::size_t count(LabelId label) const;
  /// Throws Error once the virtual range is exhausted.
  LabelId allocate_virtual();
  LabelId next_virtual() const { return next_virtual_; }
  void set_next_virtual(LabelId v) { next_virtual_ = v; }

 private:
  std::map<LabelId, LabelEntry> labels_;
  LabelId next_virtual_ = kFirstVirtualLabel;
};

struct MaintenanceCounters {
  std::uint64_t flushes = 0;
  std::uint64_t merges = 0;
  /// Distances evaluated while flushing or merging buffers; stays 0 because
  /// both work from id ranges alone.
  std::uint64_t flush_merge_distance_computations = 0;
  std::uint64_t filter_recomputations = 0;
  std::uint64_t local_rebuilds = 0;
  std::uint64_t global_rebuilds = 0;
};

enum class RebuildMode { kLocal, kGlobal };

/// Identifies a base node independent of pointer identity.
struct NodeKey {
  std::uint64_t prefix = 0;
  std::uint32_t depth = 0;

  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
};

/// Filtered ANN index: a hierarchical k-means base tree with one per-label
/// tree per label embedded into it through buffers and node filters.
///
/// Thread safety: const member functions take a shared lock and may run
/// concurrently; mutating member functions take an exclusive lock, so readers
/// observe either the state before or after each mutation.
class FilteredIndex {
 public:
  FilteredIndex();
  ~FilteredIndex();
  FilteredIndex(FilteredIndex&&) noexcept;
  FilteredIndex& operator=(FilteredIndex&&) noexcept;

  /// Builds the base tree over `ds`, then every per-label tree from `labels`.
  static FilteredIndex build(const Dataset& ds, const LabelAssignment& labels, const IndexConfig& cfg);
  static FilteredIndex empty(std::size_t dim, const IndexConfig& cfg);

  const IndexConfig& config() const { return cfg_; }
  const BaseIndex& base() const { return base_; }
  const LabelRegistry& registry() const { return registry_; }
  const BloomParams& bloom_params() const { return bloom_params_; }
  const MaintenanceCounters& counters() const { return counters_; }
  std::size_t dim() const { return base_.dim(); }
  std::size_t size() const { return base_.n_live(); }

  // --- per-label structures -------------------------------------------------

  /// Discards every buffer and re-embeds all labels found in the slots with
  /// the batch procedure, then resizes and recomputes all node filters.
  void build_all_labels();
  bool bloom_query(const TreeNode& node, LabelId label) const { return node.filter.contains(label); }
  /// Rebuilds a node filter from its own buffers and its children's filters.
  /// Returns true if the filter changed.
  bool recompute_filter(TreeNode& node);
  /// Recomputes `node`, then its ancestors until one is left unchanged.
  void propagate_filter(TreeNode& node);
  void recompute_all_filters();
  /// Switches between Bloom and exact node filters and recomputes them.
  void set_filter_mode(FilterMode mode);

  // --- search ---------------------------------------------------------------

  SearchResult search_label(std::span<const float> query, LabelId label, const SearchParams& params) const;
  SearchResult search_predicate(std::span<const float> query, const Predicate& predicate,
                                const SearchParams& params) const;
  /// Searches over an externally supplied, strictly ascending list of live ids.
  SearchResult search_ids(std::span<const float> query, std::vector<VectorId> qualified,
                          const SearchParams& params) const;
  SearchResult search_temp(std::span<const float> query, const TempIndex& temp, const SearchParams& params) const;

  /// Initial frontier for a single-label search: the last beam level plus
  /// every candidate the beam dropped, in ascending score order.
  std::vector<const TreeNode*> beam_frontier(std::span<const float> query, LabelId label,
                                             std::size_t beam_width, float alpha) const;

  /// Sorted qualified ids of `predicate`, computed from buffer contents.
  std::vector<VectorId> eval_predicate(const Predicate& predicate) const;
  /// Every id in the buffers of `label`, ascending.
  std::vector<VectorId> label_members(LabelId label) const;
  TempIndex build_temp_index(std::vector<VectorId> qualified) const;

  /// Embeds the predicate's qualified set as a new virtual label and
  /// returns it. Throws if the set is empty.
  LabelId integrate_as_virtual_label(const Predicate& predicate);

  // --- maintenance ----------------------------------------------------------

  VectorId insert_vector(ExternalKey key, std::span<const float> x);
  /// Removes the vector and every label it carries.
  void delete_vector(ExternalKey key);
  void insert_label(ExternalKey key, LabelId label);
  void delete_label(ExternalKey key, LabelId label);

  /// Queues `node` when its update ratio exceeds the threshold. Returns true
  /// if the node is (now) queued.
  bool maybe_enqueue_rebuild(const TreeNode& node);
  const std::deque<NodeKey>& rebuild_queue() const { return rebuild_queue_; }
  /// Local: rebuilds every queued subtree. Global: rebuilds from the root.
  /// Both re-embed affected labels and leave all build-time invariants intact.
  void run_rebuilds(RebuildMode mode, std::uint64_t seed);
  /// Rebuilds the subtree at `key` immediately.
  void rebuild_subtree(NodeKey key, std::uint64_t seed);

  /// Exclusive access for callers that need several reads to be consistent
  /// with each other (invariant checks, snapshots).
  std::shared_lock<std::shared_mutex> read_lock() const { return std::shared_lock(*mutex_); }

  // snapshot support
  static FilteredIndex from_parts(const IndexConfig& cfg, BaseIndex base, const BloomParams& bloom,
                                  LabelId next_virtual);
  BaseIndex& mutable_base() { return base_; }

 private:
  SearchResult search_label_unlocked(std::span<const float> query, LabelId label,
                                     const SearchParams& params) const;
  std::vector<VectorId> eval_unlocked(const Predicate& p, const std::vector<VectorId>* universe) const;
  std::vector<VectorId> label_members_unlocked(LabelId label) const;

  void embed_label(LabelId label, std::vector<VectorId> ids, bool update_filters);
  void clear_label(LabelId label);
  void add_buffer(TreeNode& node, LabelId label, std::vector<VectorId> ids);
  void remove_buffer(TreeNode& node, LabelId label);
  bool in_label_tree(const TreeNode& node, LabelId label) const;
  void flush(TreeNode& node, LabelId label);
  void insert_label_unlocked(VectorId id, LabelId label);
  void delete_label_unlocked(VectorId id, LabelId label);
  void size_filters();
  void rebuild_subtree_unlocked(TreeNode& node, std::uint64_t seed);
  void enqueue_along_path(VectorId id);

  std::shared_ptr<const TempIndex> cached_temp(const std::string& key) const;
  void cache_temp(const std::string& key, std::shared_ptr<const TempIndex> temp) const;

  IndexConfig cfg_;
  BaseIndex base_;
  LabelRegistry registry_;
  BloomParams bloom_params_;
  MaintenanceCounters counters_;
  std::deque<NodeKey> rebuild_queue_;

  std::unique_ptr<std::shared_mutex> mutex_;

  struct TempCache {
    std::mutex mu;
    std::list<std::pair<std::string, std::shared_ptr<const TempIndex>>> lru;
  };
  std::unique_ptr<TempCache> cache_;
};

}  // namespace labeltree
