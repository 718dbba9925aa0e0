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

#include <algorithm>
#include <set>

#include "labeltree/index.hpp"
#include "labeltree/rng.hpp"

namespace labeltree {

VectorId FilteredIndex::insert_vector(ExternalKey key, std::span<const float> x) {
  std::unique_lock lock(*mutex_);
  const VectorId id = base_.insert(key, x);
  enqueue_along_path(id);
  cache_->lru.clear();
  return id;
}

void FilteredIndex::delete_vector(ExternalKey key) {
  std::unique_lock lock(*mutex_);
  auto id = base_.find(key);
  if (!id) throw Error("external key " + std::to_string(key) + " not present");
  const LabelSet labels = base_.slot(*id).labels;
  for (LabelId l : labels) delete_label_unlocked(*id, l);
  base_.erase(key);
  enqueue_along_path(*id);
  cache_->lru.clear();
}

bool FilteredIndex::maybe_enqueue_rebuild(const TreeNode& node) {
  const bool over = node.size == 0
                        ? node.update_count > 0
                        : static_cast<double>(node.update_count) / static_cast<double>(node.size) >
                              cfg_.rebuild_threshold;
  if (!over) return false;
  const NodeKey key{node.prefix, node.depth};
  if (std::find(rebuild_queue_.begin(), rebuild_queue_.end(), key) == rebuild_queue_.end()) {
    rebuild_queue_.push_back(key);
  }
  return true;
}

void FilteredIndex::enqueue_along_path(VectorId id) {
  const TreeNode* n = &base_.root();
  while (true) {
    maybe_enqueue_rebuild(*n);
    if (n->is_leaf()) break;
    n = n->children.at(base_.layout().branch_at(id, n->depth)).get();
  }
}

void FilteredIndex::rebuild_subtree_unlocked(TreeNode& node, std::uint64_t seed) {
  std::set<LabelId> affected;
  base_.for_each_live([&](VectorId, const Slot& s, std::span<const float>) {
    affected.insert(s.labels.begin(), s.labels.end());
  }, &node);

  std::vector<std::pair<LabelId, std::vector<VectorId>>> saved;
  saved.reserve(affected.size());
  for (LabelId l : affected) {
    saved.emplace_back(l, label_members_unlocked(l));
    clear_label(l);
  }

  const bool is_root = node.parent == nullptr;
  const auto moved = base_.rebuild_subtree(node, seed);  // invalidates `node`
  for (auto& [label, ids] : saved) {
    for (VectorId& id : ids) {
      auto it = moved.find(id.raw);
      if (it != moved.end()) id = it->second;
    }
    std::sort(ids.begin(), ids.end());
    embed_label(label, std::move(ids), false);
  }

  if (is_root) {
    size_filters();
    ++counters_.global_rebuilds;
  } else {
    recompute_all_filters();
    ++counters_.local_rebuilds;
  }
  cache_->lru.clear();
}

void FilteredIndex::rebuild_subtree(NodeKey key, std::uint64_t seed) {
  std::unique_lock lock(*mutex_);
  TreeNode* node = base_.find_node(key.prefix, key.depth);
  if (!node) throw Error("no node with prefix " + std::to_string(key.prefix) + " at depth " + std::to_string(key.depth));
  rebuild_subtree_unlocked(*node, seed);
  std::erase_if(rebuild_queue_, [&](const NodeKey& q) {
    return base_.layout().range(key.prefix, key.depth).contains(base_.layout().range(q.prefix, q.depth));
  });
}

void FilteredIndex::run_rebuilds(RebuildMode mode, std::uint64_t seed) {
  std::unique_lock lock(*mutex_);
  if (mode == RebuildMode::kGlobal) {
    rebuild_subtree_unlocked(base_.root(), derive_seed(seed, "rebuild", 0));
    rebuild_queue_.clear();
    return;
  }
  std::vector<NodeKey> pending(rebuild_queue_.begin(), rebuild_queue_.end());
  rebuild_queue_.clear();
  // shallow first so that nested entries are covered by their ancestor
  std::sort(pending.begin(), pending.end(), [](const NodeKey& a, const NodeKey& b) {
    return a.depth != b.depth ? a.depth < b.depth : a.prefix < b.prefix;
  });
  std::vector<IdRange> done;
  for (const NodeKey& key : pending) {
    const IdRange r = base_.layout().range(key.prefix, key.depth);
    if (std::any_of(done.begin(), done.end(), [&](const IdRange& d) { return d.contains(r); })) continue;
    TreeNode* node = base_.find_node(key.prefix, key.depth);
    if (!node) continue;
    rebuild_subtree_unlocked(*node, derive_seed(seed, "rebuild", key.prefix ^ (std::uint64_t{key.depth} << 1)));
    done.push_back(r);
  }
}

}  // namespace labeltree
