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

#include "labeltree/base_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "labeltree/distance.hpp"
#include "labeltree/kmeans.hpp"
#include "labeltree/rng.hpp"

namespace labeltree {

namespace {

void set_centroid_and_radius(TreeNode& node, const Dataset& ds, std::span<const std::uint32_t> rows) {
  const std::size_t dim = ds.dim;
  std::vector<double> sum(dim, 0.0);
  for (auto r : rows) {
    auto v = ds.row(r);
    for (std::size_t d = 0; d < dim; ++d) sum[d] += v[d];
  }
  node.centroid.assign(dim, 0.0f);
  if (rows.empty()) {
    node.mean_radius = 0.0f;
    return;
  }
  for (std::size_t d = 0; d < dim; ++d) {
    node.centroid[d] = static_cast<float>(sum[d] / static_cast<double>(rows.size()));
  }
  double radius = 0.0;
  for (auto r : rows) {
    auto v = ds.row(r);
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = static_cast<double>(v[d]) - node.centroid[d];
      acc += diff * diff;
    }
    radius += std::sqrt(acc);
  }
  node.mean_radius = static_cast<float>(radius / static_cast<double>(rows.size()));
}

template <class Node>
Node& descend_nearest(Node& root, std::span<const float> x, std::uint64_t* count) {
  Node* n = &root;
  while (!n->children.empty()) {
    std::size_t best = 0;
    float best_d = std::numeric_limits<float>::infinity();
    for (std::size_t c = 0; c < n->children.size(); ++c) {
      const float d = l2_sqr(x, n->children[c]->centroid);
      if (count) ++*count;
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    n = n->children[best].get();
  }
  return *n;
}

}  // namespace

BaseIndex BaseIndex::build(const Dataset& ds, const TreeConfig& cfg, std::uint64_t seed,
                           const LabelAssignment* labels) {
  ds.validate();
  if (ds.empty()) throw Error("cannot build an index over an empty dataset");
  if (labels && labels->size() != ds.size()) {
    throw Error("label assignment has " + std::to_string(labels->size()) + " entries for " +
                std::to_string(ds.size()) + " vectors");
  }
  BaseIndex index;
  index.cfg_ = cfg;
  index.layout_ = IdLayout(cfg);
  index.dim_ = ds.dim;
  std::vector<std::uint32_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), 0u);
  index.root_ = index.build_node(ds, labels, std::move(rows), 0, 0, 0, seed);
  index.index_keys(*index.root_);
  return index;
}

BaseIndex BaseIndex::empty(std::size_t dim, const TreeConfig& cfg) {
  if (dim == 0) throw Error("index dimension must be positive");
  BaseIndex index;
  index.cfg_ = cfg;
  index.layout_ = IdLayout(cfg);
  index.dim_ = dim;
  index.root_ = std::make_unique<TreeNode>();
  index.root_->centroid.assign(dim, 0.0f);
  return index;
}

BaseIndex BaseIndex::from_parts(const TreeConfig& cfg, std::size_t dim, std::unique_ptr<TreeNode> root) {
  BaseIndex index;
  index.cfg_ = cfg;
  index.layout_ = IdLayout(cfg);
  index.dim_ = dim;
  index.root_ = std::move(root);
  index.index_keys(*index.root_);
  return index;
}

std::unique_ptr<TreeNode> BaseIndex::build_node(const Dataset& ds, const LabelAssignment* labels,
                                                std::vector<std::uint32_t> rows, std::uint64_t prefix,
                                                std::uint32_t depth, std::uint32_t branch,
                                                std::uint64_t seed) {
  auto node = std::make_unique<TreeNode>();
  node->prefix = prefix;
  node->depth = depth;
  node->branch = branch;
  node->size = rows.size();
  set_centroid_and_radius(*node, ds, rows);

  const bool fits = rows.size() <= cfg_.leaf_capacity;
  if (fits || depth >= layout_.max_depth() || rows.size() < 2) {
    if (!fits) {
      warnings_.push_back("oversized leaf at depth " + std::to_string(depth) + " holds " +
                          std::to_string(rows.size()) + " vectors");
    }
    if (rows.size() > layout_.slot_capacity(depth)) {
      throw Error("leaf at depth " + std::to_string(depth) + " cannot address " +
                  std::to_string(rows.size()) + " slots");
    }
    node->slots.reserve(rows.size());
    node->slot_vectors.reserve(rows.size() * ds.dim);
    for (auto r : rows) {
      Slot s;
      s.key = ds.keys[r];
      if (labels) s.labels = labels->sets[r];
      node->slots.push_back(std::move(s));
      auto v = ds.row(r);
      node->slot_vectors.insert(node->slot_vectors.end(), v.begin(), v.end());
    }
    return node;
  }

  const std::size_t k = std::min<std::size_t>(cfg_.branch_factor, rows.size());
  std::vector<float> points;
  points.reserve(rows.size() * ds.dim);
  for (auto r : rows) {
    auto v = ds.row(r);
    points.insert(points.end(), v.begin(), v.end());
  }
  KMeansOptions opts;
  opts.max_iters = cfg_.kmeans_iters;
  opts.seed = derive_seed(seed, "split", prefix ^ (static_cast<std::uint64_t>(depth) << 1));
  const KMeansResult km = train_kmeans(points, ds.dim, k, opts);

  // Children are ordered by their first member so that layouts are stable
  // regardless of which cluster index k-means happened to use.
  std::vector<std::vector<std::uint32_t>> parts(k);
  for (std::size_t i = 0; i < rows.size(); ++i) parts[km.assignment[i]].push_back(rows[i]);
  std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) {
    if (a.empty() || b.empty()) return !a.empty() && b.empty();
    return a.front() < b.front();
  });
  while (!parts.empty() && parts.back().empty()) parts.pop_back();

  rows.clear();
  rows.shrink_to_fit();
  for (std::uint32_t c = 0; c < parts.size(); ++c) {
    auto child = build_node(ds, labels, std::move(parts[c]), layout_.child_prefix(prefix, depth, c),
                            depth + 1, c, seed);
    child->parent = node.get();
    node->children.push_back(std::move(child));
  }
  return node;
}

void BaseIndex::index_keys(TreeNode& node) {
  if (&node == root_.get()) {
    key_to_id_.clear();
    n_live_ = 0;
  }
  std::vector<TreeNode*> stack{&node};
  while (!stack.empty()) {
    TreeNode* n = stack.back();
    stack.pop_back();
    for (auto& c : n->children) {
      c->parent = n;
      stack.push_back(c.get());
    }
    for (std::size_t s = 0; s < n->slots.size(); ++s) {
      if (!n->slots[s].live) continue;
      const VectorId id{n->prefix | s};
      if (!key_to_id_.emplace(n->slots[s].key, id).second) {
        throw Error("duplicate external key " + std::to_string(n->slots[s].key));
      }
      ++n_live_;
    }
  }
}

const TreeNode& BaseIndex::nearest_leaf(std::span<const float> x, std::uint64_t* count) const {
  return descend_nearest(*root_, x, count);
}

TreeNode& BaseIndex::nearest_leaf(std::span<const float> x, std::uint64_t* count) {
  return descend_nearest(*root_, x, count);
}

const TreeNode& BaseIndex::leaf_of(VectorId id, const TreeNode& from) const {
  const TreeNode* n = &from;
  while (!n->children.empty()) {
    const std::uint32_t b = layout_.branch_at(id, n->depth);
    if (b >= n->children.size()) throw Error("vector id " + std::to_string(id.raw) + " names a missing branch");
    n = n->children[b].get();
  }
  return *n;
}

TreeNode& BaseIndex::leaf_of(VectorId id, TreeNode& from) {
  return const_cast<TreeNode&>(static_cast<const BaseIndex&>(*this).leaf_of(id, static_cast<const TreeNode&>(from)));
}

const Slot& BaseIndex::slot(VectorId id) const {
  const TreeNode& leaf = leaf_of(id);
  const std::uint64_t s = id.raw - leaf.prefix;
  if (s >= leaf.slots.size() || !leaf.slots[s].live) {
    throw Error("vector id " + std::to_string(id.raw) + " is not live");
  }
  return leaf.slots[s];
}

Slot& BaseIndex::mutable_slot(VectorId id) { return const_cast<Slot&>(slot(id)); }

std::span<const float> BaseIndex::vector(VectorId id, const TreeNode& from) const {
  const TreeNode& leaf = leaf_of(id, from);
  const std::uint64_t s = id.raw - leaf.prefix;
  if (s >= leaf.slots.size() || !leaf.slots[s].live) {
    throw Error("vector id " + std::to_string(id.raw) + " is not live");
  }
  return leaf.slot_vector(s, dim_);
}

std::span<const float> BaseIndex::vector(VectorId id) const { return vector(id, *root_); }

std::optional<VectorId> BaseIndex::find(ExternalKey key) const {
  auto it = key_to_id_.find(key);
  if (it == key_to_id_.end()) return std::nullopt;
  return it->second;
}

TreeNode* BaseIndex::find_node(std::uint64_t prefix, std::uint32_t depth) {
  TreeNode* n = root_.get();
  while (n->depth < depth) {
    const std::uint32_t b = layout_.branch_at(VectorId{prefix}, n->depth);
    if (b >= n->children.size()) return nullptr;
    n = n->children[b].get();
  }
  return n->prefix == prefix ? n : nullptr;
}

void BaseIndex::for_each_node(const std::function<void(const TreeNode&)>& fn) const {
  std::vector<const TreeNode*> stack{root_.get()};
  while (!stack.empty()) {
    const TreeNode* n = stack.back();
    stack.pop_back();
    fn(*n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(it->get());
  }
}

void BaseIndex::for_each_node(const std::function<void(TreeNode&)>& fn) {
  std::vector<TreeNode*> stack{root_.get()};
  while (!stack.empty()) {
    TreeNode* n = stack.back();
    stack.pop_back();
    fn(*n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(it->get());
  }
}

void BaseIndex::for_each_live(
    const std::function<void(VectorId, const Slot&, std::span<const float>)>& fn,
    const TreeNode* from) const {
  std::vector<const TreeNode*> stack{from ? from : root_.get()};
  while (!stack.empty()) {
    const TreeNode* n = stack.back();
    stack.pop_back();
    for (std::size_t s = 0; s < n->slots.size(); ++s) {
      if (n->slots[s].live) fn(VectorId{n->prefix | s}, n->slots[s], n->slot_vector(s, dim_));
    }
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(it->get());
  }
}

VectorId BaseIndex::insert(ExternalKey key, std::span<const float> x) {
  if (x.size() != dim_) {
    throw Error("vector has dim " + std::to_string(x.size()) + ", index expects " + std::to_string(dim_));
  }
  for (float v : x) {
    if (!std::isfinite(v)) throw Error("vector has a non-finite coordinate");
  }
  if (key_to_id_.contains(key)) throw Error("external key " + std::to_string(key) + " already present");
  TreeNode& leaf = nearest_leaf(x);
  const std::uint64_t s = leaf.slots.size();
  if (s >= layout_.slot_capacity(leaf.depth) ||
      leaf.prefix + s == std::numeric_limits<std::uint64_t>::max()) {
    throw Error("leaf at depth " + std::to_string(leaf.depth) + " has no free slot; rebuild required");
  }
  const VectorId id{leaf.prefix | s};
  leaf.slots.push_back(Slot{key, {}, true});
  leaf.slot_vectors.insert(leaf.slot_vectors.end(), x.begin(), x.end());
  for (TreeNode* n = &leaf; n; n = n->parent) {
    ++n->size;
    ++n->update_count;
  }
  key_to_id_.emplace(key, id);
  ++n_live_;
  return id;
}

VectorId BaseIndex::erase(ExternalKey key) {
  auto it = key_to_id_.find(key);
  if (it == key_to_id_.end()) throw Error("external key " + std::to_string(key) + " not present");
  const VectorId id = it->second;
  TreeNode& leaf = leaf_of(id);
  leaf.slots[id.raw - leaf.prefix].live = false;
  leaf.slots[id.raw - leaf.prefix].labels.clear();
  for (TreeNode* n = &leaf; n; n = n->parent) {
    --n->size;
    ++n->update_count;
  }
  key_to_id_.erase(it);
  --n_live_;
  return id;
}

std::unordered_map<std::uint64_t, VectorId> BaseIndex::rebuild_subtree(TreeNode& node, std::uint64_t seed) {
  Dataset ds;
  ds.dim = dim_;
  LabelAssignment la;
  std::vector<VectorId> old_ids;
  for_each_live(
      [&](VectorId id, const Slot& s, std::span<const float> v) {
        old_ids.push_back(id);
        ds.keys.push_back(s.key);
        ds.vectors.insert(ds.vectors.end(), v.begin(), v.end());
        la.sets.push_back(s.labels);
      },
      &node);

  std::unordered_map<std::uint64_t, VectorId> moved;
  if (ds.empty()) {
    std::vector<TreeNode*> stack{&node};
    while (!stack.empty()) {
      TreeNode* n = stack.back();
      stack.pop_back();
      n->update_count = 0;
      for (auto& c : n->children) stack.push_back(c.get());
    }
    return moved;
  }

  std::vector<std::uint32_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), 0u);
  TreeNode* parent = node.parent;
  const std::uint32_t branch = node.branch;
  auto fresh = build_node(ds, &la, std::move(rows), node.prefix, node.depth, branch, seed);
  fresh->parent = parent;

  for (std::size_t i = 0; i < old_ids.size(); ++i) key_to_id_.erase(ds.keys[i]);
  TreeNode* installed = fresh.get();
  if (parent) {
    parent->children[branch] = std::move(fresh);
  } else {
    root_ = std::move(fresh);
  }
  // re-register keys below the new subtree
  std::vector<TreeNode*> stack{installed};
  while (!stack.empty()) {
    TreeNode* n = stack.back();
    stack.pop_back();
    for (auto& c : n->children) {
      c->parent = n;
      stack.push_back(c.get());
    }
    for (std::size_t s = 0; s < n->slots.size(); ++s) key_to_id_.emplace(n->slots[s].key, VectorId{n->prefix | s});
  }
  for (std::size_t i = 0; i < old_ids.size(); ++i) moved.emplace(old_ids[i].raw, key_to_id_.at(ds.keys[i]));
  return moved;
}

}  // namespace labeltree
