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
#include <iterator>
#include <numeric>
#include <set>

#include "labeltree/index.hpp"

namespace labeltree {

void IndexConfig::validate() const {
  tree.validate();
  if (buffer_capacity == 0) throw Error("buffer_capacity must be positive");
  if (!(bloom_fp_rate > 0.0 && bloom_fp_rate < 1.0)) throw Error("bloom_fp_rate must be in (0, 1)");
  if (bloom_expected_labels < 0.0) throw Error("bloom_expected_labels must be >= 0");
  if (!(rebuild_threshold >= 0.0)) throw Error("rebuild_threshold must be >= 0");
}

const LabelEntry* LabelRegistry::find(LabelId label) const {
  auto it = labels_.find(label);
  return it == labels_.end() ? nullptr : &it->second;
}

std::size_t LabelRegistry::count(LabelId label) const {
  const LabelEntry* e = find(label);
  return e ? e->count : 0;
}

LabelId LabelRegistry::allocate_virtual() {
  if (next_virtual_ == 0xFFFFFFFFu) throw Error("virtual label ids exhausted");
  return next_virtual_++;
}

FilteredIndex::FilteredIndex()
    : mutex_(std::make_unique<std::shared_mutex>()), cache_(std::make_unique<TempCache>()) {}
FilteredIndex::~FilteredIndex() = default;
FilteredIndex::FilteredIndex(FilteredIndex&&) noexcept = default;
FilteredIndex& FilteredIndex::operator=(FilteredIndex&&) noexcept = default;

FilteredIndex FilteredIndex::build(const Dataset& ds, const LabelAssignment& labels, const IndexConfig& cfg) {
  cfg.validate();
  labels.validate();
  for (const auto& set : labels.sets) {
    if (!set.empty() && set.back() >= kFirstVirtualLabel) {
      throw Error("label " + std::to_string(set.back()) + " lies in the reserved virtual range");
    }
  }
  FilteredIndex index;
  index.cfg_ = cfg;
  index.base_ = BaseIndex::build(ds, cfg.tree, cfg.seed, &labels);
  index.build_all_labels();
  return index;
}

FilteredIndex FilteredIndex::empty(std::size_t dim, const IndexConfig& cfg) {
  cfg.validate();
  FilteredIndex index;
  index.cfg_ = cfg;
  index.base_ = BaseIndex::empty(dim, cfg.tree);
  index.size_filters();
  return index;
}

FilteredIndex FilteredIndex::from_parts(const IndexConfig& cfg, BaseIndex base, const BloomParams& bloom,
                                        LabelId next_virtual) {
  FilteredIndex index;
  index.cfg_ = cfg;
  index.base_ = std::move(base);
  index.bloom_params_ = bloom;
  index.registry_.set_next_virtual(next_virtual);
  index.base_.for_each_node([&](TreeNode& n) {
    for (auto& [label, ids] : n.buffers) {
      auto& e = index.registry_.entry(label);
      e.count += ids.size();
      e.hosts.emplace(index.base_.node_range(n).min, &n);
    }
  });
  return index;
}

// ---------------------------------------------------------------------------
// buffers and registry

void FilteredIndex::add_buffer(TreeNode& node, LabelId label, std::vector<VectorId> ids) {
  node.buffers[label] = std::move(ids);
  registry_.entry(label).hosts[base_.node_range(node).min] = &node;
}

void FilteredIndex::remove_buffer(TreeNode& node, LabelId label) {
  node.buffers.erase(label);
  auto& e = registry_.entry(label);
  e.hosts.erase(base_.node_range(node).min);
}

bool FilteredIndex::in_label_tree(const TreeNode& node, LabelId label) const {
  const LabelEntry* e = registry_.find(label);
  if (!e) return false;
  const IdRange r = base_.node_range(node);
  auto it = e->hosts.lower_bound(r.min);
  return it != e->hosts.end() && it->first < r.max;
}

void FilteredIndex::embed_label(LabelId label, std::vector<VectorId> ids, bool update_filters) {
  const std::size_t n = ids.size();
  if (n == 0) return;
  const TempIndex temp = TempIndex::build(std::move(ids), base_, cfg_.buffer_capacity);
  for (const TempNode& t : temp.nodes()) {
    auto& node = const_cast<TreeNode&>(*t.base);
    if (t.is_leaf()) {
      auto slice = temp.slice(t);
      add_buffer(node, label, std::vector<VectorId>(slice.begin(), slice.end()));
    }
    if (update_filters) node.filter.insert(label);
  }
  registry_.entry(label).count = n;
}

void FilteredIndex::clear_label(LabelId label) {
  auto it = registry_.labels().find(label);
  if (it == registry_.labels().end()) return;
  for (auto& [min, node] : it->second.hosts) node->buffers.erase(label);
  registry_.erase(label);
}

std::vector<VectorId> FilteredIndex::label_members_unlocked(LabelId label) const {
  std::vector<VectorId> out;
  const LabelEntry* e = registry_.find(label);
  if (!e) return out;
  out.reserve(e->count);
  // hosts have pairwise disjoint ranges, so concatenation in key order is sorted
  for (const auto& [min, node] : e->hosts) {
    const auto& b = node->buffers.at(label);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<VectorId> FilteredIndex::label_members(LabelId label) const {
  auto lock = read_lock();
  return label_members_unlocked(label);
}

void FilteredIndex::build_all_labels() {
  std::unique_lock lock(*mutex_);
  base_.for_each_node([](TreeNode& n) { n.buffers.clear(); });
  const LabelId next_virtual = registry_.next_virtual();
  registry_.clear();
  registry_.set_next_virtual(next_virtual);

  std::map<LabelId, std::vector<VectorId>> members;
  base_.for_each_live([&](VectorId id, const Slot& s, std::span<const float>) {
    for (LabelId l : s.labels) members[l].push_back(id);
  });
  for (auto& [label, ids] : members) embed_label(label, std::move(ids), false);
  size_filters();
  cache_->lru.clear();
}

// ---------------------------------------------------------------------------
// node filters

bool FilteredIndex::recompute_filter(TreeNode& node) {
  LabelFilter fresh(cfg_.filter_mode, bloom_params_);
  for (const auto& [label, ids] : node.buffers) {
    if (!ids.empty()) fresh.insert(label);
  }
  for (const auto& c : node.children) fresh.merge(c->filter);
  ++counters_.filter_recomputations;
  if (fresh == node.filter) return false;
  node.filter = std::move(fresh);
  return true;
}

void FilteredIndex::propagate_filter(TreeNode& node) {
  TreeNode* n = &node;
  bool changed = recompute_filter(*n);
  while (changed && n->parent) {
    n = n->parent;
    changed = recompute_filter(*n);
  }
}

void FilteredIndex::recompute_all_filters() {
  // post-order so children are current before their parent
  std::vector<std::pair<TreeNode*, bool>> stack{{&base_.root(), false}};
  while (!stack.empty()) {
    auto [n, visited] = stack.back();
    stack.pop_back();
    if (visited) {
      recompute_filter(*n);
      continue;
    }
    stack.emplace_back(n, true);
    for (auto& c : n->children) stack.emplace_back(c.get(), false);
  }
}

void FilteredIndex::size_filters() {
  double expected = cfg_.bloom_expected_labels;
  if (expected <= 0.0) {
    // exact |T_n| per node, bottom-up; nodes outside every per-label tree
    // hold empty filters and are left out of the average
    std::size_t nodes = 0;
    std::size_t total = 0;
    std::vector<std::pair<TreeNode*, bool>> stack{{&base_.root(), false}};
    std::unordered_map<const TreeNode*, std::vector<LabelId>> sets;
    while (!stack.empty()) {
      auto [n, visited] = stack.back();
      stack.pop_back();
      if (!visited) {
        stack.emplace_back(n, true);
        for (auto& c : n->children) stack.emplace_back(c.get(), false);
        continue;
      }
      std::vector<LabelId> set;
      for (const auto& [label, ids] : n->buffers) set.push_back(label);
      for (const auto& c : n->children) {
        auto& cs = sets.at(c.get());
        std::vector<LabelId> merged;
        std::set_union(set.begin(), set.end(), cs.begin(), cs.end(), std::back_inserter(merged));
        set = std::move(merged);
        sets.erase(c.get());
      }
      if (!set.empty()) {
        ++nodes;
        total += set.size();
      }
      sets.emplace(n, std::move(set));
    }
    expected = 2.0 * static_cast<double>(total) / static_cast<double>(std::max<std::size_t>(nodes, 1));
  }
  bloom_params_ = BloomParams::for_capacity(std::max(1.0, expected), cfg_.bloom_fp_rate, cfg_.bloom_seed);
  recompute_all_filters();
}

void FilteredIndex::set_filter_mode(FilterMode mode) {
  std::unique_lock lock(*mutex_);
  cfg_.filter_mode = mode;
  recompute_all_filters();
}

// ---------------------------------------------------------------------------
// label updates

void FilteredIndex::flush(TreeNode& node, LabelId label) {
  std::vector<VectorId> ids = std::move(node.buffers.at(label));
  remove_buffer(node, label);
  ++counters_.flushes;
  for (auto& child : node.children) {
    const IdRange r = base_.node_range(*child);
    auto lo = std::lower_bound(ids.begin(), ids.end(), VectorId{r.min});
    auto hi = std::lower_bound(lo, ids.end(), VectorId{r.max});
    if (lo == hi) continue;
    const auto n = static_cast<std::size_t>(hi - lo);
    add_buffer(*child, label, std::vector<VectorId>(lo, hi));
    child->filter.insert(label);
    if (n > cfg_.buffer_capacity && !child->is_leaf()) flush(*child, label);
  }
}

void FilteredIndex::insert_label_unlocked(VectorId id, LabelId label) {
  Slot& slot = base_.mutable_slot(id);
  auto pos = std::lower_bound(slot.labels.begin(), slot.labels.end(), label);
  if (pos != slot.labels.end() && *pos == label) {
    throw Error("vector " + std::to_string(slot.key) + " already carries label " + std::to_string(label));
  }
  slot.labels.insert(pos, label);

  LabelEntry& entry = registry_.entry(label);
  ++entry.count;
  TreeNode* n = &base_.root();
  if (entry.count == 1) {
    add_buffer(*n, label, {id});
    n->filter.insert(label);
    return;
  }
  while (true) {
    auto it = n->buffers.find(label);
    if (it != n->buffers.end()) {
      auto& ids = it->second;
      ids.insert(std::lower_bound(ids.begin(), ids.end(), id), id);
      if (ids.size() > cfg_.buffer_capacity && !n->is_leaf()) flush(*n, label);
      return;
    }
    // n is an internal node of the per-label tree
    TreeNode* child = n->children.at(base_.layout().branch_at(id, n->depth)).get();
    if (in_label_tree(*child, label)) {
      n = child;
      continue;
    }
    add_buffer(*child, label, {id});
    child->filter.insert(label);
    return;
  }
}

void FilteredIndex::delete_label_unlocked(VectorId id, LabelId label) {
  Slot& slot = base_.mutable_slot(id);
  auto pos = std::lower_bound(slot.labels.begin(), slot.labels.end(), label);
  if (pos == slot.labels.end() || *pos != label) {
    throw Error("vector " + std::to_string(slot.key) + " does not carry label " + std::to_string(label));
  }
  slot.labels.erase(pos);

  LabelEntry& entry = registry_.entry(label);
  auto host_it = entry.hosts.upper_bound(id.raw);
  if (host_it == entry.hosts.begin()) throw Error("label index is missing a buffer for a member");
  --host_it;
  TreeNode* host = host_it->second;
  auto& ids = host->buffers.at(label);
  auto idpos = std::lower_bound(ids.begin(), ids.end(), id);
  if (idpos == ids.end() || *idpos != id) throw Error("label index is missing a buffer for a member");
  ids.erase(idpos);
  --entry.count;

  std::vector<TreeNode*> lost;
  if (ids.empty()) {
    remove_buffer(*host, label);
    lost.push_back(host);
  }
  for (TreeNode* p = host->parent; p; p = p->parent) {
    std::size_t total = 0;
    bool mergeable = true;
    for (const auto& c : p->children) {
      if (auto* b = c->buffer(label)) {
        total += b->size();
      } else if (in_label_tree(*c, label)) {
        mergeable = false;
        break;
      }
    }
    if (!mergeable || total > cfg_.buffer_capacity) break;
    if (total == 0) {
      lost.push_back(p);  // no content left below p
      continue;
    }
    std::vector<VectorId> merged;
    merged.reserve(total);
    for (auto& c : p->children) {
      auto it = c->buffers.find(label);
      if (it == c->buffers.end()) continue;
      merged.insert(merged.end(), it->second.begin(), it->second.end());
      remove_buffer(*c, label);
      lost.push_back(c.get());
    }
    add_buffer(*p, label, std::move(merged));
    ++counters_.merges;
  }
  if (entry.count == 0) registry_.erase(label);

  std::sort(lost.begin(), lost.end(), [](const TreeNode* a, const TreeNode* b) { return a->depth > b->depth; });
  for (TreeNode* n : lost) recompute_filter(*n);
  std::set<TreeNode*> touched;
  for (TreeNode* n : lost) touched.insert(n);
  for (TreeNode* n : lost) {
    if (n->parent && !touched.contains(n->parent)) {
      touched.insert(n->parent);
      propagate_filter(*n->parent);
    }
  }
}

void FilteredIndex::insert_label(ExternalKey key, LabelId label) {
  std::unique_lock lock(*mutex_);
  auto id = base_.find(key);
  if (!id) throw Error("external key " + std::to_string(key) + " not present");
  insert_label_unlocked(*id, label);
  cache_->lru.clear();
}

void FilteredIndex::delete_label(ExternalKey key, LabelId label) {
  std::unique_lock lock(*mutex_);
  auto id = base_.find(key);
  if (!id) throw Error("external key " + std::to_string(key) + " not present");
  delete_label_unlocked(*id, label);
  cache_->lru.clear();
}

// ---------------------------------------------------------------------------
// predicates

namespace {

std::vector<VectorId> set_intersect(const std::vector<VectorId>& a, const std::vector<VectorId>& b) {
  std::vector<VectorId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<VectorId> set_union(const std::vector<VectorId>& a, const std::vector<VectorId>& b) {
  std::vector<VectorId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<VectorId> set_difference(const std::vector<VectorId>& a, const std::vector<VectorId>& b) {
  std::vector<VectorId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<VectorId> FilteredIndex::eval_unlocked(const Predicate& p, const std::vector<VectorId>* universe) const {
  switch (p.kind()) {
    case Predicate::Kind::kLabel:
      return label_members_unlocked(p.label_id());
    case Predicate::Kind::kOr: {
      std::vector<VectorId> acc;
      for (const auto& op : p.operands()) acc = set_union(acc, eval_unlocked(op, universe));
      return acc;
    }
    case Predicate::Kind::kNot: {
      if (!universe) throw PredicateError("negation outside a bounding conjunction");
      return set_difference(*universe, eval_unlocked(p.operands().front(), universe));
    }
    case Predicate::Kind::kAnd: {
      std::optional<std::vector<VectorId>> acc;
      for (const auto& op : p.operands()) {
        if (!op.bounded()) continue;
        auto part = eval_unlocked(op, universe);
        acc = acc ? set_intersect(*acc, part) : std::move(part);
        if (acc->empty()) return {};
      }
      if (!acc) {
        if (!universe) throw PredicateError("conjunction without a positive operand");
        acc = *universe;
      }
      for (const auto& op : p.operands()) {
        if (op.bounded()) continue;
        const std::vector<VectorId> bound = *acc;
        acc = set_intersect(*acc, eval_unlocked(op, &bound));
        if (acc->empty()) return {};
      }
      return *acc;
    }
  }
  return {};
}

std::vector<VectorId> FilteredIndex::eval_predicate(const Predicate& predicate) const {
  predicate.validate();
  auto lock = read_lock();
  return eval_unlocked(predicate, nullptr);
}

TempIndex FilteredIndex::build_temp_index(std::vector<VectorId> qualified) const {
  auto lock = read_lock();
  return TempIndex::build(std::move(qualified), base_, cfg_.buffer_capacity);
}

LabelId FilteredIndex::integrate_as_virtual_label(const Predicate& predicate) {
  predicate.validate();
  std::unique_lock lock(*mutex_);
  std::vector<VectorId> ids = eval_unlocked(predicate, nullptr);
  if (ids.empty()) throw Error("predicate '" + predicate.to_string() + "' qualifies no vectors");
  const LabelId v = registry_.allocate_virtual();
  for (VectorId id : ids) {
    Slot& s = base_.mutable_slot(id);
    s.labels.insert(std::lower_bound(s.labels.begin(), s.labels.end(), v), v);
  }
  embed_label(v, std::move(ids), true);
  cache_->lru.clear();
  return v;
}

}  // namespace labeltree
