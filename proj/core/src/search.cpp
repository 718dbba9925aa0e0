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
#include <cmath>
#include <queue>
#include <unordered_set>

#include "labeltree/distance.hpp"
#include "labeltree/index.hpp"

namespace labeltree {

void SearchParams::validate() const {
  if (k == 0) throw Error("k must be positive");
  if (ef < k) throw Error("ef must be >= k");
  if (beam_width == 0) throw Error("beam_width must be positive");
  if (!std::isfinite(alpha) || alpha < 0.0f) throw Error("alpha must be finite and >= 0");
}

float node_score(const TreeNode& node, std::span<const float> query, float alpha) {
  return std::sqrt(l2_sqr(node.centroid, query)) - alpha * node.mean_radius;
}

double recall_at_k(std::span<const Hit> result, const GroundTruthEntry& truth, std::size_t k) {
  if (truth.hits.empty()) return 1.0;
  std::unordered_set<ExternalKey> want;
  for (const Hit& h : truth.hits) want.insert(h.key);
  const std::size_t n = std::min(k, result.size());
  std::size_t found = 0;
  for (std::size_t i = 0; i < n; ++i) found += want.count(result[i].key);
  return static_cast<double>(found) / static_cast<double>(std::min(k, truth.hits.size()));
}

namespace {

// Embedded per-label tree: membership through node filters, buffers in place.
struct EmbeddedView {
  using Node = const TreeNode*;
  const BaseIndex& base;
  LabelId label;

  Node root() const { return &base.root(); }
  const TreeNode& base_node(Node n) const { return *n; }
  bool member(Node n) const { return n->filter.contains(label); }
  std::span<const VectorId> buffer(Node n) const {
    const auto* b = n->buffer(label);
    return b ? std::span<const VectorId>(*b) : std::span<const VectorId>();
  }
  template <class F>
  void for_children(Node n, F&& f) const {
    for (const auto& c : n->children) f(Node{c.get()});
  }
};

// Temporary tree: every node is a member, leaves are slices.
struct TempView {
  using Node = std::uint32_t;
  const TempIndex& temp;

  Node root() const { return 0; }
  const TreeNode& base_node(Node n) const { return *temp.nodes()[n].base; }
  bool member(Node) const { return true; }
  std::span<const VectorId> buffer(Node n) const {
    const TempNode& t = temp.nodes()[n];
    return t.is_leaf() ? temp.slice(t) : std::span<const VectorId>();
  }
  template <class F>
  void for_children(Node n, F&& f) const {
    for (std::uint32_t c : temp.nodes()[n].children) f(Node{c});
  }
};

template <class Node>
struct Cand {
  float score;
  std::uint64_t prefix;
  std::uint32_t depth;
  Node node;

  bool operator<(const Cand& o) const {
    if (score != o.score) return score < o.score;
    if (prefix != o.prefix) return prefix < o.prefix;
    return depth < o.depth;
  }
  bool operator>(const Cand& o) const { return o < *this; }
};

template <class View>
class BestFirst {
 public:
  using Node = typename View::Node;
  using C = Cand<Node>;

  BestFirst(const View& view, const BaseIndex& base, std::span<const float> query, float alpha)
      : view_(view), base_(base), query_(query), alpha_(alpha) {}

  C make(Node n) {
    const TreeNode& b = view_.base_node(n);
    ++stats_.centroid_distances;
    return C{node_score(b, query_, alpha_), b.prefix, b.depth, n};
  }

  // Level-wise beam descent. Buffer holders carry over unchanged; other
  // nodes are replaced by their member children.
  std::vector<C> frontier(std::size_t beam_width) {
    std::vector<C> out;
    if (!view_.member(view_.root())) return out;
    std::vector<C> beam{make(view_.root())};
    while (true) {
      std::vector<C> next;
      bool expanded = false;
      for (const C& c : beam) {
        if (!view_.buffer(c.node).empty()) {
          next.push_back(c);
          continue;
        }
        expanded = true;
        view_.for_children(c.node, [&](Node child) {
          if (view_.member(child)) next.push_back(make(child));
        });
      }
      if (!expanded) break;
      std::sort(next.begin(), next.end());
      if (next.size() > beam_width) {
        out.insert(out.end(), next.begin() + static_cast<std::ptrdiff_t>(beam_width), next.end());
        next.resize(beam_width);
      }
      beam = std::move(next);
    }
    out.insert(out.end(), beam.begin(), beam.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  SearchResult run(const SearchParams& params) {
    std::priority_queue<C, std::vector<C>, std::greater<C>> heap;
    for (const C& c : frontier(params.beam_width)) heap.push(c);

    std::vector<std::pair<float, ExternalKey>> results;
    std::vector<std::pair<float, ExternalKey>> batch;
    std::vector<std::pair<float, ExternalKey>> merged;
    while (!heap.empty()) {
      const C c = heap.top();
      heap.pop();
      ++stats_.nodes_popped;
      const auto buf = view_.buffer(c.node);
      if (!buf.empty()) {
        ++stats_.buffers_visited;
        const TreeNode& from = view_.base_node(c.node);
        batch.clear();
        for (VectorId id : buf) {
          const TreeNode& leaf = base_.leaf_of(id, from);
          const std::size_t s = id.raw - leaf.prefix;
          const Slot& slot = leaf.slots[s];
          if (!slot.live) continue;
          ++stats_.vector_distances;
          batch.emplace_back(l2_sqr(leaf.slot_vector(s, base_.dim()), query_), slot.key);
        }
        std::sort(batch.begin(), batch.end());
        bool changed = !batch.empty() && (results.size() < params.ef || batch.front() < results.back());
        if (!changed) break;
        merged.clear();
        std::merge(results.begin(), results.end(), batch.begin(), batch.end(), std::back_inserter(merged));
        if (merged.size() > params.ef) merged.resize(params.ef);
        results.swap(merged);
        continue;
      }
      view_.for_children(c.node, [&](Node child) {
        if (view_.member(child)) heap.push(make(child));
      });
    }

    SearchResult out;
    const std::size_t n = std::min(params.k, results.size());
    out.hits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.hits.push_back(Hit{results[i].second, std::sqrt(results[i].first)});
    out.stats = stats_;
    return out;
  }

 private:
  const View& view_;
  const BaseIndex& base_;
  std::span<const float> query_;
  float alpha_;
  SearchStats stats_;
};

void check_query(std::span<const float> query, std::size_t dim) {
  if (query.size() != dim) {
    throw Error("query has dimension " + std::to_string(query.size()) + ", index has " + std::to_string(dim));
  }
}

}  // namespace

SearchResult FilteredIndex::search_label_unlocked(std::span<const float> query, LabelId label,
                                                  const SearchParams& params) const {
  params.validate();
  check_query(query, dim());
  if (!registry_.find(label)) return {};
  EmbeddedView view{base_, label};
  return BestFirst<EmbeddedView>(view, base_, query, params.alpha).run(params);
}

SearchResult FilteredIndex::search_label(std::span<const float> query, LabelId label,
                                         const SearchParams& params) const {
  auto lock = read_lock();
  return search_label_unlocked(query, label, params);
}

SearchResult FilteredIndex::search_temp(std::span<const float> query, const TempIndex& temp,
                                        const SearchParams& params) const {
  params.validate();
  check_query(query, dim());
  if (temp.empty()) return {};
  auto lock = read_lock();
  TempView view{temp};
  return BestFirst<TempView>(view, base_, query, params.alpha).run(params);
}

SearchResult FilteredIndex::search_ids(std::span<const float> query, std::vector<VectorId> qualified,
                                       const SearchParams& params) const {
  params.validate();
  check_query(query, dim());
  auto lock = read_lock();
  for (VectorId id : qualified) base_.slot(id);  // throws on unknown or deleted ids
  const TempIndex temp = TempIndex::build(std::move(qualified), base_, cfg_.buffer_capacity);
  if (temp.empty()) return {};
  TempView view{temp};
  return BestFirst<TempView>(view, base_, query, params.alpha).run(params);
}

SearchResult FilteredIndex::search_predicate(std::span<const float> query, const Predicate& predicate,
                                             const SearchParams& params) const {
  params.validate();
  predicate.validate();
  check_query(query, dim());
  auto lock = read_lock();
  const std::string key = predicate.normalized();
  std::shared_ptr<const TempIndex> temp = cached_temp(key);
  if (!temp) {
    temp = std::make_shared<const TempIndex>(
        TempIndex::build(eval_unlocked(predicate, nullptr), base_, cfg_.buffer_capacity));
    cache_temp(key, temp);
  }
  if (temp->empty()) return {};
  TempView view{*temp};
  return BestFirst<TempView>(view, base_, query, params.alpha).run(params);
}

std::vector<const TreeNode*> FilteredIndex::beam_frontier(std::span<const float> query, LabelId label,
                                                          std::size_t beam_width, float alpha) const {
  check_query(query, dim());
  if (beam_width == 0) throw Error("beam_width must be positive");
  auto lock = read_lock();
  std::vector<const TreeNode*> out;
  if (!registry_.find(label)) return out;
  EmbeddedView view{base_, label};
  for (const auto& c : BestFirst<EmbeddedView>(view, base_, query, alpha).frontier(beam_width)) {
    out.push_back(c.node);
  }
  return out;
}

std::shared_ptr<const TempIndex> FilteredIndex::cached_temp(const std::string& key) const {
  if (cfg_.temp_cache_capacity == 0) return nullptr;
  std::lock_guard guard(cache_->mu);
  auto& lru = cache_->lru;
  for (auto it = lru.begin(); it != lru.end(); ++it) {
    if (it->first == key) {
      lru.splice(lru.begin(), lru, it);
      return lru.front().second;
    }
  }
  return nullptr;
}

void FilteredIndex::cache_temp(const std::string& key, std::shared_ptr<const TempIndex> temp) const {
  if (cfg_.temp_cache_capacity == 0) return;
  std::lock_guard guard(cache_->mu);
  auto& lru = cache_->lru;
  lru.emplace_front(key, std::move(temp));
  while (lru.size() > cfg_.temp_cache_capacity) lru.pop_back();
}

}  // namespace labeltree
