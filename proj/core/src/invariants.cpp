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

#include "labeltree/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "labeltree/distance.hpp"

namespace labeltree {

std::string InvariantReport::summary(std::size_t max_lines) const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size() && i < max_lines; ++i) os << violations[i] << '\n';
  if (violations.size() > max_lines) os << "... " << (violations.size() - max_lines) << " more\n";
  return os.str();
}

namespace {

std::string where(const TreeNode& n) {
  return "node(prefix=" + std::to_string(n.prefix) + ", depth=" + std::to_string(n.depth) + ")";
}

struct Sweep {
  const FilteredIndex& index;
  const BaseIndex& base;
  InvariantOptions opts;
  InvariantReport report;

  // label -> live members from slot label sets
  std::map<LabelId, std::vector<VectorId>> members;

  void fail(std::string msg) { report.violations.push_back(std::move(msg)); }

  void collect_members() {
    base.for_each_live([&](VectorId id, const Slot& s, std::span<const float>) {
      for (std::size_t i = 1; i < s.labels.size(); ++i) {
        if (!(s.labels[i - 1] < s.labels[i])) fail("slot " + std::to_string(id.raw) + " label set not sorted");
      }
      for (LabelId l : s.labels) members[l].push_back(id);
    });
    for (auto& [l, ids] : members) std::sort(ids.begin(), ids.end());
  }

  std::size_t count_in(const std::vector<VectorId>& ids, const IdRange& r) const {
    auto lo = std::lower_bound(ids.begin(), ids.end(), VectorId{r.min});
    auto hi = std::lower_bound(lo, ids.end(), VectorId{r.max});
    return static_cast<std::size_t>(hi - lo);
  }

  void check_shape() {
    std::size_t live_total = 0;
    base.for_each_node([&](const TreeNode& n) {
      ++report.nodes_checked;
      if (!n.is_leaf() && !n.slots.empty()) fail(where(n) + ": internal node holds slots");
      if (n.slot_vectors.size() != n.slots.size() * base.dim()) fail(where(n) + ": slot vector storage mismatch");
      if (n.centroid.size() != base.dim()) fail(where(n) + ": centroid has wrong dimension");
      std::size_t expect = 0;
      if (n.is_leaf()) {
        for (const Slot& s : n.slots) expect += s.live ? 1 : 0;
        live_total += expect;
        if (n.slots.size() > base.layout().slot_capacity(n.depth)) fail(where(n) + ": slot overflow");
        if (opts.leaf_capacity && expect > base.config().leaf_capacity && n.depth < base.layout().max_depth()) {
          fail(where(n) + ": leaf over capacity above max_depth");
        }
      } else {
        for (std::size_t b = 0; b < n.children.size(); ++b) {
          const TreeNode& c = *n.children[b];
          expect += c.size;
          if (c.parent != &n) fail(where(c) + ": parent pointer mismatch");
          if (c.depth != n.depth + 1 || c.branch != b ||
              c.prefix != base.layout().child_prefix(n.prefix, n.depth, static_cast<std::uint32_t>(b))) {
            fail(where(c) + ": child does not extend its parent's prefix by its branch");
          }
        }
      }
      if (n.size != expect) {
        fail(where(n) + ": size " + std::to_string(n.size) + " != " + std::to_string(expect));
      }
      if (opts.exact_radius && n.size > 0) check_radius(n);
    });
    if (live_total != base.n_live()) fail("n_live disagrees with live slot count");
    if (base.root().size != base.n_live()) fail("root size disagrees with n_live");
  }

  void check_radius(const TreeNode& n) {
    double sum = 0.0;
    std::vector<double> mean(base.dim(), 0.0);
    std::size_t cnt = 0;
    base.for_each_live([&](VectorId, const Slot&, std::span<const float> v) {
      for (std::size_t j = 0; j < v.size(); ++j) mean[j] += v[j];
      ++cnt;
    }, &n);
    for (double& m : mean) m /= static_cast<double>(cnt);
    base.for_each_live([&](VectorId, const Slot&, std::span<const float> v) {
      double d = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) d += (v[j] - mean[j]) * (v[j] - mean[j]);
      sum += std::sqrt(d);
    }, &n);
    const double r = sum / static_cast<double>(cnt);
    if (std::abs(r - n.mean_radius) > 1e-5 * std::max(1.0, std::abs(r))) {
      fail(where(n) + ": mean_radius " + std::to_string(n.mean_radius) + " != " + std::to_string(r));
    }
  }

  void check_keys() {
    std::size_t live = 0;
    base.for_each_live([&](VectorId id, const Slot& s, std::span<const float>) {
      ++live;
      auto got = base.find(s.key);
      if (!got || *got != id) fail("key " + std::to_string(s.key) + " does not map to its live slot");
    });
    if (live != base.key_map().size()) fail("key map size differs from live slot count");
    for (const auto& [key, id] : base.key_map()) {
      const TreeNode& leaf = base.leaf_of(id);
      const std::uint64_t s = id.raw - leaf.prefix;
      if (s >= leaf.slots.size() || !leaf.slots[s].live || leaf.slots[s].key != key) {
        fail("key map entry " + std::to_string(key) + " points at a dead or foreign slot");
      }
    }
  }

  void check_buffers() {
    const std::size_t cap = index.config().buffer_capacity;
    // label -> hosts in pre-order
    std::map<LabelId, std::vector<const TreeNode*>> hosts;
    base.for_each_node([&](const TreeNode& n) {
      const IdRange r = base.node_range(n);
      for (const auto& [label, ids] : n.buffers) {
        ++report.buffers_checked;
        hosts[label].push_back(&n);
        if (ids.empty()) fail(where(n) + ": empty buffer for label " + std::to_string(label));
        if (ids.size() > cap && !n.is_leaf()) {
          fail(where(n) + ": buffer for label " + std::to_string(label) + " exceeds capacity");
        }
        for (std::size_t i = 0; i < ids.size(); ++i) {
          if (i > 0 && !(ids[i - 1] < ids[i])) fail(where(n) + ": buffer not strictly ascending");
          if (!r.contains(ids[i])) fail(where(n) + ": buffer id outside host range");
        }
      }
    });

    const LabelRegistry& reg = index.registry();
    for (const auto& [label, entry] : reg.labels()) {
      if (!hosts.contains(label)) fail("registry lists label " + std::to_string(label) + " without buffers");
    }
    for (const auto& [label, nodes] : hosts) {
      const LabelEntry* entry = reg.find(label);
      std::vector<VectorId> all;
      for (const TreeNode* n : nodes) {
        const auto& b = n->buffers.at(label);
        all.insert(all.end(), b.begin(), b.end());
      }
      // pre-order hosts with disjoint ranges concatenate in ascending order
      bool disjoint = true;
      for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (base.node_range(*nodes[i]).min < base.node_range(*nodes[i - 1]).max) disjoint = false;
      }
      if (!disjoint) fail("label " + std::to_string(label) + ": buffer host ranges overlap");
      const auto& want = members[label];
      if (all != want) fail("label " + std::to_string(label) + ": buffers do not partition the member set");
      if (!entry) {
        fail("label " + std::to_string(label) + " has buffers but no registry entry");
      } else {
        if (entry->count != all.size()) fail("label " + std::to_string(label) + ": registry count mismatch");
        if (entry->hosts.size() != nodes.size()) fail("label " + std::to_string(label) + ": registry host mismatch");
        for (const TreeNode* n : nodes) {
          auto it = entry->hosts.find(base.node_range(*n).min);
          if (it == entry->hosts.end() || it->second != n) {
            fail("label " + std::to_string(label) + ": registry host mismatch at " + where(*n));
          }
        }
      }
      check_placement(label, nodes, want);
    }
    for (const auto& [label, ids] : members) {
      if (!hosts.contains(label)) fail("label " + std::to_string(label) + " has members but no buffers");
    }
  }

  // Hosts stop at the first node holding at most B_max members or at a base
  // leaf; every strict ancestor of a host holds more than B_max.
  void check_placement(LabelId label, const std::vector<const TreeNode*>& nodes, const std::vector<VectorId>& ids) {
    const std::size_t cap = index.config().buffer_capacity;
    std::set<const TreeNode*> inner;
    for (const TreeNode* n : nodes) {
      for (const TreeNode* p = n->parent; p && inner.insert(p).second; p = p->parent) {
      }
      if (n->parent) {
        const std::size_t pc = count_in(ids, base.node_range(*n->parent));
        if (pc <= cap) fail("label " + std::to_string(label) + ": " + where(*n) + " should have merged upward");
      }
    }
    for (const TreeNode* p : inner) {
      if (std::find(nodes.begin(), nodes.end(), p) != nodes.end()) {
        fail("label " + std::to_string(label) + ": host nested inside another host");
      }
      if (count_in(ids, base.node_range(*p)) <= cap) {
        fail("label " + std::to_string(label) + ": internal node " + where(*p) + " holds <= B_max members");
      }
    }
  }

  void check_filters() {
    // exact per-node label-tree sets from buffers
    std::map<const TreeNode*, std::set<LabelId>> tsets;
    base.for_each_node([&](const TreeNode& n) {
      for (const auto& [label, ids] : n.buffers) {
        for (const TreeNode* p = &n; p; p = p->parent) {
          if (!tsets[p].insert(label).second) break;
        }
      }
    });
    const FilterMode mode = index.config().filter_mode;
    base.for_each_node([&](const TreeNode& n) {
      if (n.filter.mode() != mode) fail(where(n) + ": filter mode mismatch");
      if (!(n.filter.bloom().params() == index.bloom_params())) fail(where(n) + ": bloom parameters mismatch");
      auto it = tsets.find(&n);
      if (it != tsets.end()) {
        for (LabelId l : it->second) {
          if (!n.filter.contains(l)) fail(where(n) + ": false negative for label " + std::to_string(l));
        }
      }
      if (mode == FilterMode::kExact) {
        std::vector<LabelId> want;
        if (it != tsets.end()) want.assign(it->second.begin(), it->second.end());
        if (n.filter.exact() != want) fail(where(n) + ": exact label set differs from its label trees");
      }
      if (opts.fresh_filters) {
        LabelFilter fresh(mode, index.bloom_params());
        for (const auto& [label, ids] : n.buffers) fresh.insert(label);
        for (const auto& c : n.children) fresh.merge(c->filter);
        if (!(fresh == n.filter)) fail(where(n) + ": filter is stale");
      }
    });
  }
};

}  // namespace

InvariantReport check_invariants(const FilteredIndex& index, const InvariantOptions& opts) {
  auto lock = index.read_lock();
  Sweep sweep{index, index.base(), opts, {}, {}};
  sweep.collect_members();
  sweep.check_shape();
  sweep.check_keys();
  sweep.check_buffers();
  sweep.check_filters();
  InvariantReport contiguity = check_contiguity(index.base());
  for (auto& v : contiguity.violations) sweep.report.violations.push_back(std::move(v));
  return std::move(sweep.report);
}

InvariantReport check_contiguity(const BaseIndex& base) {
  InvariantReport report;
  // assign each live id its position in global sorted order
  std::vector<VectorId> all;
  base.for_each_live([&](VectorId id, const Slot&, std::span<const float>) { all.push_back(id); });
  std::vector<VectorId> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) report.violations.push_back("duplicate vector id");

  // per node: members must occupy one run [first, first + size) of the sorted order
  base.for_each_node([&](const TreeNode& n) {
    ++report.nodes_checked;
    std::vector<VectorId> mine;
    base.for_each_live([&](VectorId id, const Slot&, std::span<const float>) { mine.push_back(id); }, &n);
    const IdRange r = base.node_range(n);
    for (VectorId id : mine) {
      if (!r.contains(id)) {
        report.violations.push_back(where(n) + ": id " + std::to_string(id.raw) + " outside node range");
      }
    }
    if (mine.empty()) return;
    std::sort(mine.begin(), mine.end());
    auto first = std::lower_bound(sorted.begin(), sorted.end(), mine.front());
    if (static_cast<std::size_t>(sorted.end() - first) < mine.size() ||
        !std::equal(mine.begin(), mine.end(), first)) {
      report.violations.push_back(where(n) + ": subtree ids are not one contiguous run");
    }
  });
  return report;
}

}  // namespace labeltree
