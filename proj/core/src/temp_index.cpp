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

#include "labeltree/temp_index.hpp"

#include <algorithm>
#include <limits>

namespace labeltree {

TempIndex TempIndex::build(std::vector<VectorId> qualified, const BaseIndex& base,
                           std::size_t buffer_capacity) {
  if (buffer_capacity == 0) throw Error("buffer capacity must be positive");
  for (std::size_t i = 1; i < qualified.size(); ++i) {
    if (!(qualified[i - 1] < qualified[i])) throw Error("qualified id list must be strictly ascending");
  }
  if (!qualified.empty() && !base.node_range(base.root()).contains(qualified.back())) {
    throw Error("qualified id " + std::to_string(qualified.back().raw) + " lies outside the root range");
  }
  if (qualified.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("qualified id list too large");
  }
  TempIndex t;
  t.ids_ = std::move(qualified);
  if (!t.ids_.empty()) {
    t.build_node(base, base.root(), 0, static_cast<std::uint32_t>(t.ids_.size()), buffer_capacity);
  }
  return t;
}

std::uint32_t TempIndex::build_node(const BaseIndex& base, const TreeNode& node, std::uint32_t begin,
                                    std::uint32_t end, std::size_t capacity) {
  const auto self = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(TempNode{&node, begin, end, {}});
  if (end - begin <= capacity || node.is_leaf()) return self;

  const auto first = ids_.begin() + begin;
  const auto last = ids_.begin() + end;
  std::uint32_t covered = 0;
  for (const auto& child : node.children) {
    const IdRange r = base.node_range(*child);
    const auto lo = std::lower_bound(first, last, VectorId{r.min});
    const auto hi = std::lower_bound(lo, last, VectorId{r.max});
    stats_.binary_searches += 2;
    if (lo == hi) continue;
    covered += static_cast<std::uint32_t>(hi - lo);
    const auto child_idx = build_node(base, *child, static_cast<std::uint32_t>(lo - ids_.begin()),
                                      static_cast<std::uint32_t>(hi - ids_.begin()), capacity);
    nodes_[self].children.push_back(child_idx);
  }
  if (covered != end - begin) {
    throw Error("qualified ids under node " + std::to_string(node.prefix) + " fall outside every child");
  }
  return self;
}

}  // namespace labeltree
