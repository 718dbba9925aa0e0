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

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include "labeltree/dataset.hpp"
#include "labeltree/index.hpp"
#include "labeltree/predicate.hpp"
#include "labeltree/rng.hpp"

namespace lt_test {

using namespace labeltree;

inline Dataset random_dataset(std::size_t n, std::size_t dim, std::uint64_t seed) {
  auto rng = make_rng(seed, "test-vectors");
  std::normal_distribution<float> normal(0.0f, 1.0f);
  Dataset ds;
  ds.dim = dim;
  ds.vectors.resize(n * dim);
  for (float& v : ds.vectors) v = normal(rng);
  ds.keys.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.keys[i] = i;
  return ds;
}

/// Label l is attached independently with probability probs[l].
inline LabelAssignment random_labels(std::size_t n, const std::vector<double>& probs, std::uint64_t seed) {
  auto rng = make_rng(seed, "test-labels");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LabelAssignment la;
  la.sets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < probs.size(); ++l) {
      if (u(rng) < probs[l]) la.sets[i].push_back(static_cast<LabelId>(l));
    }
  }
  return la;
}

/// Mixed selectivities from 0.002 up to 0.3.
inline std::vector<double> mixed_probs(std::size_t n_labels) {
  std::vector<double> p(n_labels);
  for (std::size_t l = 0; l < n_labels; ++l) {
    p[l] = 0.002 * std::pow(150.0, static_cast<double>(l) / static_cast<double>(std::max<std::size_t>(n_labels - 1, 1)));
  }
  return p;
}

inline IndexConfig small_config(std::uint32_t bf = 8, std::uint32_t leaf = 16, std::uint32_t bmax = 16,
                                FilterMode mode = FilterMode::kExact) {
  IndexConfig cfg;
  cfg.tree.branch_factor = bf;
  cfg.tree.leaf_capacity = leaf;
  cfg.buffer_capacity = bmax;
  cfg.filter_mode = mode;
  cfg.seed = 7;
  return cfg;
}

/// label -> (node prefix, depth) -> buffer ids
using Placement = std::map<LabelId, std::map<std::pair<std::uint64_t, std::uint32_t>, std::vector<std::uint64_t>>>;

inline Placement placement(const FilteredIndex& index) {
  Placement out;
  index.base().for_each_node([&](const TreeNode& n) {
    for (const auto& [label, ids] : n.buffers) {
      auto& dst = out[label][{n.prefix, n.depth}];
      for (VectorId id : ids) dst.push_back(id.raw);
    }
  });
  return out;
}

/// Brute-force label members read from slot label sets.
inline std::map<LabelId, std::vector<VectorId>> slot_members(const BaseIndex& base) {
  std::map<LabelId, std::vector<VectorId>> out;
  base.for_each_live([&](VectorId id, const Slot& s, std::span<const float>) {
    for (LabelId l : s.labels) out[l].push_back(id);
  });
  for (auto& [l, ids] : out) std::sort(ids.begin(), ids.end());
  return out;
}

/// Dataset + labels mirrored from the live state of an index, keyed by external key.
inline std::pair<Dataset, LabelAssignment> live_state(const FilteredIndex& index) {
  std::vector<std::tuple<ExternalKey, std::vector<float>, LabelSet>> rows;
  index.base().for_each_live([&](VectorId, const Slot& s, std::span<const float> v) {
    rows.emplace_back(s.key, std::vector<float>(v.begin(), v.end()), s.labels);
  });
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  Dataset ds;
  ds.dim = index.dim();
  LabelAssignment la;
  for (auto& [key, v, labels] : rows) {
    ds.keys.push_back(key);
    ds.vectors.insert(ds.vectors.end(), v.begin(), v.end());
    la.sets.push_back(labels);
  }
  return {std::move(ds), std::move(la)};
}

/// Random bounded predicate over labels [0, n_labels). Negations only appear
/// as And operands next to at least one positive operand.
inline Predicate random_predicate(std::mt19937_64& rng, std::uint32_t n_labels, int depth) {
  std::uniform_int_distribution<std::uint32_t> label(0, n_labels - 1);
  std::uniform_int_distribution<int> coin(0, 2);
  if (depth == 0 || coin(rng) == 0) return Predicate::label(label(rng));
  std::uniform_int_distribution<int> arity(2, 3);
  const int n = arity(rng);
  std::vector<Predicate> ops;
  if (coin(rng) == 0) {
    for (int i = 0; i < n; ++i) ops.push_back(random_predicate(rng, n_labels, depth - 1));
    return Predicate::any_of(std::move(ops));
  }
  ops.push_back(random_predicate(rng, n_labels, depth - 1));
  for (int i = 1; i < n; ++i) {
    Predicate p = random_predicate(rng, n_labels, depth - 1);
    ops.push_back(coin(rng) == 0 ? Predicate::negate(std::move(p)) : std::move(p));
  }
  return Predicate::all_of(std::move(ops));
}

}  // namespace lt_test
