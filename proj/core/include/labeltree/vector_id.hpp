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

#include "labeltree/common.hpp"

namespace labeltree {

/// Shape of the base tree and of the packed id layout derived from it.
struct TreeConfig {
  std::uint32_t branch_factor = 16;
  std::uint32_t leaf_capacity = 64;
  /// 0 selects the deepest layout that still leaves `slot_bits` below the path.
  std::uint32_t max_depth = 0;
  std::uint32_t slot_bits = 8;
  std::uint32_t kmeans_iters = 25;

  std::uint32_t bits_per_branch() const;
  std::uint32_t resolved_max_depth() const;
  /// Throws Error if the layout does not fit in 64 bits.
  void validate() const;
};

/// Decoded form of a VectorId at a known leaf depth.
struct IdPath {
  std::vector<std::uint32_t> branches;
  std::uint64_t slot = 0;

  friend bool operator==(const IdPath&, const IdPath&) = default;
};

/// Bit layout of VectorId:
///
///   [63 ........................................ 0]
///   | b0 | b1 | ... | b(d-1) | 0 ... 0 |   slot   |
///
/// Branch indices occupy `bits_per_branch` bits each, left-aligned at the
/// most significant end and zero-padded below the leaf depth d. The slot sits
/// in the least significant bits and may grow into the padding of shallow
/// leaves, so a leaf at depth d has 64 - d * bits_per_branch slot bits.
class IdLayout {
 public:
  IdLayout() = default;
  explicit IdLayout(const TreeConfig& cfg);

  std::uint32_t bits_per_branch() const { return bpb_; }
  std::uint32_t max_depth() const { return max_depth_; }
  std::uint32_t branch_factor() const { return branch_factor_; }

  /// Number of slots a leaf at `depth` can address.
  std::uint64_t slot_capacity(std::uint32_t depth) const;

  /// Throws Error on any field overflow or if the result would be the
  /// reserved sentinel UINT64_MAX.
  VectorId encode(std::span<const std::uint32_t> path, std::uint64_t slot) const;
  IdPath decode(VectorId id, std::uint32_t depth) const;

  /// Branch taken below a node at `depth` on the way to `id`.
  std::uint32_t branch_at(VectorId id, std::uint32_t depth) const {
    return static_cast<std::uint32_t>((id.raw >> (64 - (depth + 1) * bpb_)) & branch_mask_);
  }

  /// Prefix of the child `branch` of a node with prefix `parent` at `depth`.
  std::uint64_t child_prefix(std::uint64_t parent, std::uint32_t depth, std::uint32_t branch) const {
    return parent | (static_cast<std::uint64_t>(branch) << (64 - (depth + 1) * bpb_));
  }

  /// Raw ids addressable under the node with `prefix` at `depth`.
  IdRange range(std::uint64_t prefix, std::uint32_t depth) const;

 private:
  std::uint32_t bpb_ = 4;
  std::uint32_t max_depth_ = 14;
  std::uint32_t branch_factor_ = 16;
  std::uint64_t branch_mask_ = 0xF;
};

}  // namespace labeltree
