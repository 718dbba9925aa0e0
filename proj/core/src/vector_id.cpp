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

#include "labeltree/vector_id.hpp"

#include <bit>
#include <limits>
#include <string>

namespace labeltree {

std::uint32_t TreeConfig::bits_per_branch() const {
  if (branch_factor < 2) return 1;
  return static_cast<std::uint32_t>(std::bit_width(branch_factor - 1));
}

std::uint32_t TreeConfig::resolved_max_depth() const {
  if (max_depth != 0) return max_depth;
  if (slot_bits >= 64) return 0;
  return (64 - slot_bits) / bits_per_branch();
}

void TreeConfig::validate() const {
  if (branch_factor < 2) throw Error("branch_factor must be >= 2");
  if (leaf_capacity < 1) throw Error("leaf_capacity must be >= 1");
  if (slot_bits < 1 || slot_bits > 63) throw Error("slot_bits must be in [1, 63]");
  const std::uint64_t used =
      static_cast<std::uint64_t>(resolved_max_depth()) * bits_per_branch() + slot_bits;
  if (used > 64) {
    throw Error("max_depth * bits_per_branch + slot_bits = " + std::to_string(used) + " exceeds 64");
  }
  if (resolved_max_depth() < 1) throw Error("id layout leaves no room for a branch");
}

IdLayout::IdLayout(const TreeConfig& cfg) {
  cfg.validate();
  bpb_ = cfg.bits_per_branch();
  max_depth_ = cfg.resolved_max_depth();
  branch_factor_ = cfg.branch_factor;
  branch_mask_ = (std::uint64_t{1} << bpb_) - 1;
}

std::uint64_t IdLayout::slot_capacity(std::uint32_t depth) const {
  const std::uint32_t bits = 64 - depth * bpb_;
  // A root leaf could address 2^64 slots; cap to keep the value representable.
  if (bits >= 63) return std::uint64_t{1} << 62;
  return std::uint64_t{1} << bits;
}

VectorId IdLayout::encode(std::span<const std::uint32_t> path, std::uint64_t slot) const {
  if (path.size() > max_depth_) {
    throw Error("path depth " + std::to_string(path.size()) + " exceeds max_depth " +
                std::to_string(max_depth_));
  }
  std::uint64_t raw = 0;
  for (std::size_t d = 0; d < path.size(); ++d) {
    if (path[d] >= branch_factor_) {
      throw Error("branch index " + std::to_string(path[d]) + " >= branch_factor");
    }
    raw = child_prefix(raw, static_cast<std::uint32_t>(d), path[d]);
  }
  if (slot >= slot_capacity(static_cast<std::uint32_t>(path.size()))) {
    throw Error("slot " + std::to_string(slot) + " overflows the slot field at depth " +
                std::to_string(path.size()));
  }
  raw |= slot;
  if (raw == std::numeric_limits<std::uint64_t>::max()) {
    throw Error("vector id collides with the range sentinel");
  }
  return VectorId{raw};
}

IdPath IdLayout::decode(VectorId id, std::uint32_t depth) const {
  if (depth > max_depth_) throw Error("decode depth exceeds max_depth");
  IdPath out;
  out.branches.reserve(depth);
  for (std::uint32_t d = 0; d < depth; ++d) out.branches.push_back(branch_at(id, d));
  const std::uint32_t bits = 64 - depth * bpb_;
  out.slot = bits >= 64 ? id.raw : (id.raw & ((std::uint64_t{1} << bits) - 1));
  return out;
}

IdRange IdLayout::range(std::uint64_t prefix, std::uint32_t depth) const {
  const std::uint32_t bits = 64 - depth * bpb_;
  if (bits >= 64) return {0, std::numeric_limits<std::uint64_t>::max()};
  const std::uint64_t span = std::uint64_t{1} << bits;
  const std::uint64_t end = prefix + span;
  // Wrapped past 2^64: the last node at this depth ends at the sentinel.
  if (end == 0) return {prefix, std::numeric_limits<std::uint64_t>::max()};
  return {prefix, end};
}

}  // namespace labeltree
