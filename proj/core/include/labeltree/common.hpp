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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace labeltree {

using LabelId = std::uint32_t;
using ExternalKey = std::uint64_t;

/// Sorted, duplicate-free set of labels attached to one vector.
using LabelSet = std::vector<LabelId>;

/// Labels at or above this value are reserved for predicates integrated as
/// virtual labels.
inline constexpr LabelId kFirstVirtualLabel = 0x80000000u;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files or snapshot streams.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Packed identifier of a stored vector. Ordering of the raw integer equals
/// root-to-leaf path order, which groups every subtree contiguously.
struct VectorId {
  std::uint64_t raw = 0;

  constexpr VectorId() = default;
  constexpr explicit VectorId(std::uint64_t r) : raw(r) {}

  friend constexpr auto operator<=>(VectorId, VectorId) = default;
};

/// Half-open raw id interval [min, max). The root's upper bound is the
/// sentinel UINT64_MAX, which is never assigned to a vector.
struct IdRange {
  std::uint64_t min = 0;
  std::uint64_t max = 0;

  constexpr bool contains(VectorId id) const { return id.raw >= min && id.raw < max; }
  constexpr bool contains(const IdRange& other) const {
    return other.min >= min && other.max <= max;
  }
  friend constexpr bool operator==(const IdRange&, const IdRange&) = default;
};

}  // namespace labeltree
