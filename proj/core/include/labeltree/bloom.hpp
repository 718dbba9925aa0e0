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
#include <vector>

#include "labeltree/common.hpp"

namespace labeltree {

struct BloomParams {
  std::uint32_t num_bits = 64;
  std::uint32_t num_hashes = 4;
  std::uint64_t seed = 0x5EEDB100Full;

  /// Classic sizing: m = -n ln p / ln^2 2, k = (m / n) ln 2, both at least 1.
  static BloomParams for_capacity(double expected_items, double fp_rate, std::uint64_t seed);

  friend bool operator==(const BloomParams&, const BloomParams&) = default;
};

/// Fixed-size Bloom filter over label ids using double hashing
/// h_i(x) = h1(x) + i * h2(x) mod m.
class BloomFilter {
 public:
  BloomFilter() = default;
  explicit BloomFilter(const BloomParams& params);

  void insert(LabelId label);
  bool contains(LabelId label) const;
  void clear();
  /// Bitwise union; both filters must share parameters.
  void merge(const BloomFilter& other);

  std::size_t popcount() const;
  const BloomParams& params() const { return params_; }
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& mutable_words() { return words_; }

  friend bool operator==(const BloomFilter& a, const BloomFilter& b) {
    return a.params_ == b.params_ && a.words_ == b.words_;
  }

 private:
  BloomParams params_;
  std::vector<std::uint64_t> words_;
};

enum class FilterMode : std::uint8_t { kBloom = 0, kExact = 1 };

/// Per-node approximation of the set of per-label trees passing through the
/// node. In kExact mode a sorted label set is kept next to the Bloom bits and
/// answers queries instead of them.
class LabelFilter {
 public:
  LabelFilter() = default;
  LabelFilter(FilterMode mode, const BloomParams& params) : mode_(mode), bloom_(params) {}

  void insert(LabelId label);
  bool contains(LabelId label) const;
  void clear();
  void merge(const LabelFilter& other);

  FilterMode mode() const { return mode_; }
  const BloomFilter& bloom() const { return bloom_; }
  BloomFilter& bloom() { return bloom_; }
  const std::vector<LabelId>& exact() const { return exact_; }
  std::vector<LabelId>& exact() { return exact_; }

  friend bool operator==(const LabelFilter&, const LabelFilter&) = default;

 private:
  FilterMode mode_ = FilterMode::kBloom;
  BloomFilter bloom_;
  std::vector<LabelId> exact_;
};

}  // namespace labeltree
