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

#include "labeltree/bloom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "labeltree/rng.hpp"

namespace labeltree {

BloomParams BloomParams::for_capacity(double expected_items, double fp_rate, std::uint64_t seed) {
  if (!(fp_rate > 0.0 && fp_rate < 1.0)) throw Error("bloom false-positive rate must be in (0, 1)");
  const double n = std::max(1.0, expected_items);
  const double ln2 = std::log(2.0);
  const double m = std::ceil(-n * std::log(fp_rate) / (ln2 * ln2));
  BloomParams p;
  p.num_bits = static_cast<std::uint32_t>(std::max(8.0, m));
  p.num_hashes = static_cast<std::uint32_t>(std::max(1.0, std::round(p.num_bits / n * ln2)));
  p.seed = seed;
  return p;
}

BloomFilter::BloomFilter(const BloomParams& params)
    : params_(params), words_((params.num_bits + 63) / 64, 0) {
  if (params.num_bits == 0 || params.num_hashes == 0) throw Error("bloom filter needs m > 0 and k > 0");
}

namespace {

struct HashPair {
  std::uint64_t h1;
  std::uint64_t h2;
};

HashPair hash_label(LabelId label, std::uint64_t seed) {
  const std::uint64_t h1 = splitmix64(seed ^ label);
  // h2 odd keeps the probe sequence from collapsing when m is even.
  const std::uint64_t h2 = splitmix64(std::rotl(seed, 32) + label + 0x632BE59BD9B4E019ull) | 1;
  return {h1, h2};
}

}  // namespace

void BloomFilter::insert(LabelId label) {
  const auto [h1, h2] = hash_label(label, params_.seed);
  for (std::uint32_t i = 0; i < params_.num_hashes; ++i) {
    const std::uint64_t bit = (h1 + i * h2) % params_.num_bits;
    words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  }
}

bool BloomFilter::contains(LabelId label) const {
  if (words_.empty()) return false;
  const auto [h1, h2] = hash_label(label, params_.seed);
  for (std::uint32_t i = 0; i < params_.num_hashes; ++i) {
    const std::uint64_t bit = (h1 + i * h2) % params_.num_bits;
    if ((words_[bit >> 6] & (std::uint64_t{1} << (bit & 63))) == 0) return false;
  }
  return true;
}

void BloomFilter::clear() { std::fill(words_.begin(), words_.end(), 0); }

void BloomFilter::merge(const BloomFilter& other) {
  if (!(params_ == other.params_)) throw Error("cannot merge bloom filters of different shape");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

std::size_t BloomFilter::popcount() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

void LabelFilter::insert(LabelId label) {
  bloom_.insert(label);
  if (mode_ == FilterMode::kExact) {
    auto it = std::lower_bound(exact_.begin(), exact_.end(), label);
    if (it == exact_.end() || *it != label) exact_.insert(it, label);
  }
}

bool LabelFilter::contains(LabelId label) const {
  if (mode_ == FilterMode::kExact) {
    return std::binary_search(exact_.begin(), exact_.end(), label);
  }
  return bloom_.contains(label);
}

void LabelFilter::clear() {
  bloom_.clear();
  exact_.clear();
}

void LabelFilter::merge(const LabelFilter& other) {
  bloom_.merge(other.bloom_);
  if (mode_ == FilterMode::kExact) {
    std::vector<LabelId> out;
    out.reserve(exact_.size() + other.exact_.size());
    std::set_union(exact_.begin(), exact_.end(), other.exact_.begin(), other.exact_.end(),
                   std::back_inserter(out));
    exact_ = std::move(out);
  }
}

}  // namespace labeltree
