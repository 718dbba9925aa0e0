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

#include "labeltree/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "labeltree/binary_io.hpp"
#include "labeltree/distance.hpp"

namespace labeltree {

namespace {

using Scored = std::pair<float, ExternalKey>;

void check_inputs(const Dataset& ds, const LabelAssignment& labels, std::span<const float> query, std::size_t k) {
  if (k == 0) throw Error("k must be positive");
  if (labels.sets.size() != ds.size()) throw Error("label assignment does not match the dataset");
  if (query.size() != ds.dim) throw Error("query dimension does not match the dataset");
}

GroundTruthEntry finish(std::vector<Scored> top, std::size_t qualified) {
  GroundTruthEntry out;
  out.qualified = qualified;
  out.hits.reserve(top.size());
  for (const auto& [d, key] : top) out.hits.push_back(Hit{key, std::sqrt(d)});
  return out;
}

}  // namespace

GroundTruthEntry exact_filtered_knn(const Dataset& ds, const LabelAssignment& labels,
                                    std::span<const float> query, const Predicate& predicate,
                                    std::size_t k, std::uint64_t* distance_count) {
  check_inputs(ds, labels, query, k);
  std::vector<Scored> all;
  std::priority_queue<Scored> heap;  // max-heap of the k best
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!predicate.matches(labels.sets[i])) continue;
    const Scored s{l2_sqr(ds.row(i), query), ds.keys[i]};
    all.push_back(s);
    if (heap.size() < k) {
      heap.push(s);
    } else if (s < heap.top()) {
      heap.pop();
      heap.push(s);
    }
  }
  if (distance_count) *distance_count += all.size();
  if (all.empty()) return finish({}, 0);

  const float kth = heap.top().first;
  std::vector<Scored> top;
  for (const Scored& s : all) {
    if (s.first <= kth) top.push_back(s);
  }
  std::sort(top.begin(), top.end());
  return finish(std::move(top), all.size());
}

GroundTruthEntry exact_filtered_knn_sorted(const Dataset& ds, const LabelAssignment& labels,
                                           std::span<const float> query, const Predicate& predicate,
                                           std::size_t k) {
  check_inputs(ds, labels, query, k);
  std::vector<Scored> all;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (predicate.matches(labels.sets[i])) all.emplace_back(l2_sqr(ds.row(i), query), ds.keys[i]);
  }
  std::sort(all.begin(), all.end());
  const std::size_t qualified = all.size();
  std::size_t n = std::min(k, all.size());
  while (n > 0 && n < all.size() && all[n].first == all[n - 1].first) ++n;
  all.resize(n);
  return finish(std::move(all), qualified);
}

void save_ground_truth(const std::string& path, const std::vector<GroundTruthEntry>& truth) {
  io::ByteWriter w;
  for (const auto& e : truth) {
    w.u32(static_cast<std::uint32_t>(e.hits.size()));
    for (const Hit& h : e.hits) {
      w.u64(h.key);
      w.f32(h.distance);
    }
  }
  io::write_file(path, w.data());
}

std::vector<GroundTruthEntry> load_ground_truth(const std::string& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes);
  std::vector<GroundTruthEntry> out;
  while (!r.done()) {
    GroundTruthEntry e;
    const std::uint32_t n = r.u32();
    if (r.remaining() / 12 < n) throw FormatError(path + ": truncated ground-truth record");
    e.hits.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      Hit h;
      h.key = r.u64();
      h.distance = r.f32();
      e.hits.push_back(h);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace labeltree
