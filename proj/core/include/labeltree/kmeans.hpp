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

namespace labeltree {

struct KMeansOptions {
  std::size_t max_iters = 25;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<float> centroids;          // k x dim
  std::vector<std::uint32_t> assignment;  // one cluster per point
  double sse = 0.0;
  std::size_t iterations = 0;
  /// SSE after every assignment step; [0] is the assignment to the seeds.
  std::vector<double> sse_history;

  std::span<const float> centroid(std::size_t c) const {
    return {centroids.data() + c * dim, dim};
  }
};

/// Lloyd's algorithm with k-means++ seeding over row-major `points`.
/// Stops at `max_iters` or when the assignment no longer changes. Empty
/// clusters are repaired by moving the point farthest from its centroid.
/// Ties between equidistant centroids go to the lowest index.
KMeansResult train_kmeans(std::span<const float> points, std::size_t dim, std::size_t k,
                          const KMeansOptions& options = {});

}  // namespace labeltree
