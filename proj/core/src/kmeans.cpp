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

#include "labeltree/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "labeltree/common.hpp"
#include "labeltree/rng.hpp"

namespace labeltree {
namespace {

double sqdist(const float* a, const float* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

class Lloyd {
 public:
  Lloyd(std::span<const float> points, std::size_t dim, std::size_t k)
      : pts_(points), dim_(dim), n_(points.size() / dim), k_(k),
        centroids_(k * dim), assign_(n_, 0), dist_(n_, 0.0) {}

  void seed_plus_plus(std::uint64_t seed) {
    auto rng = make_rng(seed, "kmeans++");
    std::uniform_int_distribution<std::size_t> first(0, n_ - 1);
    set_centroid_to_point(0, first(rng));
    std::vector<double> d2(n_);
    for (std::size_t i = 0; i < n_; ++i) d2[i] = sqdist(point(i), centroid(0), dim_);
    for (std::size_t c = 1; c < k_; ++c) {
      double total = 0.0;
      for (double v : d2) total += v;
      std::size_t chosen = 0;
      if (total <= 0.0) {
        std::uniform_int_distribution<std::size_t> any(0, n_ - 1);
        chosen = any(rng);
      } else {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng);
        chosen = n_ - 1;
        for (std::size_t i = 0; i < n_; ++i) {
          target -= d2[i];
          if (target < 0.0 && d2[i] > 0.0) {
            chosen = i;
            break;
          }
        }
      }
      set_centroid_to_point(c, chosen);
      for (std::size_t i = 0; i < n_; ++i) {
        d2[i] = std::min(d2[i], sqdist(point(i), centroid(c), dim_));
      }
    }
  }

  // Nearest-centroid assignment followed by empty-cluster repair.
  double assign_with_repair() {
    assign();
    for (int round = 0; round < 4 && repair(); ++round) assign();
    repair();
    double sse = 0.0;
    for (double d : dist_) sse += d;
    return sse;
  }

  void update() {
    std::vector<double> sums(k_ * dim_, 0.0);
    std::vector<std::size_t> counts(k_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t c = assign_[i];
      ++counts[c];
      const float* p = point(i);
      for (std::size_t d = 0; d < dim_; ++d) sums[c * dim_ + d] += p[d];
    }
    for (std::size_t c = 0; c < k_; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim_; ++d) {
        centroids_[c * dim_ + d] = static_cast<float>(sums[c * dim_ + d] / static_cast<double>(counts[c]));
      }
    }
  }

  const std::vector<std::uint32_t>& assignment() const { return assign_; }
  std::vector<float> take_centroids() { return std::move(centroids_); }

 private:
  const float* point(std::size_t i) const { return pts_.data() + i * dim_; }
  const float* centroid(std::size_t c) const { return centroids_.data() + c * dim_; }
  void set_centroid_to_point(std::size_t c, std::size_t i) {
    std::copy(point(i), point(i) + dim_, centroids_.begin() + static_cast<std::ptrdiff_t>(c * dim_));
  }

  void assign() {
    for (std::size_t i = 0; i < n_; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t c = 0; c < k_; ++c) {
        const double d = sqdist(point(i), centroid(c), dim_);
        if (d < best) {
          best = d;
          arg = static_cast<std::uint32_t>(c);
        }
      }
      assign_[i] = arg;
      dist_[i] = best;
    }
  }

  // Returns true if any cluster was empty.
  bool repair() {
    std::vector<std::size_t> counts(k_, 0);
    for (auto c : assign_) ++counts[c];
    bool any = false;
    for (std::size_t c = 0; c < k_; ++c) {
      if (counts[c] != 0) continue;
      any = true;
      std::size_t far = n_;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (counts[assign_[i]] > 1 && dist_[i] > far_d) {
          far_d = dist_[i];
          far = i;
        }
      }
      if (far == n_) break;  // k <= n guarantees a donor, but stay safe
      --counts[assign_[far]];
      assign_[far] = static_cast<std::uint32_t>(c);
      ++counts[c];
      dist_[far] = 0.0;
      set_centroid_to_point(c, far);
    }
    return any;
  }

  std::span<const float> pts_;
  std::size_t dim_;
  std::size_t n_;
  std::size_t k_;
  std::vector<float> centroids_;
  std::vector<std::uint32_t> assign_;
  std::vector<double> dist_;
};

}  // namespace

KMeansResult train_kmeans(std::span<const float> points, std::size_t dim, std::size_t k,
                          const KMeansOptions& options) {
  if (dim == 0 || points.empty() || points.size() % dim != 0) {
    throw Error("k-means needs a non-empty row-major point matrix");
  }
  const std::size_t n = points.size() / dim;
  if (k == 0) throw Error("k-means needs k >= 1");
  if (k > n) throw Error("k-means: k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " points");
  for (float v : points) {
    if (!std::isfinite(v)) throw Error("k-means: non-finite coordinate");
  }

  Lloyd lloyd(points, dim, k);
  lloyd.seed_plus_plus(options.seed);

  KMeansResult result;
  result.k = k;
  result.dim = dim;
  result.sse_history.push_back(lloyd.assign_with_repair());
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    const std::vector<std::uint32_t> previous = lloyd.assignment();
    lloyd.update();
    result.sse_history.push_back(lloyd.assign_with_repair());
    result.iterations = it;
    if (lloyd.assignment() == previous) break;
  }
  result.sse = result.sse_history.back();
  result.assignment = lloyd.assignment();
  result.centroids = lloyd.take_centroids();
  return result;
}

}  // namespace labeltree
