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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "labeltree/dataset.hpp"
#include "labeltree/rng.hpp"

namespace labeltree {

void SelectivitySpec::validate() const {
  if (levels.empty()) throw Error("selectivity spec has no levels");
  if (labels_per_level == 0) throw Error("labels_per_level must be positive");
  for (double s : levels) {
    if (!(s > 0.0 && s <= 1.0)) throw Error("selectivity level " + std::to_string(s) + " outside (0, 1]");
  }
}

std::vector<double> log_spaced_levels(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (!(lo > 0.0) || !(hi >= lo)) throw Error("log-spaced levels need 0 < lo <= hi");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

void fill_normal(std::vector<float>& out, std::mt19937_64& rng) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  for (float& v : out) v = normal(rng);
}

}  // namespace

SyntheticData generate_synthetic(std::size_t n, std::size_t dim, const SelectivitySpec& spec) {
  spec.validate();
  if (n == 0 || dim == 0) throw Error("synthetic data needs n > 0 and dim > 0");

  SyntheticData out;
  out.data.dim = dim;
  out.data.vectors.resize(n * dim);
  out.data.keys.resize(n);
  std::iota(out.data.keys.begin(), out.data.keys.end(), ExternalKey{0});
  {
    auto rng = make_rng(spec.seed, "vectors");
    fill_normal(out.data.vectors, rng);
  }

  out.labels.sets.assign(n, {});
  std::vector<std::uint32_t> perm(n);
  for (std::size_t li = 0; li < spec.levels.size(); ++li) {
    const double s = spec.levels[li];
    const auto population = static_cast<std::size_t>(std::llround(s * static_cast<double>(n)));
    if (population == 0) {
      throw Error("selectivity " + std::to_string(s) + " rounds to zero vectors at n=" + std::to_string(n));
    }
    for (std::size_t j = 0; j < spec.labels_per_level; ++j) {
      const auto label = static_cast<LabelId>(li * spec.labels_per_level + j);
      auto rng = make_rng(spec.seed, "labels", label);
      // Partial Fisher-Yates: the first `population` entries are a uniform sample.
      std::iota(perm.begin(), perm.end(), 0u);
      for (std::size_t i = 0; i < population; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(perm[i], perm[pick(rng)]);
      }
      std::vector<std::uint32_t> members(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(population));
      std::sort(members.begin(), members.end());
      for (std::uint32_t m : members) out.labels.sets[m].push_back(label);

      if (spec.correlated) {
        auto crng = make_rng(spec.seed, "label-centers", label);
        std::vector<float> center(dim);
        fill_normal(center, crng);
        std::normal_distribution<float> noise(0.0f, 0.25f);
        for (std::uint32_t m : members) {
          float* row = out.data.vectors.data() + static_cast<std::size_t>(m) * dim;
          for (std::size_t d = 0; d < dim; ++d) row[d] = center[d] + noise(crng);
        }
      }
      out.label_info.push_back({label, s, population});
    }
  }
  // labels were appended in ascending id order, so sets are already sorted
  return out;
}

Dataset generate_queries(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Dataset q;
  q.dim = dim;
  q.vectors.resize(n * dim);
  q.keys.resize(n);
  std::iota(q.keys.begin(), q.keys.end(), ExternalKey{0});
  auto rng = make_rng(seed, "queries");
  fill_normal(q.vectors, rng);
  return q;
}

}  // namespace labeltree
