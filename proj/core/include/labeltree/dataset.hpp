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
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "labeltree/common.hpp"

namespace labeltree {

/// Row-major matrix of float vectors with one external key per row.
struct Dataset {
  std::size_t dim = 0;
  std::vector<float> vectors;
  std::vector<ExternalKey> keys;

  std::size_t size() const { return keys.size(); }
  bool empty() const { return keys.empty(); }
  std::span<const float> row(std::size_t i) const {
    return {vectors.data() + i * dim, dim};
  }

  /// Throws Error when rows are ragged or keys repeat.
  void validate() const;
};

/// One sorted label set per vector of the companion Dataset.
struct LabelAssignment {
  std::vector<LabelSet> sets;

  std::size_t size() const { return sets.size(); }
  void validate() const;
};

enum class VectorFormat { kFvecs, kBvecs, kRawF32 };

VectorFormat parse_vector_format(std::string_view name);
std::string_view to_string(VectorFormat format);

/// Loads vectors. `raw_dim` is required for kRawF32 (the sidecar dimension)
/// and ignored otherwise. Keys default to 0..n-1.
Dataset load_vectors(const std::filesystem::path& path, VectorFormat format,
                     std::size_t raw_dim = 0);

/// Writes vectors; kBvecs requires every coordinate to be an integer in
/// [0, 255].
void save_vectors(const std::filesystem::path& path, const Dataset& ds,
                  VectorFormat format);

/// Reads one whitespace-separated line of labels per vector. Sets are sorted
/// and deduplicated.
LabelAssignment load_labels(const std::filesystem::path& path, std::size_t n_vectors);
void save_labels(const std::filesystem::path& path, const LabelAssignment& la);

/// Selectivity levels, each populated by `labels_per_level` labels.
struct SelectivitySpec {
  std::vector<double> levels;
  std::size_t labels_per_level = 1;
  std::uint64_t seed = 0;
  /// Plant one Gaussian cluster per label and draw its members around it.
  bool correlated = false;

  void validate() const;
};

/// `count` fractions spaced evenly in log space over [lo, hi].
std::vector<double> log_spaced_levels(double lo, double hi, std::size_t count);

struct SyntheticLabel {
  LabelId label = 0;
  double level = 0.0;
  std::size_t population = 0;
};

struct SyntheticData {
  Dataset data;
  LabelAssignment labels;
  std::vector<SyntheticLabel> label_info;
};

/// Label ids are assigned level-major: level i, j-th label -> i * labels_per_level + j.
/// Every label of level s lands on exactly round(s * n) distinct vectors.
SyntheticData generate_synthetic(std::size_t n, std::size_t dim, const SelectivitySpec& spec);

/// i.i.d. standard normal vectors drawn from the (seed, "queries") stream.
Dataset generate_queries(std::size_t n, std::size_t dim, std::uint64_t seed);

}  // namespace labeltree
