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

#include <filesystem>
#include <string>

#include "labeltree/index.hpp"

namespace labeltree {

inline constexpr char kSnapshotMagic[4] = {'C', 'U', 'R', '2'};
inline constexpr std::uint16_t kSnapshotVersion = 1;

/// Serializes the whole index (tree, slots, buffers, filters). The rebuild
/// queue and maintenance counters are not persisted.
std::string serialize_index(const FilteredIndex& index);
/// Throws FormatError on bad magic, unsupported version, truncation or
/// structurally inconsistent node records.
FilteredIndex deserialize_index(std::string_view bytes);

void save_index(const FilteredIndex& index, const std::filesystem::path& path);
FilteredIndex load_index(const std::filesystem::path& path);

}  // namespace labeltree
