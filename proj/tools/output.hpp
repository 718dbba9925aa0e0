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
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "run_config.hpp"

namespace labeltree::cli {

/// Output files are written under "<path>.partial" and renamed on commit().
/// Anything not committed is removed when the set goes out of scope, so a
/// failed command leaves no partial outputs behind.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet();

  /// Returns the temporary path to write `final_path` through.
  std::filesystem::path add(const std::filesystem::path& final_path);
  void commit();

 private:
  std::vector<std::filesystem::path> finals_;
  bool committed_ = false;
};

/// RFC 4180 CSV writer. Provenance goes into leading '#' comment lines.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
            const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t width_;
};

std::string csv_field(const std::string& s);
std::string fmt_double(double v);

/// Writes "<artifact>.meta.json" (through `outputs`) recording the version,
/// command, resolved config and any extra fields.
void write_sidecar(OutputSet& outputs, const std::filesystem::path& artifact, const std::string& command,
                   const RunConfig& cfg, const nlohmann::json& extra = nlohmann::json::object());

}  // namespace labeltree::cli
