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

#include "output.hpp"

#include <cstdio>
#include <system_error>

namespace labeltree::cli {

namespace fs = std::filesystem;

namespace {

fs::path partial_of(const fs::path& p) { return fs::path(p.string() + ".partial"); }

}  // namespace

OutputSet::~OutputSet() {
  if (committed_) return;
  for (const auto& f : finals_) {
    std::error_code ec;
    fs::remove(partial_of(f), ec);
  }
}

fs::path OutputSet::add(const fs::path& final_path) {
  if (final_path.empty()) throw Error("missing output path");
  if (final_path.has_parent_path()) fs::create_directories(final_path.parent_path());
  finals_.push_back(final_path);
  return partial_of(final_path);
}

void OutputSet::commit() {
  for (const auto& f : finals_) fs::rename(partial_of(f), f);
  committed_ = true;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& path, const std::string& command, const RunConfig& cfg,
                     const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path), width_(header.size()) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  out_ << "# labeltree " << version_string() << " " << command << "\n";
  out_ << "# config " << cfg.to_json().dump() << "\n";
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw Error("csv row has " + std::to_string(fields.size()) + " fields, expected " +
                                           std::to_string(width_));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\n";
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw Error("write failed: " + path_.string());
}

void write_sidecar(OutputSet& outputs, const fs::path& artifact, const std::string& command, const RunConfig& cfg,
                   const nlohmann::json& extra) {
  nlohmann::json doc{{"version", version_string()}, {"command", command}, {"config", cfg.to_json()}};
  for (const auto& [k, v] : extra.items()) doc[k] = v;
  const fs::path tmp = outputs.add(fs::path(artifact.string() + ".meta.json"));
  std::ofstream out(tmp);
  out << doc.dump(2) << "\n";
  if (!out) throw Error("write failed: " + tmp.string());
}

}  // namespace labeltree::cli
