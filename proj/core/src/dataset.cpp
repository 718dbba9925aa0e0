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

#include "labeltree/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "labeltree/binary_io.hpp"

namespace labeltree {

namespace io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace io

void Dataset::validate() const {
  if (dim == 0) throw Error("dataset dimension must be positive");
  if (vectors.size() != keys.size() * dim) {
    throw Error("dataset has " + std::to_string(vectors.size()) + " floats for " +
                std::to_string(keys.size()) + " rows of dim " + std::to_string(dim));
  }
  std::unordered_set<ExternalKey> seen;
  seen.reserve(keys.size());
  for (ExternalKey k : keys) {
    if (!seen.insert(k).second) throw Error("duplicate external key " + std::to_string(k));
  }
}

void LabelAssignment::validate() const {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& s = sets[i];
    for (std::size_t j = 1; j < s.size(); ++j) {
      if (s[j - 1] >= s[j]) {
        throw Error("label set of vector " + std::to_string(i) + " is not sorted/unique");
      }
    }
  }
}

VectorFormat parse_vector_format(std::string_view name) {
  if (name == "fvecs") return VectorFormat::kFvecs;
  if (name == "bvecs") return VectorFormat::kBvecs;
  if (name == "raw-f32-le" || name == "raw") return VectorFormat::kRawF32;
  throw Error("unknown vector format '" + std::string(name) + "'");
}

std::string_view to_string(VectorFormat format) {
  switch (format) {
    case VectorFormat::kFvecs: return "fvecs";
    case VectorFormat::kBvecs: return "bvecs";
    case VectorFormat::kRawF32: return "raw-f32-le";
  }
  return "?";
}

namespace {

Dataset load_vecs(std::string_view bytes, bool byte_elems) {
  if (bytes.empty()) throw FormatError("empty vector file");
  const std::size_t elem = byte_elems ? 1 : 4;
  io::ByteReader in(bytes);
  Dataset ds;
  std::size_t row = 0;
  while (!in.done()) {
    if (in.remaining() < 4) throw FormatError("truncated dimension header in record " + std::to_string(row));
    const std::uint32_t d = in.u32();
    if (d == 0) throw FormatError("record " + std::to_string(row) + " declares dimension 0");
    if (ds.dim == 0) {
      ds.dim = d;
    } else if (d != ds.dim) {
      throw FormatError("record " + std::to_string(row) + " has dim " + std::to_string(d) +
                        ", expected " + std::to_string(ds.dim));
    }
    if (in.remaining() < static_cast<std::size_t>(d) * elem) {
      throw FormatError("record " + std::to_string(row) + " is shorter than its declared dim");
    }
    for (std::uint32_t j = 0; j < d; ++j) {
      ds.vectors.push_back(byte_elems ? static_cast<float>(in.u8()) : in.f32());
    }
    ds.keys.push_back(row++);
  }
  return ds;
}

}  // namespace

Dataset load_vectors(const std::filesystem::path& path, VectorFormat format, std::size_t raw_dim) {
  const std::string bytes = io::read_file(path);
  switch (format) {
    case VectorFormat::kFvecs: return load_vecs(bytes, false);
    case VectorFormat::kBvecs: return load_vecs(bytes, true);
    case VectorFormat::kRawF32: {
      if (raw_dim == 0) throw Error("raw-f32-le requires a dimension");
      if (bytes.empty()) throw FormatError("empty vector file");
      const std::size_t row_bytes = raw_dim * 4;
      if (bytes.size() % row_bytes != 0) {
        throw FormatError("raw file size " + std::to_string(bytes.size()) +
                          " is not a multiple of " + std::to_string(row_bytes));
      }
      Dataset ds;
      ds.dim = raw_dim;
      io::ByteReader in(bytes);
      const std::size_t n = bytes.size() / row_bytes;
      ds.vectors.reserve(n * raw_dim);
      for (std::size_t i = 0; i < n * raw_dim; ++i) ds.vectors.push_back(in.f32());
      ds.keys.resize(n);
      for (std::size_t i = 0; i < n; ++i) ds.keys[i] = i;
      return ds;
    }
  }
  throw Error("unsupported vector format");
}

void save_vectors(const std::filesystem::path& path, const Dataset& ds, VectorFormat format) {
  io::ByteWriter out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto r = ds.row(i);
    if (format != VectorFormat::kRawF32) out.u32(static_cast<std::uint32_t>(ds.dim));
    for (float v : r) {
      if (format == VectorFormat::kBvecs) {
        if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v)) {
          throw Error("bvecs can only store integers in [0, 255]");
        }
        out.u8(static_cast<std::uint8_t>(v));
      } else {
        out.f32(v);
      }
    }
  }
  io::write_file(path, out.data());
}

LabelAssignment load_labels(const std::filesystem::path& path, std::size_t n_vectors) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  LabelAssignment la;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LabelSet set;
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        if (tok.front() == '-' || tok.front() == '+') throw std::invalid_argument(tok);
        v = std::stoull(tok, &used, 10);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || v > 0xFFFFFFFFull) {
        throw FormatError("line " + std::to_string(la.sets.size() + 1) + ": invalid label '" + tok + "'");
      }
      set.push_back(static_cast<LabelId>(v));
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    la.sets.push_back(std::move(set));
  }
  if (la.sets.size() != n_vectors) {
    throw FormatError("label file has " + std::to_string(la.sets.size()) + " lines for " +
                      std::to_string(n_vectors) + " vectors");
  }
  return la;
}

void save_labels(const std::filesystem::path& path, const LabelAssignment& la) {
  std::string out;
  for (const auto& set : la.sets) {
    for (std::size_t j = 0; j < set.size(); ++j) {
      if (j) out.push_back(' ');
      out += std::to_string(set[j]);
    }
    out.push_back('\n');
  }
  io::write_file(path, out);
}

}  // namespace labeltree
