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

#include "run_config.hpp"

#include <fstream>

#include "toml.hpp"

#ifndef LABELTREE_VERSION_STRING
#define LABELTREE_VERSION_STRING "unknown"
#endif

namespace labeltree::cli {

using nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TreeSection, branch_factor, leaf_capacity, max_depth, slot_bits,
                                                kmeans_iters)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LabelSection, buffer_capacity, filter_mode, bloom_fp_rate,
                                                bloom_expected_labels, bloom_seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SearchSection, k, ef, beam_width, alpha, temp_cache)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MaintenanceSection, rebuild_threshold, rebuild_mode)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(WorkloadSection, n, dim, levels, lo, hi, labels_per_level,
                                                correlated, queries, ops, readers, update_mix)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(IoSection, data, labels, queries, format, raw_dim, index, gt, out,
                                                out_dir, index_out, predicate, predicates, label)

std::string version_string() { return LABELTREE_VERSION_STRING; }

IndexConfig RunConfig::index_config() const {
  IndexConfig c;
  c.tree.branch_factor = tree.branch_factor;
  c.tree.leaf_capacity = tree.leaf_capacity;
  c.tree.max_depth = tree.max_depth;
  c.tree.slot_bits = tree.slot_bits;
  c.tree.kmeans_iters = tree.kmeans_iters;
  c.buffer_capacity = labels.buffer_capacity;
  if (labels.filter_mode == "bloom") {
    c.filter_mode = FilterMode::kBloom;
  } else if (labels.filter_mode == "exact") {
    c.filter_mode = FilterMode::kExact;
  } else {
    throw Error("filter_mode must be 'bloom' or 'exact', got '" + labels.filter_mode + "'");
  }
  c.bloom_fp_rate = labels.bloom_fp_rate;
  c.bloom_expected_labels = labels.bloom_expected_labels;
  c.bloom_seed = labels.bloom_seed;
  c.rebuild_threshold = maintenance.rebuild_threshold;
  c.temp_cache_capacity = search.temp_cache;
  c.seed = seed;
  c.validate();
  return c;
}

std::size_t parse_ef(const std::string& text) {
  if (text == "inf") return SearchParams::kUnboundedEf;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-') {
    throw Error("ef must be a positive integer or 'inf', got '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

SearchParams RunConfig::search_params(const std::string& ef) const {
  SearchParams p;
  p.k = search.k;
  p.ef = parse_ef(ef);
  p.beam_width = search.beam_width;
  p.alpha = search.alpha;
  p.validate();
  return p;
}

json RunConfig::to_json() const {
  return json{{"tree", tree},
              {"labels", labels},
              {"search", search},
              {"maintenance", maintenance},
              {"workload", workload},
              {"io", io},
              {"seed", seed}};
}

namespace {

json toml_to_json(const toml::node& node) {
  if (auto t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (auto a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (auto v = node.as_string()) return v->get();
  if (auto v = node.as_integer()) return v->get();
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_boolean()) return v->get();
  throw Error("unsupported TOML value type");
}

template <class T>
void merge_section(const json& doc, const char* name, T& section) {
  if (!doc.contains(name)) return;
  const json& src = doc.at(name);
  if (!src.is_object()) throw Error(std::string("config section '") + name + "' must be a table");
  json current = section;
  for (const auto& [k, v] : src.items()) {
    if (!current.contains(k)) throw Error(std::string("unknown config key '") + name + "." + k + "'");
    current[k] = v;
  }
  section = current.get<T>();
}

}  // namespace

void load_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  json doc;
  const std::string ext = path.extension().string();
  try {
    if (ext == ".toml") {
      doc = toml_to_json(toml::parse_file(path.string()));
    } else if (ext == ".json") {
      std::ifstream in(path);
      if (!in) throw Error("cannot open config file " + path.string());
      doc = json::parse(in);
    } else {
      throw Error("config file must end in .toml or .json: " + path.string());
    }
    static const char* kSections[] = {"tree", "labels", "search", "maintenance", "workload", "io", "seed"};
    for (const auto& [k, v] : doc.items()) {
      if (std::find(std::begin(kSections), std::end(kSections), k) == std::end(kSections)) {
        throw Error("unknown config section '" + k + "'");
      }
    }
    merge_section(doc, "tree", cfg.tree);
    merge_section(doc, "labels", cfg.labels);
    merge_section(doc, "search", cfg.search);
    merge_section(doc, "maintenance", cfg.maintenance);
    merge_section(doc, "workload", cfg.workload);
    merge_section(doc, "io", cfg.io);
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const toml::parse_error& e) {
    throw Error("bad TOML in " + path.string() + ": " + std::string(e.description()));
  } catch (const json::exception& e) {
    throw Error("bad config in " + path.string() + ": " + e.what());
  }
}

}  // namespace labeltree::cli
