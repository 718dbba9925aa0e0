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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <thread>

#include "labeltree/oracle.hpp"
#include "labeltree/rng.hpp"
#include "labeltree/snapshot.hpp"
#include "output.hpp"

namespace labeltree::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(std::string("missing required ") + flag);
}

Dataset load_data(const RunConfig& cfg, const std::string& path, const char* flag) {
  require(path, flag);
  return load_vectors(path, parse_vector_format(cfg.io.format), cfg.io.raw_dim);
}

/// One predicate per query, from --label, --predicate or a --predicates file
/// whose lines are cycled over the queries.
std::vector<Predicate> query_predicates(const RunConfig& cfg, std::size_t n) {
  const int given = (cfg.io.label >= 0) + !cfg.io.predicate.empty() + !cfg.io.predicates.empty();
  if (given != 1) throw Error("give exactly one of --label, --predicate, --predicates");
  std::vector<Predicate> lines;
  if (cfg.io.label >= 0) {
    lines.push_back(Predicate::label(static_cast<LabelId>(cfg.io.label)));
  } else if (!cfg.io.predicate.empty()) {
    lines.push_back(Predicate::parse(cfg.io.predicate));
  } else {
    std::ifstream in(cfg.io.predicates);
    if (!in) throw Error("cannot open predicate file " + cfg.io.predicates);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      lines.push_back(Predicate::parse(line));
    }
    if (lines.empty()) throw Error("predicate file " + cfg.io.predicates + " is empty");
  }
  std::vector<Predicate> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(lines[i % lines.size()]);
  return out;
}

double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

/// Runs fn(i) for i in [0, n) on `readers` threads (0 or 1 runs inline).
template <class F>
void run_parallel(std::size_t n, std::size_t readers, F&& fn) {
  if (readers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < readers; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
      } catch (...) {
        std::lock_guard g(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

std::string ef_label(std::size_t ef) {
  return ef == SearchParams::kUnboundedEf ? "inf" : std::to_string(ef);
}

void save_index_with_sidecar(OutputSet& outputs, const FilteredIndex& index, const std::string& path,
                             const std::string& command, const RunConfig& cfg, nlohmann::json extra = {}) {
  save_index(index, outputs.add(path));
  if (extra.is_null()) extra = nlohmann::json::object();
  extra["vectors"] = index.size();
  extra["labels"] = index.registry().labels().size();
  write_sidecar(outputs, path, command, cfg, extra);
}

}  // namespace

int cmd_gen(const RunConfig& cfg) {
  require(cfg.io.out_dir, "--out-dir");
  SelectivitySpec spec;
  spec.levels = log_spaced_levels(cfg.workload.lo, cfg.workload.hi, cfg.workload.levels);
  spec.labels_per_level = cfg.workload.labels_per_level;
  spec.correlated = cfg.workload.correlated;
  spec.seed = cfg.seed;
  const SyntheticData syn = generate_synthetic(cfg.workload.n, cfg.workload.dim, spec);
  const Dataset queries = generate_queries(cfg.workload.queries, cfg.workload.dim, cfg.seed);

  const fs::path dir(cfg.io.out_dir);
  const VectorFormat fmt = parse_vector_format(cfg.io.format);
  const std::string ext = fmt == VectorFormat::kRawF32 ? ".f32" : "." + std::string(to_string(fmt));
  OutputSet outputs;
  save_vectors(outputs.add(dir / ("base" + ext)), syn.data, fmt);
  save_vectors(outputs.add(dir / ("queries" + ext)), queries, fmt);
  save_labels(outputs.add(dir / "labels.txt"), syn.labels);
  nlohmann::json info = nlohmann::json::array();
  for (const auto& l : syn.label_info) {
    info.push_back({{"label", l.label}, {"level", l.level}, {"population", l.population}});
  }
  write_sidecar(outputs, dir / "labels.txt", "gen", cfg, {{"label_info", info}});
  outputs.commit();
  std::printf("wrote %zu vectors, %zu queries, %zu labels to %s\n", syn.data.size(), queries.size(),
              syn.label_info.size(), dir.string().c_str());
  return 0;
}

int cmd_build(const RunConfig& cfg) {
  require(cfg.io.out, "--out");
  const Dataset ds = load_data(cfg, cfg.io.data, "--data");
  require(cfg.io.labels, "--labels");
  const LabelAssignment la = load_labels(cfg.io.labels, ds.size());
  const auto t0 = Clock::now();
  FilteredIndex index = FilteredIndex::build(ds, la, cfg.index_config());
  const double secs = micros_since(t0) / 1e6;
  for (const auto& w : index.base().warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());

  std::size_t nodes = 0;
  index.base().for_each_node([&](const TreeNode&) { ++nodes; });
  OutputSet outputs;
  save_index_with_sidecar(outputs, index, cfg.io.out, "build", cfg,
                          {{"nodes", nodes},
                           {"bloom_bits", index.bloom_params().num_bits},
                           {"bloom_hashes", index.bloom_params().num_hashes}});
  outputs.commit();
  std::printf("built index over %zu vectors, %zu nodes, %zu labels in %.2f s\n", index.size(), nodes,
              index.registry().labels().size(), secs);
  return 0;
}

int cmd_gt(const RunConfig& cfg) {
  require(cfg.io.out, "--out");
  const Dataset ds = load_data(cfg, cfg.io.data, "--data");
  require(cfg.io.labels, "--labels");
  const LabelAssignment la = load_labels(cfg.io.labels, ds.size());
  const Dataset queries = load_data(cfg, cfg.io.queries, "--queries");
  const auto preds = query_predicates(cfg, queries.size());
  std::vector<GroundTruthEntry> truth(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    truth[q] = exact_filtered_knn(ds, la, queries.row(q), preds[q], cfg.search.k);
  }
  OutputSet outputs;
  save_ground_truth(outputs.add(cfg.io.out).string(), truth);
  write_sidecar(outputs, cfg.io.out, "gt", cfg, {{"queries", queries.size()}, {"k", cfg.search.k}});
  outputs.commit();
  std::printf("wrote ground truth for %zu queries to %s\n", truth.size(), cfg.io.out.c_str());
  return 0;
}

int cmd_query(const RunConfig& cfg) {
  require(cfg.io.index, "--index");
  require(cfg.io.gt, "--gt");
  require(cfg.io.out, "--out");
  if (cfg.search.ef.size() != 1) throw Error("query takes a single --ef value");
  const FilteredIndex index = load_index(cfg.io.index);
  const Dataset queries = load_data(cfg, cfg.io.queries, "--queries");
  const auto truth = load_ground_truth(cfg.io.gt);
  if (truth.size() != queries.size()) {
    throw Error("ground truth holds " + std::to_string(truth.size()) + " queries, query file " +
                std::to_string(queries.size()));
  }
  const auto preds = query_predicates(cfg, queries.size());
  const SearchParams params = cfg.search_params(cfg.search.ef.front());
  const bool by_label = cfg.io.label >= 0;

  std::vector<SearchResult> results(queries.size());
  std::vector<double> latency(queries.size());
  run_parallel(queries.size(), cfg.workload.readers, [&](std::size_t q) {
    const auto t0 = Clock::now();
    results[q] = by_label ? index.search_label(queries.row(q), static_cast<LabelId>(cfg.io.label), params)
                          : index.search_predicate(queries.row(q), preds[q], params);
    latency[q] = micros_since(t0);
  });

  OutputSet outputs;
  CsvWriter csv(outputs.add(cfg.io.out), "query", cfg,
                {"query", "predicate", "k", "ef", "recall_at_k", "latency_us", "centroid_distances",
                 "vector_distances", "buffers_visited", "hits"});
  double total = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const double r = recall_at_k(results[q].hits, truth[q], params.k);
    total += r;
    const auto& s = results[q].stats;
    csv.row({std::to_string(q), by_label ? std::to_string(cfg.io.label) : preds[q].to_string(),
             std::to_string(params.k), ef_label(params.ef), fmt_double(r), fmt_double(latency[q]),
             std::to_string(s.centroid_distances), std::to_string(s.vector_distances),
             std::to_string(s.buffers_visited), std::to_string(results[q].hits.size())});
  }
  csv.close();
  outputs.commit();
  std::printf("mean recall@%zu %.6f over %zu queries\n", params.k, queries.empty() ? 1.0 : total / queries.size(),
              queries.size());
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  require(cfg.io.index, "--index");
  require(cfg.io.out, "--out");
  const FilteredIndex index = load_index(cfg.io.index);
  const Dataset ds = load_data(cfg, cfg.io.data, "--data");
  require(cfg.io.labels, "--labels");
  const LabelAssignment la = load_labels(cfg.io.labels, ds.size());
  const Dataset all_queries = load_data(cfg, cfg.io.queries, "--queries");
  const std::size_t nq = std::min(all_queries.size(), cfg.workload.queries);
  if (nq == 0) throw Error("sweep needs at least one query");

  // selectivity level -> labels of that population
  std::map<std::size_t, std::vector<LabelId>> by_population;
  {
    std::map<LabelId, std::size_t> pop;
    for (const auto& s : la.sets) {
      for (LabelId l : s) ++pop[l];
    }
    for (const auto& [l, c] : pop) by_population[c].push_back(l);
  }
  std::vector<std::size_t> efs;
  for (const auto& e : cfg.search.ef) efs.push_back(parse_ef(e));

  OutputSet outputs;
  CsvWriter csv(outputs.add(cfg.io.out), "sweep", cfg,
                {"selectivity", "labels", "queries", "ef", "recall_at_k", "mean_latency_us", "p99_latency_us",
                 "centroid_distances", "vector_distances", "buffers_visited", "oracle_distances"});
  for (const auto& [population, labels] : by_population) {
    std::vector<std::pair<LabelId, std::size_t>> work;  // (label, query)
    for (LabelId l : labels) {
      for (std::size_t q = 0; q < nq; ++q) work.emplace_back(l, q);
    }
    std::vector<GroundTruthEntry> truth(work.size());
    std::uint64_t oracle = 0;
    for (std::size_t i = 0; i < work.size(); ++i) {
      truth[i] = exact_filtered_knn(ds, la, all_queries.row(work[i].second), Predicate::label(work[i].first),
                                    cfg.search.k, &oracle);
    }
    for (std::size_t ef : efs) {
      SearchParams params = cfg.search_params(ef_label(ef));
      std::vector<SearchResult> results(work.size());
      std::vector<double> latency(work.size());
      run_parallel(work.size(), cfg.workload.readers, [&](std::size_t i) {
        const auto t0 = Clock::now();
        results[i] = index.search_label(all_queries.row(work[i].second), work[i].first, params);
        latency[i] = micros_since(t0);
      });
      double recall = 0, lat = 0, cd = 0, vd = 0, bv = 0;
      for (std::size_t i = 0; i < work.size(); ++i) {
        recall += recall_at_k(results[i].hits, truth[i], params.k);
        lat += latency[i];
        cd += static_cast<double>(results[i].stats.centroid_distances);
        vd += static_cast<double>(results[i].stats.vector_distances);
        bv += static_cast<double>(results[i].stats.buffers_visited);
      }
      const double n = static_cast<double>(work.size());
      csv.row({fmt_double(static_cast<double>(population) / static_cast<double>(ds.size())),
               std::to_string(labels.size()), std::to_string(work.size()), ef_label(ef), fmt_double(recall / n),
               fmt_double(lat / n), fmt_double(percentile(latency, 0.99)), fmt_double(cd / n), fmt_double(vd / n),
               fmt_double(bv / n), fmt_double(static_cast<double>(oracle) / n)});
    }
  }
  csv.close();
  outputs.commit();
  std::printf("swept %zu selectivity levels x %zu ef values\n", by_population.size(), efs.size());
  return 0;
}

int cmd_update_bench(const RunConfig& cfg) {
  require(cfg.io.index, "--index");
  require(cfg.io.out, "--out");
  FilteredIndex index = load_index(cfg.io.index);
  const auto& mix = cfg.workload.update_mix;
  if (mix.size() != 4) throw Error("update_mix needs four weights");
  std::discrete_distribution<int> pick_op(mix.begin(), mix.end());
  auto rng = make_rng(cfg.seed, "update-bench");
  std::normal_distribution<float> normal;

  std::vector<ExternalKey> live;
  std::vector<LabelId> real_labels;
  for (const auto& [k, id] : index.base().key_map()) live.push_back(k);
  for (const auto& [l, e] : index.registry().labels()) {
    if (l < kFirstVirtualLabel) real_labels.push_back(l);
  }
  std::sort(live.begin(), live.end());
  if (real_labels.empty()) real_labels.push_back(0);
  ExternalKey next_key = live.empty() ? 0 : live.back() + 1;

  static const char* kNames[] = {"insert_vector", "delete_vector", "insert_label", "delete_label"};
  OutputSet outputs;
  CsvWriter csv(outputs.add(cfg.io.out), "update-bench", cfg, {"op", "type", "key", "label", "latency_us"});
  std::map<int, std::vector<double>> per_type;
  std::size_t skipped = 0;
  for (std::size_t t = 0; t < cfg.workload.ops; ++t) {
    int type = pick_op(rng);
    if (live.empty()) type = 0;
    std::uniform_int_distribution<std::size_t> pick(0, live.empty() ? 0 : live.size() - 1);
    const std::size_t slot = pick(rng);
    LabelId label = real_labels[std::uniform_int_distribution<std::size_t>(0, real_labels.size() - 1)(rng)];
    ExternalKey key = 0;
    double us = 0.0;
    bool done = true;
    if (type == 0) {
      std::vector<float> x(index.dim());
      for (float& v : x) v = normal(rng);
      key = next_key++;
      const auto t0 = Clock::now();
      index.insert_vector(key, x);
      us = micros_since(t0);
      live.push_back(key);
    } else if (type == 1) {
      key = live[slot];
      const auto t0 = Clock::now();
      index.delete_vector(key);
      us = micros_since(t0);
      live[slot] = live.back();
      live.pop_back();
    } else {
      key = live[slot];
      // deletes look for a labeled vector, a bounded number of tries
      for (int tries = 0; type == 3 && tries < 64 && index.base().slot(*index.base().find(key)).labels.empty();
           ++tries) {
        key = live[pick(rng)];
      }
      const auto& labels = index.base().slot(*index.base().find(key)).labels;
      if (type == 3 && !labels.empty()) label = labels[label % labels.size()];
      const bool has = std::binary_search(labels.begin(), labels.end(), label);
      if (has != (type == 3)) {
        done = false;
      } else {
        const auto t0 = Clock::now();
        if (type == 2) {
          index.insert_label(key, label);
        } else {
          index.delete_label(key, label);
        }
        us = micros_since(t0);
      }
    }
    if (!done) {
      ++skipped;
      continue;
    }
    per_type[type].push_back(us);
    csv.row({std::to_string(t), kNames[type], std::to_string(key), type >= 2 ? std::to_string(label) : "",
             fmt_double(us)});
  }
  csv.close();
  if (!cfg.io.index_out.empty()) save_index_with_sidecar(outputs, index, cfg.io.index_out, "update-bench", cfg);
  outputs.commit();
  for (const auto& [type, v] : per_type) {
    double sum = 0;
    for (double x : v) sum += x;
    std::printf("%-14s %8zu ops  mean %9.2f us  p99 %9.2f us\n", kNames[type], v.size(), sum / v.size(),
                percentile(v, 0.99));
  }
  const auto& c = index.counters();
  std::printf("flushes %llu, merges %llu, flush/merge distance computations %llu, queued rebuilds %zu, "
              "skipped ops %zu\n",
              static_cast<unsigned long long>(c.flushes), static_cast<unsigned long long>(c.merges),
              static_cast<unsigned long long>(c.flush_merge_distance_computations), index.rebuild_queue().size(),
              skipped);
  return 0;
}

int cmd_integrate(const RunConfig& cfg) {
  require(cfg.io.index, "--index");
  require(cfg.io.out, "--out");
  require(cfg.io.predicate, "--predicate");
  FilteredIndex index = load_index(cfg.io.index);
  const Predicate pred = Predicate::parse(cfg.io.predicate);
  const LabelId v = index.integrate_as_virtual_label(pred);
  OutputSet outputs;
  save_index_with_sidecar(outputs, index, cfg.io.out, "integrate", cfg,
                          {{"virtual_label", v}, {"predicate", pred.normalized()},
                           {"members", index.registry().count(v)}});
  outputs.commit();
  std::printf("%u\n", v);
  return 0;
}

int cmd_rebuild(const RunConfig& cfg) {
  require(cfg.io.index, "--index");
  require(cfg.io.out, "--out");
  FilteredIndex index = load_index(cfg.io.index);
  const std::string& mode = cfg.maintenance.rebuild_mode;
  std::size_t queued = 0;
  if (mode == "local") {
    // the queue is not persisted; recover it from the stored update counters
    std::vector<const TreeNode*> nodes;
    index.base().for_each_node([&](const TreeNode& n) { nodes.push_back(&n); });
    for (const TreeNode* n : nodes) queued += index.maybe_enqueue_rebuild(*n);
    index.run_rebuilds(RebuildMode::kLocal, cfg.seed);
  } else if (mode == "global") {
    index.run_rebuilds(RebuildMode::kGlobal, cfg.seed);
  } else {
    throw Error("rebuild mode must be 'local' or 'global', got '" + mode + "'");
  }
  OutputSet outputs;
  save_index_with_sidecar(outputs, index, cfg.io.out, "rebuild", cfg, {{"mode", mode}, {"queued", queued}});
  outputs.commit();
  const auto& c = index.counters();
  std::printf("%s rebuild: %llu local, %llu global subtree rebuilds\n", mode.c_str(),
              static_cast<unsigned long long>(c.local_rebuilds), static_cast<unsigned long long>(c.global_rebuilds));
  return 0;
}

}  // namespace labeltree::cli
