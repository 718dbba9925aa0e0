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

// labeltree command-line harness.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdio>
#include <cstring>
#include <functional>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace labeltree;
using namespace labeltree::cli;

namespace {

// The config file is read before flags are parsed so that flags override it.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
    if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
  }
  return {};
}

void tree_opts(CLI::App* c, RunConfig& cfg) {
  c->add_option("--branch-factor", cfg.tree.branch_factor, "k-means clusters per node")->capture_default_str();
  c->add_option("--leaf-capacity", cfg.tree.leaf_capacity, "maximum vectors per leaf at build")->capture_default_str();
  c->add_option("--max-depth", cfg.tree.max_depth, "tree depth limit, 0 = derive from id width")
      ->capture_default_str();
  c->add_option("--slot-bits", cfg.tree.slot_bits, "id bits reserved for leaf slots")->capture_default_str();
  c->add_option("--kmeans-iters", cfg.tree.kmeans_iters, "Lloyd iterations per split")->capture_default_str();
  c->add_option("--buffer-capacity", cfg.labels.buffer_capacity, "B_max, ids per buffer")->capture_default_str();
  c->add_option("--filter-mode", cfg.labels.filter_mode, "node filters: bloom or exact")
      ->check(CLI::IsMember({"bloom", "exact"}))
      ->capture_default_str();
  c->add_option("--bloom-fp", cfg.labels.bloom_fp_rate, "target Bloom false-positive rate")->capture_default_str();
  c->add_option("--bloom-expected", cfg.labels.bloom_expected_labels, "labels per filter, 0 = derive")
      ->capture_default_str();
  c->add_option("--rebuild-threshold", cfg.maintenance.rebuild_threshold, "update ratio that queues a rebuild")
      ->capture_default_str();
}

void search_opts(CLI::App* c, RunConfig& cfg, bool multi_ef) {
  c->add_option("-k,--k", cfg.search.k, "neighbors per query")->capture_default_str();
  auto* ef = c->add_option("--ef", cfg.search.ef, multi_ef ? "ef values to sweep (integers or inf)"
                                                             : "result set size (integer or inf)");
  if (multi_ef) ef->delimiter(',');
  ef->capture_default_str();
  c->add_option("--beam", cfg.search.beam_width, "beam width of the frontier descent")->capture_default_str();
  c->add_option("--alpha", cfg.search.alpha, "radius weight in the node score")->capture_default_str();
  c->add_option("--temp-cache", cfg.search.temp_cache, "cached temporary indexes, 0 = off")->capture_default_str();
  c->add_option("--readers", cfg.workload.readers, "concurrent search threads, 0 = single-threaded")
      ->capture_default_str();
}

void predicate_opts(CLI::App* c, RunConfig& cfg) {
  c->add_option("--label", cfg.io.label, "search a single label");
  c->add_option("--predicate", cfg.io.predicate, "predicate expression, e.g. \"(3 & 7) | !2\"");
  c->add_option("--predicates", cfg.io.predicates, "file with one predicate per line, cycled over queries");
}

void data_opts(CLI::App* c, RunConfig& cfg) {
  c->add_option("--format", cfg.io.format, "vector format: fvecs, bvecs, f32")->capture_default_str();
  c->add_option("--raw-dim", cfg.io.raw_dim, "dimension for f32 files");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"labeltree: filtered approximate nearest neighbor index harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());
  std::string config_path;
  app.add_option("--config", config_path, "TOML or JSON config file; flags override it");
  app.add_option("--seed", cfg.seed, "seed for every random stream")->capture_default_str();

  std::map<CLI::App*, std::function<int(const RunConfig&)>> handlers;

  auto* gen = app.add_subcommand("gen", "generate a synthetic labeled dataset and queries");
  gen->add_option("--n", cfg.workload.n, "vectors")->capture_default_str();
  gen->add_option("--dim", cfg.workload.dim, "dimension")->capture_default_str();
  gen->add_option("--levels", cfg.workload.levels, "selectivity levels, log-spaced")->capture_default_str();
  gen->add_option("--lo", cfg.workload.lo, "lowest selectivity")->capture_default_str();
  gen->add_option("--hi", cfg.workload.hi, "highest selectivity")->capture_default_str();
  gen->add_option("--labels-per-level", cfg.workload.labels_per_level, "labels per level")->capture_default_str();
  gen->add_flag("--correlated", cfg.workload.correlated, "cluster each label's members");
  gen->add_option("--queries", cfg.workload.queries, "query vectors")->capture_default_str();
  gen->add_option("--out-dir", cfg.io.out_dir, "output directory");
  data_opts(gen, cfg);
  handlers[gen] = cmd_gen;

  auto* build = app.add_subcommand("build", "build an index and write a snapshot");
  build->add_option("--data", cfg.io.data, "base vectors");
  build->add_option("--labels", cfg.io.labels, "label file, one line per vector");
  build->add_option("-o,--out", cfg.io.out, "snapshot path");
  data_opts(build, cfg);
  tree_opts(build, cfg);
  handlers[build] = cmd_build;

  auto* gt = app.add_subcommand("gt", "exact filtered ground truth by brute force");
  gt->add_option("--data", cfg.io.data, "base vectors");
  gt->add_option("--labels", cfg.io.labels, "label file");
  gt->add_option("--queries", cfg.io.queries, "query vectors");
  gt->add_option("-k,--k", cfg.search.k, "neighbors per query")->capture_default_str();
  gt->add_option("-o,--out", cfg.io.out, "ground-truth file");
  data_opts(gt, cfg);
  predicate_opts(gt, cfg);
  handlers[gt] = cmd_gt;

  auto* query = app.add_subcommand("query", "search and score against ground truth");
  query->add_option("--index", cfg.io.index, "snapshot path");
  query->add_option("--queries", cfg.io.queries, "query vectors");
  query->add_option("--gt", cfg.io.gt, "ground-truth file from gt");
  query->add_option("-o,--out", cfg.io.out, "per-query CSV");
  data_opts(query, cfg);
  predicate_opts(query, cfg);
  search_opts(query, cfg, false);
  handlers[query] = cmd_query;

  auto* sweep = app.add_subcommand("sweep", "recall/cost sweep over selectivity levels and ef");
  sweep->add_option("--index", cfg.io.index, "snapshot path");
  sweep->add_option("--data", cfg.io.data, "base vectors, for ground truth");
  sweep->add_option("--labels", cfg.io.labels, "label file, for ground truth and levels");
  sweep->add_option("--queries", cfg.io.queries, "query vectors");
  sweep->add_option("--queries-per-label", cfg.workload.queries, "queries used per label")->capture_default_str();
  sweep->add_option("-o,--out", cfg.io.out, "CSV path");
  data_opts(sweep, cfg);
  search_opts(sweep, cfg, true);
  handlers[sweep] = cmd_sweep;

  auto* upd = app.add_subcommand("update-bench", "random update workload with per-op latency");
  upd->add_option("--index", cfg.io.index, "snapshot path");
  upd->add_option("--ops", cfg.workload.ops, "operations")->capture_default_str();
  upd->add_option("--mix", cfg.workload.update_mix,
                  "weights of insert_vector, delete_vector, insert_label, delete_label")
      ->delimiter(',')
      ->expected(4)
      ->capture_default_str();
  upd->add_option("-o,--out", cfg.io.out, "per-op CSV");
  upd->add_option("--save-index", cfg.io.index_out, "write the updated index here");
  handlers[upd] = cmd_update_bench;

  auto* integ = app.add_subcommand("integrate", "embed a predicate as a virtual label");
  integ->add_option("--index", cfg.io.index, "snapshot path");
  integ->add_option("--predicate", cfg.io.predicate, "predicate expression");
  integ->add_option("-o,--out", cfg.io.out, "output snapshot");
  handlers[integ] = cmd_integrate;

  auto* reb = app.add_subcommand("rebuild", "rebuild queued subtrees or the whole tree");
  reb->add_option("--index", cfg.io.index, "snapshot path");
  reb->add_option("--mode", cfg.maintenance.rebuild_mode, "local or global")
      ->check(CLI::IsMember({"local", "global"}))
      ->capture_default_str();
  reb->add_option("--rebuild-threshold", cfg.maintenance.rebuild_threshold, "update ratio that queues a rebuild")
      ->capture_default_str();
  reb->add_option("-o,--out", cfg.io.out, "output snapshot");
  handlers[reb] = cmd_rebuild;

  for (auto& [sub, fn] : handlers) {
    sub->add_option("--config", config_path, "TOML or JSON config file; flags override it");
    sub->add_option("--seed", cfg.seed, "seed for every random stream")->capture_default_str();
  }

  try {
    if (const std::string path = find_config_arg(argc, argv); !path.empty()) load_config_file(path, cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "labeltree: %s\n", e.what());
    return 1;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto& [sub, fn] : handlers) {
    if (!sub->parsed()) continue;
    try {
      return fn(cfg);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "labeltree %s: %s\n", sub->get_name().c_str(), e.what());
      return 2;
    }
  }
  return 1;
}
