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

#include <benchmark/benchmark.h>

#include <random>

#include "labeltree/index.hpp"
#include "labeltree/oracle.hpp"
#include "labeltree/rng.hpp"

using namespace labeltree;

namespace {

constexpr std::size_t kN = 20000;
constexpr std::size_t kDim = 16;
constexpr std::size_t kLevels = 20;

struct Fixture {
  SyntheticData syn;
  Dataset queries;
  FilteredIndex index;

  Fixture() {
    SelectivitySpec spec;
    spec.levels = log_spaced_levels(0.001, 0.2, kLevels);
    spec.seed = 1;
    syn = generate_synthetic(kN, kDim, spec);
    queries = generate_queries(256, kDim, 1);
    index = FilteredIndex::build(syn.data, syn.labels, config());
  }

  static IndexConfig config() {
    IndexConfig cfg;
    cfg.tree.branch_factor = 16;
    cfg.tree.leaf_capacity = 64;
    cfg.buffer_capacity = 64;
    cfg.seed = 1;
    return cfg;
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_Build(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto index = FilteredIndex::build(f.syn.data, f.syn.labels, Fixture::config());
    benchmark::DoNotOptimize(index.size());
  }
}
BENCHMARK(BM_Build)->Unit(benchmark::kMillisecond);

// arg 0: label (selectivity level), arg 1: ef
void BM_SearchLabel(benchmark::State& state) {
  auto& f = fixture();
  SearchParams p;
  p.ef = static_cast<std::size_t>(state.range(1));
  const auto label = static_cast<LabelId>(state.range(0));
  std::size_t q = 0;
  std::uint64_t dists = 0;
  for (auto _ : state) {
    auto res = f.index.search_label(f.queries.row(q++ % f.queries.size()), label, p);
    dists += res.stats.vector_distances;
    benchmark::DoNotOptimize(res.hits.data());
  }
  state.counters["selectivity"] = f.syn.label_info[label].level;
  state.counters["vector_distances"] = benchmark::Counter(static_cast<double>(dists), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_SearchLabel)->ArgsProduct({{0, 5, 10, 15, 19}, {64, 256, 1024}})->Unit(benchmark::kMicrosecond);

void BM_Prefilter(benchmark::State& state) {
  auto& f = fixture();
  const auto label = static_cast<LabelId>(state.range(0));
  std::size_t q = 0;
  for (auto _ : state) {
    auto gt = exact_filtered_knn(f.syn.data, f.syn.labels, f.queries.row(q++ % f.queries.size()),
                                 Predicate::label(label), 10);
    benchmark::DoNotOptimize(gt.hits.data());
  }
  state.counters["selectivity"] = f.syn.label_info[label].level;
}
BENCHMARK(BM_Prefilter)->Arg(0)->Arg(5)->Arg(10)->Arg(15)->Arg(19)->Unit(benchmark::kMicrosecond);

void BM_SearchPredicate(benchmark::State& state) {
  auto& f = fixture();
  const Predicate pred = Predicate::parse(state.range(0) == 0 ? "15 & 19" : "(12 | 13) & !19");
  SearchParams p;
  p.ef = 128;
  std::size_t q = 0;
  for (auto _ : state) {
    auto res = f.index.search_predicate(f.queries.row(q++ % f.queries.size()), pred, p);
    benchmark::DoNotOptimize(res.hits.data());
  }
}
BENCHMARK(BM_SearchPredicate)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_TempIndexBuild(benchmark::State& state) {
  auto& f = fixture();
  const auto ids = f.index.eval_predicate(Predicate::label(static_cast<LabelId>(state.range(0))));
  for (auto _ : state) {
    auto t = f.index.build_temp_index(ids);
    benchmark::DoNotOptimize(t.nodes().data());
  }
  state.counters["qualified"] = static_cast<double>(ids.size());
}
BENCHMARK(BM_TempIndexBuild)->Arg(5)->Arg(15)->Arg(19)->Unit(benchmark::kMicrosecond);

// insert then delete the same (vector, label) pair so the index stays put
void BM_LabelInsertDelete(benchmark::State& state) {
  auto& f = fixture();
  const auto label = static_cast<LabelId>(state.range(0));
  auto rng = make_rng(3, "bench-labels");
  std::uniform_int_distribution<std::size_t> pick(0, kN - 1);
  for (auto _ : state) {
    const std::size_t r = pick(rng);
    const auto& set = f.syn.labels.sets[r];
    if (std::binary_search(set.begin(), set.end(), label)) continue;
    const ExternalKey key = f.syn.data.keys[r];
    f.index.insert_label(key, label);
    f.index.delete_label(key, label);
  }
}
BENCHMARK(BM_LabelInsertDelete)->Arg(0)->Arg(10)->Arg(19)->Unit(benchmark::kMicrosecond);

void BM_VectorInsertDelete(benchmark::State& state) {
  auto& f = fixture();
  ExternalKey key = 1ull << 40;
  std::size_t q = 0;
  for (auto _ : state) {
    f.index.insert_vector(key, f.queries.row(q++ % f.queries.size()));
    f.index.delete_vector(key++);
  }
}
BENCHMARK(BM_VectorInsertDelete)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
