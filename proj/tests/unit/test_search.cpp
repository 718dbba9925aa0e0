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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "labeltree/oracle.hpp"

using namespace labeltree;

namespace {

struct World {
  Dataset ds;
  LabelAssignment la;
  FilteredIndex index;
  Dataset queries;
};

World make_world(FilterMode mode, std::size_t n = 4000, std::uint64_t seed = 1) {
  World w;
  w.ds = lt_test::random_dataset(n, 8, seed);
  w.la = lt_test::random_labels(n, lt_test::mixed_probs(12), seed + 1);
  w.index = FilteredIndex::build(w.ds, w.la, lt_test::small_config(8, 24, 24, mode));
  w.queries = generate_queries(30, 8, seed + 2);
  return w;
}

std::set<ExternalKey> keys(const std::vector<Hit>& hits) {
  std::set<ExternalKey> out;
  for (const Hit& h : hits) out.insert(h.key);
  return out;
}

}  // namespace

TEST(Score, Reductions) {
  TreeNode n;
  n.centroid = {3.0f, 4.0f};
  n.mean_radius = 2.5f;
  std::vector<float> origin{0.0f, 0.0f};
  EXPECT_FLOAT_EQ(node_score(n, origin, 0.0f), 5.0f);
  EXPECT_FLOAT_EQ(node_score(n, n.centroid, 1.0f), -2.5f);
  EXPECT_FLOAT_EQ(node_score(n, origin, 1.0f), 2.5f);
}

TEST(Score, MatchesRecomputationFromMembers) {
  auto w = make_world(FilterMode::kExact, 1500);
  const BaseIndex& b = w.index.base();
  b.for_each_node([&](const TreeNode& n) {
    if (n.size == 0) return;
    std::vector<double> mean(8, 0.0);
    std::vector<std::vector<float>> members;
    b.for_each_live([&](VectorId, const Slot&, std::span<const float> v) {
      members.emplace_back(v.begin(), v.end());
    }, &n);
    for (auto& v : members) {
      for (int j = 0; j < 8; ++j) mean[j] += v[j];
    }
    for (double& m : mean) m /= members.size();
    double radius = 0.0;
    for (auto& v : members) {
      double d = 0.0;
      for (int j = 0; j < 8; ++j) d += (v[j] - mean[j]) * (v[j] - mean[j]);
      radius += std::sqrt(d);
    }
    radius /= members.size();
    double dq = 0.0;
    for (int j = 0; j < 8; ++j) dq += (mean[j] - w.queries.row(0)[j]) * (mean[j] - w.queries.row(0)[j]);
    const double want = std::sqrt(dq) - 0.7 * radius;
    EXPECT_NEAR(node_score(n, w.queries.row(0), 0.7f), want, 1e-5 * std::max(1.0, std::abs(want)));
  });
}

TEST(Recall, Formula) {
  GroundTruthEntry truth;
  for (ExternalKey k = 0; k < 10; ++k) truth.hits.push_back({k, static_cast<float>(k)});
  std::vector<Hit> same = truth.hits;
  EXPECT_DOUBLE_EQ(recall_at_k(same, truth, 10), 1.0);
  std::vector<Hit> disjoint;
  for (ExternalKey k = 100; k < 110; ++k) disjoint.push_back({k, 0.0f});
  EXPECT_DOUBLE_EQ(recall_at_k(disjoint, truth, 10), 0.0);
  std::vector<Hit> nine(truth.hits.begin(), truth.hits.begin() + 9);
  nine.push_back({999, 0.0f});
  EXPECT_DOUBLE_EQ(recall_at_k(nine, truth, 10), 0.9);
}

TEST(Recall, TiesAtKthCountAsHits) {
  GroundTruthEntry truth;
  truth.hits = {{1, 1.0f}, {2, 2.0f}, {3, 2.0f}};  // k = 2, tie expanded
  std::vector<Hit> r{{1, 1.0f}, {3, 2.0f}};
  EXPECT_DOUBLE_EQ(recall_at_k(r, truth, 2), 1.0);
}

TEST(SearchParams, Validation) {
  SearchParams p;
  EXPECT_NO_THROW(p.validate());
  p.ef = 5;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.k = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.beam_width = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.alpha = -1.0f;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Search, UnknownOrEmptyLabel) {
  auto w = make_world(FilterMode::kBloom, 800);
  auto r = w.index.search_label(w.queries.row(0), 12345, {});
  EXPECT_TRUE(r.hits.empty());
  EXPECT_EQ(r.stats.centroid_distances + r.stats.vector_distances + r.stats.nodes_popped, 0u);
  EXPECT_TRUE(w.index.beam_frontier(w.queries.row(0), 12345, 4, 1.0f).empty());
  std::vector<float> wrong(3, 0.0f);
  EXPECT_THROW(w.index.search_label(wrong, 0, {}), Error);
}

TEST(Search, SmallLabelReturnsAllInOrder) {
  auto ds = lt_test::random_dataset(1000, 4, 3);
  LabelAssignment la;
  la.sets.resize(1000);
  for (int i = 0; i < 7; ++i) la.sets[i * 101].push_back(5);
  auto index = FilteredIndex::build(ds, la, lt_test::small_config());
  auto q = generate_queries(1, 4, 4);
  SearchParams p;
  p.k = 10;
  p.ef = 16;
  auto r = index.search_label(q.row(0), 5, p);
  ASSERT_EQ(r.hits.size(), 7u);
  for (std::size_t i = 1; i < r.hits.size(); ++i) EXPECT_LE(r.hits[i - 1].distance, r.hits[i].distance);
  auto truth = exact_filtered_knn(ds, la, q.row(0), Predicate::label(5), 10);
  EXPECT_EQ(keys(r.hits), keys(truth.hits));
}

TEST(Search, CompletenessWithExactFilters) {
  auto w = make_world(FilterMode::kExact);
  SearchParams p;
  p.ef = SearchParams::kUnboundedEf;
  for (LabelId l = 0; l < 12; ++l) {
    for (std::size_t q = 0; q < w.queries.size(); ++q) {
      auto r = w.index.search_label(w.queries.row(q), l, p);
      auto truth = exact_filtered_knn(w.ds, w.la, w.queries.row(q), Predicate::label(l), p.k);
      ASSERT_DOUBLE_EQ(recall_at_k(r.hits, truth, p.k), 1.0) << "label " << l << " query " << q;
      for (std::size_t i = 0; i < r.hits.size(); ++i) {
        EXPECT_NEAR(r.hits[i].distance, truth.hits[i].distance, 1e-4);
      }
    }
  }
}

TEST(Search, HitsQualifyAndAscend) {
  auto w = make_world(FilterMode::kBloom);
  SearchParams p;
  p.ef = 32;
  for (LabelId l = 0; l < 12; ++l) {
    auto r = w.index.search_label(w.queries.row(l), l, p);
    for (std::size_t i = 0; i < r.hits.size(); ++i) {
      const auto& labels = w.la.sets[r.hits[i].key];
      EXPECT_TRUE(std::binary_search(labels.begin(), labels.end(), l));
      if (i > 0) EXPECT_LE(r.hits[i - 1].distance, r.hits[i].distance);
    }
  }
}

TEST(Search, BloomFalsePositivesDoNotChangeHits) {
  auto w = make_world(FilterMode::kBloom);
  FilteredIndex exact = FilteredIndex::build(w.ds, w.la, lt_test::small_config(8, 24, 24, FilterMode::kExact));
  SearchParams p;
  p.ef = SearchParams::kUnboundedEf;
  for (LabelId l = 0; l < 12; ++l) {
    auto a = w.index.search_label(w.queries.row(0), l, p);
    auto b = exact.search_label(w.queries.row(0), l, p);
    EXPECT_EQ(a.hits, b.hits);
    EXPECT_GE(a.stats.nodes_popped, b.stats.nodes_popped);
  }
}

TEST(Search, MonotoneInEf) {
  auto w = make_world(FilterMode::kBloom);
  const std::size_t efs[] = {10, 16, 32, 64, 128, 256, 1024};
  for (LabelId l = 0; l < 12; ++l) {
    for (std::size_t q = 0; q < w.queries.size(); ++q) {
      auto truth = exact_filtered_knn(w.ds, w.la, w.queries.row(q), Predicate::label(l), 10);
      double prev = -1.0;
      std::uint64_t prev_buffers = 0;
      for (std::size_t ef : efs) {
        SearchParams p;
        p.ef = ef;
        auto r = w.index.search_label(w.queries.row(q), l, p);
        const double rec = recall_at_k(r.hits, truth, 10);
        EXPECT_GE(rec, prev) << "label " << l << " query " << q << " ef " << ef;
        EXPECT_GE(r.stats.buffers_visited, prev_buffers);
        prev = rec;
        prev_buffers = r.stats.buffers_visited;
      }
    }
  }
}

TEST(BeamInit, SingleRootBuffer) {
  auto ds = lt_test::random_dataset(600, 4, 5);
  LabelAssignment la;
  la.sets.resize(600);
  la.sets[3] = {1};
  la.sets[300] = {1};
  auto index = FilteredIndex::build(ds, la, lt_test::small_config());
  auto q = generate_queries(1, 4, 1);
  auto f = index.beam_frontier(q.row(0), 1, 4, 1.0f);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0], &index.base().root());
}

TEST(BeamInit, WideBeamCoversAllLeaves) {
  auto w = make_world(FilterMode::kExact, 3000);
  for (LabelId l = 0; l < 12; ++l) {
    auto f = w.index.beam_frontier(w.queries.row(0), l, 1u << 20, 1.0f);
    std::set<const TreeNode*> got(f.begin(), f.end());
    std::set<const TreeNode*> hosts;
    for (const auto& [min, node] : w.index.registry().find(l)->hosts) hosts.insert(node);
    EXPECT_EQ(got, hosts) << "label " << l;
  }
}

// Replays the level-wise descent independently and compares frontier sets.
TEST(BeamInit, MatchesReplay) {
  auto w = make_world(FilterMode::kBloom, 4000, 9);
  for (LabelId l = 0; l < 12; ++l) {
    for (std::size_t q = 0; q < 5; ++q) {
      auto query = w.queries.row(q);
      auto score = [&](const TreeNode* n) { return node_score(*n, query, 1.0f); };
      auto less = [&](const TreeNode* a, const TreeNode* b) {
        return std::make_tuple(score(a), a->prefix, a->depth) < std::make_tuple(score(b), b->prefix, b->depth);
      };
      std::set<const TreeNode*> want;
      std::vector<const TreeNode*> beam{&w.index.base().root()};
      while (true) {
        std::vector<const TreeNode*> next;
        bool grew = false;
        for (const TreeNode* n : beam) {
          if (n->buffer(l)) {
            next.push_back(n);
            continue;
          }
          grew = true;
          for (const auto& c : n->children) {
            if (c->filter.contains(l)) next.push_back(c.get());
          }
        }
        if (!grew) break;
        std::sort(next.begin(), next.end(), less);
        for (std::size_t i = 4; i < next.size(); ++i) want.insert(next[i]);
        if (next.size() > 4) next.resize(4);
        beam = next;
      }
      want.insert(beam.begin(), beam.end());
      auto f = w.index.beam_frontier(query, l, 4, 1.0f);
      EXPECT_EQ(std::set<const TreeNode*>(f.begin(), f.end()), want);
      for (const TreeNode* n : f) EXPECT_TRUE(w.index.bloom_query(*n, l));
      EXPECT_FALSE(f.empty());
    }
  }
}
