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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "labeltree/binary_io.hpp"

namespace fs = std::filesystem;
using namespace labeltree;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("lt_dataset_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path path(const std::string& name) const { return dir_ / name; }
  void write(const std::string& name, const std::string& data) const { io::write_file(path(name), data); }

  fs::path dir_;
};

std::string fvecs_record(std::int32_t dim, const std::vector<float>& values) {
  io::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(dim));
  for (float v : values) w.f32(v);
  return w.take();
}

}  // namespace

TEST_F(TempDir, FvecsTwoRecords) {
  write("a.fvecs", fvecs_record(4, {1, 2, 3, 4}) + fvecs_record(4, {5, 6, 7, 8}));
  Dataset ds = load_vectors(path("a.fvecs"), VectorFormat::kFvecs);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.dim, 4u);
  EXPECT_EQ(ds.row(1)[2], 7.0f);
  EXPECT_EQ(ds.keys, (std::vector<ExternalKey>{0, 1}));
}

TEST_F(TempDir, RawF32Size) {
  io::ByteWriter w;
  for (int i = 0; i < 6; ++i) w.f32(static_cast<float>(i));
  write("a.raw", w.data());
  Dataset ds = load_vectors(path("a.raw"), VectorFormat::kRawF32, 3);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.row(1)[0], 3.0f);
  EXPECT_THROW(load_vectors(path("a.raw"), VectorFormat::kRawF32, 4), FormatError);
  EXPECT_THROW(load_vectors(path("a.raw"), VectorFormat::kRawF32, 0), Error);
}

TEST_F(TempDir, FvecsShortRecordRejected) {
  write("bad.fvecs", fvecs_record(4, {1, 2, 3}));
  EXPECT_THROW(load_vectors(path("bad.fvecs"), VectorFormat::kFvecs), FormatError);
}

TEST_F(TempDir, FvecsInconsistentDimAndEmpty) {
  write("mixed.fvecs", fvecs_record(2, {1, 2}) + fvecs_record(3, {1, 2, 3}));
  EXPECT_THROW(load_vectors(path("mixed.fvecs"), VectorFormat::kFvecs), FormatError);
  write("empty.fvecs", "");
  EXPECT_THROW(load_vectors(path("empty.fvecs"), VectorFormat::kFvecs), FormatError);
  EXPECT_THROW(load_vectors(path("missing.fvecs"), VectorFormat::kFvecs), Error);
}

TEST_F(TempDir, RoundTripEveryFormat) {
  Dataset ds = lt_test::random_dataset(37, 5, 1);
  for (auto fmt : {VectorFormat::kFvecs, VectorFormat::kRawF32}) {
    save_vectors(path("rt"), ds, fmt);
    Dataset back = load_vectors(path("rt"), fmt, 5);
    EXPECT_EQ(back.vectors, ds.vectors);
    save_vectors(path("rt2"), back, fmt);
    EXPECT_EQ(io::read_file(path("rt")), io::read_file(path("rt2")));
  }
  Dataset bytes = ds;
  for (std::size_t i = 0; i < bytes.vectors.size(); ++i) bytes.vectors[i] = static_cast<float>(i % 256);
  save_vectors(path("rt.bvecs"), bytes, VectorFormat::kBvecs);
  EXPECT_EQ(load_vectors(path("rt.bvecs"), VectorFormat::kBvecs).vectors, bytes.vectors);
  bytes.vectors[0] = 0.5f;
  EXPECT_THROW(save_vectors(path("bad.bvecs"), bytes, VectorFormat::kBvecs), Error);
}

TEST(VectorFormatNames, Parse) {
  EXPECT_EQ(parse_vector_format("fvecs"), VectorFormat::kFvecs);
  EXPECT_EQ(parse_vector_format("bvecs"), VectorFormat::kBvecs);
  EXPECT_EQ(parse_vector_format("raw-f32-le"), VectorFormat::kRawF32);
  EXPECT_THROW(parse_vector_format("hdf5"), Error);
}

TEST_F(TempDir, LabelsSortDedup) {
  write("l.txt", "3 1 1\n\n7\n");
  LabelAssignment la = load_labels(path("l.txt"), 3);
  ASSERT_EQ(la.sets.size(), 3u);
  EXPECT_EQ(la.sets[0], (LabelSet{1, 3}));
  EXPECT_TRUE(la.sets[1].empty());
  EXPECT_EQ(la.sets[2], (LabelSet{7}));

  write("dup.txt", "2 2 2\n");
  EXPECT_EQ(load_labels(path("dup.txt"), 1).sets[0], (LabelSet{2}));
}

TEST_F(TempDir, LabelsLineCountAndTokens) {
  write("short.txt", "1\n2\n");
  EXPECT_THROW(load_labels(path("short.txt"), 3), FormatError);
  write("tok.txt", "1 x\n");
  EXPECT_THROW(load_labels(path("tok.txt"), 1), FormatError);
  write("neg.txt", "-1\n");
  EXPECT_THROW(load_labels(path("neg.txt"), 1), FormatError);
  write("crlf.txt", "4 2\r\n5\r\n");
  EXPECT_EQ(load_labels(path("crlf.txt"), 2).sets[0], (LabelSet{2, 4}));
}

TEST_F(TempDir, LabelsRoundTrip) {
  auto la = lt_test::random_labels(50, lt_test::mixed_probs(6), 3);
  save_labels(path("rt.txt"), la);
  EXPECT_EQ(load_labels(path("rt.txt"), 50).sets, la.sets);
}

TEST(Synthetic, ExactPopulation) {
  SelectivitySpec spec;
  spec.levels = {0.01};
  spec.labels_per_level = 10;
  spec.seed = 5;
  auto sd = generate_synthetic(1000, 4, spec);
  std::map<LabelId, std::size_t> counts;
  for (const auto& s : sd.labels.sets) {
    for (LabelId l : s) ++counts[l];
  }
  ASSERT_EQ(counts.size(), 10u);
  for (const auto& [l, c] : counts) EXPECT_EQ(c, 10u) << "label " << l;
}

TEST(Synthetic, Deterministic) {
  SelectivitySpec spec;
  spec.levels = {0.05, 0.2};
  spec.labels_per_level = 3;
  spec.seed = 11;
  auto a = generate_synthetic(500, 8, spec);
  auto b = generate_synthetic(500, 8, spec);
  EXPECT_EQ(a.data.vectors, b.data.vectors);
  EXPECT_EQ(a.labels.sets, b.labels.sets);
  spec.seed = 12;
  auto c = generate_synthetic(500, 8, spec);
  EXPECT_NE(a.data.vectors, c.data.vectors);
}

TEST(Synthetic, LogSpacedPopulations) {
  auto levels = log_spaced_levels(0.001, 0.2, 20);
  ASSERT_EQ(levels.size(), 20u);
  EXPECT_DOUBLE_EQ(levels.front(), 0.001);
  EXPECT_DOUBLE_EQ(levels.back(), 0.2);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    EXPECT_NEAR(std::log(levels[i] / levels[i - 1]), std::log(200.0) / 19.0, 1e-9);
  }
  SelectivitySpec spec;
  spec.levels = levels;
  spec.seed = 1;
  auto sd = generate_synthetic(100000, 2, spec);
  ASSERT_EQ(sd.label_info.size(), 20u);
  EXPECT_EQ(sd.label_info.front().population, 100u);
  EXPECT_EQ(sd.label_info.back().population, 20000u);
  std::vector<std::size_t> counts(20, 0);
  for (const auto& s : sd.labels.sets) {
    for (LabelId l : s) ++counts[l];
  }
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(counts[i], static_cast<std::size_t>(std::llround(levels[i] * 100000.0)));
  }
}

TEST(Synthetic, RejectsEmptyLevel) {
  SelectivitySpec spec;
  spec.levels = {0.0001};
  EXPECT_THROW(generate_synthetic(1000, 2, spec), Error);
  spec.levels = {1.5};
  EXPECT_THROW(generate_synthetic(1000, 2, spec), Error);
}

TEST(Synthetic, CorrelatedMembersCluster) {
  SelectivitySpec spec;
  spec.levels = {0.05};
  spec.labels_per_level = 2;
  spec.seed = 3;
  spec.correlated = true;
  auto sd = generate_synthetic(2000, 8, spec);
  // members of one label sit much closer to each other than random pairs
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < sd.labels.sets.size(); ++i) {
    if (!sd.labels.sets[i].empty() && sd.labels.sets[i][0] == 0) members.push_back(i);
  }
  ASSERT_EQ(members.size(), 100u);
  double spread = 0.0;
  for (std::size_t j = 0; j < sd.data.dim; ++j) {
    double m = 0.0, m2 = 0.0;
    for (auto i : members) {
      m += sd.data.row(i)[j];
      m2 += sd.data.row(i)[j] * sd.data.row(i)[j];
    }
    m /= members.size();
    spread += m2 / members.size() - m * m;
  }
  EXPECT_LT(spread / sd.data.dim, 0.5);
}

TEST(Queries, DistinctStream) {
  Dataset q1 = generate_queries(10, 4, 9);
  Dataset q2 = generate_queries(10, 4, 9);
  EXPECT_EQ(q1.vectors, q2.vectors);
  EXPECT_EQ(q1.size(), 10u);
}
