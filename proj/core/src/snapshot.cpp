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

#include "labeltree/snapshot.hpp"

#include "labeltree/binary_io.hpp"

namespace labeltree {

namespace {

void write_node(io::ByteWriter& w, const TreeNode& n, std::size_t dim) {
  w.u64(n.prefix);
  w.u32(n.depth);
  w.u32(n.branch);
  w.u32(static_cast<std::uint32_t>(n.children.size()));
  w.u64(n.size);
  w.u64(n.update_count);
  w.f32(n.mean_radius);
  for (float c : n.centroid) w.f32(c);

  w.u32(static_cast<std::uint32_t>(n.slots.size()));
  for (std::size_t s = 0; s < n.slots.size(); ++s) {
    const Slot& slot = n.slots[s];
    w.u64(slot.key);
    w.u8(slot.live ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(slot.labels.size()));
    for (LabelId l : slot.labels) w.u32(l);
    for (float v : n.slot_vector(s, dim)) w.f32(v);
  }

  w.u32(static_cast<std::uint32_t>(n.buffers.size()));
  for (const auto& [label, ids] : n.buffers) {
    w.u32(label);
    w.u32(static_cast<std::uint32_t>(ids.size()));
    for (VectorId id : ids) w.u64(id.raw);
  }

  const auto& words = n.filter.bloom().words();
  w.u32(static_cast<std::uint32_t>(words.size()));
  for (std::uint64_t word : words) w.u64(word);
  const auto& exact = n.filter.exact();
  w.u32(static_cast<std::uint32_t>(exact.size()));
  for (LabelId l : exact) w.u32(l);

  for (const auto& c : n.children) write_node(w, *c, dim);
}

class NodeReader {
 public:
  NodeReader(io::ByteReader& r, const IdLayout& layout, std::size_t dim, FilterMode mode, const BloomParams& bloom)
      : r_(r), layout_(layout), dim_(dim), mode_(mode), bloom_(bloom) {}

  std::unique_ptr<TreeNode> read(const TreeNode* parent, std::uint32_t expected_branch) {
    if (++nodes_ > node_budget_) throw FormatError("snapshot holds more node records than declared");
    auto n = std::make_unique<TreeNode>();
    n->prefix = r_.u64();
    n->depth = r_.u32();
    n->branch = r_.u32();
    const std::uint32_t n_children = r_.u32();
    n->size = r_.u64();
    n->update_count = r_.u64();
    n->mean_radius = r_.f32();
    if (parent) {
      if (n->depth != parent->depth + 1 || n->branch != expected_branch ||
          n->prefix != layout_.child_prefix(parent->prefix, parent->depth, expected_branch)) {
        throw FormatError("node record does not extend its parent's prefix");
      }
    } else if (n->depth != 0 || n->prefix != 0) {
      throw FormatError("root record must have depth 0 and prefix 0");
    }
    if (n_children > layout_.branch_factor() || (n_children > 0 && n->depth >= layout_.max_depth())) {
      throw FormatError("node record has an invalid child count");
    }
    n->centroid.resize(dim_);
    for (float& c : n->centroid) c = r_.f32();

    const std::uint32_t n_slots = r_.u32();
    if (n_slots > 0 && n_children > 0) throw FormatError("internal node record carries slots");
    if (n_slots > layout_.slot_capacity(n->depth)) throw FormatError("leaf record exceeds its slot capacity");
    for (std::uint32_t s = 0; s < n_slots; ++s) {
      Slot slot;
      slot.key = r_.u64();
      slot.live = r_.u8() != 0;
      const std::uint32_t nl = r_.u32();
      if (r_.remaining() / 4 < nl) throw FormatError("truncated label set");
      slot.labels.resize(nl);
      for (LabelId& l : slot.labels) l = r_.u32();
      for (std::size_t i = 0; i < dim_; ++i) n->slot_vectors.push_back(r_.f32());
      n->slots.push_back(std::move(slot));
    }

    const IdRange range = layout_.range(n->prefix, n->depth);
    const std::uint32_t n_buffers = r_.u32();
    for (std::uint32_t b = 0; b < n_buffers; ++b) {
      const LabelId label = r_.u32();
      const std::uint32_t count = r_.u32();
      if (r_.remaining() / 8 < count) throw FormatError("truncated buffer");
      std::vector<VectorId> ids(count);
      for (auto& id : ids) {
        id = VectorId{r_.u64()};
        if (!range.contains(id)) throw FormatError("buffer id outside its host node's range");
      }
      n->buffers.emplace(label, std::move(ids));
    }

    n->filter = LabelFilter(mode_, bloom_);
    const std::uint32_t n_words = r_.u32();
    if (n_words != n->filter.bloom().words().size()) throw FormatError("bloom word count mismatch");
    for (auto& word : n->filter.bloom().mutable_words()) word = r_.u64();
    const std::uint32_t n_exact = r_.u32();
    if (r_.remaining() / 4 < n_exact) throw FormatError("truncated exact label set");
    auto& exact = n->filter.exact();
    exact.resize(n_exact);
    for (LabelId& l : exact) l = r_.u32();

    for (std::uint32_t c = 0; c < n_children; ++c) {
      auto child = read(n.get(), c);
      child->parent = n.get();
      n->children.push_back(std::move(child));
    }
    return n;
  }

  void set_budget(std::uint64_t nodes) { node_budget_ = nodes; }
  std::uint64_t nodes_read() const { return nodes_; }

 private:
  io::ByteReader& r_;
  const IdLayout& layout_;
  std::size_t dim_;
  FilterMode mode_;
  BloomParams bloom_;
  std::uint64_t nodes_ = 0;
  std::uint64_t node_budget_ = 0;
};

}  // namespace

std::string serialize_index(const FilteredIndex& index) {
  auto lock = index.read_lock();
  const IndexConfig& cfg = index.config();
  io::ByteWriter w;
  w.bytes(std::string_view(kSnapshotMagic, 4));
  w.u16(kSnapshotVersion);

  w.u32(cfg.tree.branch_factor);
  w.u32(cfg.tree.leaf_capacity);
  w.u32(cfg.tree.max_depth);
  w.u32(cfg.tree.slot_bits);
  w.u32(cfg.tree.kmeans_iters);

  w.u32(cfg.buffer_capacity);
  w.u8(static_cast<std::uint8_t>(cfg.filter_mode));
  w.f64(cfg.bloom_fp_rate);
  w.f64(cfg.bloom_expected_labels);
  w.u64(cfg.bloom_seed);
  w.f64(cfg.rebuild_threshold);
  w.u64(cfg.temp_cache_capacity);
  w.u64(cfg.seed);

  w.u64(index.dim());
  w.u32(index.bloom_params().num_bits);
  w.u32(index.bloom_params().num_hashes);
  w.u64(index.bloom_params().seed);
  w.u32(index.registry().next_virtual());

  std::uint64_t nodes = 0;
  index.base().for_each_node([&](const TreeNode&) { ++nodes; });
  w.u64(nodes);
  write_node(w, index.base().root(), index.dim());
  return w.take();
}

FilteredIndex deserialize_index(std::string_view bytes) {
  io::ByteReader r(bytes);
  if (r.bytes(4) != std::string_view(kSnapshotMagic, 4)) throw FormatError("not an index snapshot (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kSnapshotVersion) throw FormatError("unsupported snapshot version " + std::to_string(version));

  IndexConfig cfg;
  cfg.tree.branch_factor = r.u32();
  cfg.tree.leaf_capacity = r.u32();
  cfg.tree.max_depth = r.u32();
  cfg.tree.slot_bits = r.u32();
  cfg.tree.kmeans_iters = r.u32();
  cfg.buffer_capacity = r.u32();
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw FormatError("unknown filter mode " + std::to_string(mode));
  cfg.filter_mode = static_cast<FilterMode>(mode);
  cfg.bloom_fp_rate = r.f64();
  cfg.bloom_expected_labels = r.f64();
  cfg.bloom_seed = r.u64();
  cfg.rebuild_threshold = r.f64();
  cfg.temp_cache_capacity = r.u64();
  cfg.seed = r.u64();
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("snapshot config invalid: ") + e.what());
  }

  const std::uint64_t dim = r.u64();
  if (dim == 0 || dim > (1u << 20)) throw FormatError("snapshot dimension out of range");
  BloomParams bloom;
  bloom.num_bits = r.u32();
  bloom.num_hashes = r.u32();
  bloom.seed = r.u64();
  if (bloom.num_bits == 0 || bloom.num_hashes == 0) throw FormatError("invalid bloom parameters");
  const LabelId next_virtual = r.u32();
  const std::uint64_t nodes = r.u64();

  const IdLayout layout(cfg.tree);
  NodeReader reader(r, layout, dim, cfg.filter_mode, bloom);
  reader.set_budget(nodes);
  auto root = reader.read(nullptr, 0);
  if (reader.nodes_read() != nodes) throw FormatError("snapshot node count mismatch");
  if (!r.done()) throw FormatError("trailing bytes after snapshot");

  BaseIndex base = BaseIndex::from_parts(cfg.tree, dim, std::move(root));
  return FilteredIndex::from_parts(cfg, std::move(base), bloom, next_virtual);
}

void save_index(const FilteredIndex& index, const std::filesystem::path& path) {
  io::write_file(path, serialize_index(index));
}

FilteredIndex load_index(const std::filesystem::path& path) {
  return deserialize_index(io::read_file(path));
}

}  // namespace labeltree
