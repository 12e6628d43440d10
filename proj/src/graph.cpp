#include "hgvae/graph.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>

#include "hgvae/errors.hpp"

namespace hgvae {

int HeterogeneousGraph::node_count(std::string_view type) const {
  for (std::size_t i = 0; i < node_types.size(); ++i)
    if (node_types[i] == type) return node_counts[i];
  throw SchemaError("unknown node type '" + std::string(type) + "'");
}

const Matrix& HeterogeneousGraph::target_features() const {
  auto it = features.find(target_type);
  if (it == features.end()) throw DataError("no features for target type '" + target_type + "'");
  return it->second;
}

const EdgeType& HeterogeneousGraph::edge_type(std::string_view name) const {
  for (const EdgeType& e : edge_types)
    if (e.name == name) return e;
  throw SchemaError("unknown edge type '" + std::string(name) + "'");
}

bool HeterogeneousGraph::has_edge_type(std::string_view name) const {
  return std::any_of(edge_types.begin(), edge_types.end(), [&](const EdgeType& e) { return e.name == name; });
}

bool HeterogeneousGraph::has_node_type(std::string_view type) const {
  return std::find(node_types.begin(), node_types.end(), type) != node_types.end();
}

const LabelSplit& HeterogeneousGraph::split(int split_size) const {
  for (const LabelSplit& s : splits)
    if (s.split_size == split_size) return s;
  throw DataError("no label split of size " + std::to_string(split_size));
}

void HeterogeneousGraph::validate() const {
  if (node_types.size() != node_counts.size()) throw DataError("node type / count length mismatch");
  for (int c : node_counts)
    if (c < 0) throw DataError("negative node count");
  if (!has_node_type(target_type)) throw SchemaError("target type '" + target_type + "' is not a node type");
  for (const EdgeType& e : edge_types) {
    const int ns = node_count(e.src_type);
    const int nd = node_count(e.dst_type);
    for (const auto& [s, d] : e.edges)
      if (s < 0 || s >= ns || d < 0 || d >= nd)
        throw DataError("edge type '" + e.name + "' has dangling endpoint (" + std::to_string(s) + "," +
                        std::to_string(d) + ")");
  }
  for (const auto& [type, x] : features) {
    if (x.rows() != node_count(type)) throw DataError("feature rows for '" + type + "' do not match node count");
    if (!x.allFinite()) throw DataError("non-finite feature value for '" + type + "'");
  }
  const int n = target_count();
  if (!labels.empty()) {
    if (static_cast<int>(labels.size()) != n) throw DataError("label vector length mismatch");
    for (int y : labels)
      if (y < -1 || y >= num_classes) throw DataError("label out of range");
  }
  for (const MetaPath& p : meta_paths) validate_meta_path(*this, p);
  for (const LabelSplit& s : splits) {
    std::vector<int> all;
    for (const auto* ids : {&s.train_ids, &s.val_ids, &s.test_ids})
      for (int id : *ids) {
        if (id < 0 || id >= n) throw DataError("split id out of range");
        all.push_back(id);
      }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
      throw DataError("split " + std::to_string(s.split_size) + " has overlapping or repeated ids");
  }
}

bool HeterogeneousGraph::operator==(const HeterogeneousGraph& o) const {
  if (node_types != o.node_types || node_counts != o.node_counts || edge_types != o.edge_types ||
      target_type != o.target_type || num_classes != o.num_classes || labels != o.labels ||
      meta_paths != o.meta_paths || splits != o.splits || features.size() != o.features.size())
    return false;
  for (const auto& [type, x] : features) {
    auto it = o.features.find(type);
    if (it == o.features.end() || it->second.rows() != x.rows() || it->second.cols() != x.cols() ||
        it->second != x)
      return false;
  }
  return true;
}

namespace {

// Which way a relation is traversed when walking from `from`.
bool forward_from(const EdgeType& e, const std::string& from, const std::string& to) {
  if (e.src_type == from && e.dst_type == to) return true;
  if (e.dst_type == from && e.src_type == to) return false;
  throw SchemaError("edge type '" + e.name + "' does not connect '" + from + "' to '" + to + "'");
}

using SparseBool = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseBool incidence(const HeterogeneousGraph& g, const EdgeType& e, bool forward) {
  const int ns = g.node_count(e.src_type);
  const int nd = g.node_count(e.dst_type);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(e.edges.size());
  for (const auto& [s, d] : e.edges) {
    if (forward)
      trips.emplace_back(s, d, 1.0);
    else
      trips.emplace_back(d, s, 1.0);
  }
  SparseBool m(forward ? ns : nd, forward ? nd : ns);
  // Duplicate edges collapse to a single 1.
  m.setFromTriplets(trips.begin(), trips.end(), [](double, double) { return 1.0; });
  return m;
}

}  // namespace

void validate_meta_path(const HeterogeneousGraph& graph, const MetaPath& path) {
  if (path.edge_sequence.size() < 2) throw SchemaError("meta-path '" + path.name + "' needs at least two relations");
  if (path.node_sequence.size() != path.edge_sequence.size() + 1)
    throw SchemaError("meta-path '" + path.name + "' node/edge sequence length mismatch");
  if (path.node_sequence.front() != graph.target_type || path.node_sequence.back() != graph.target_type)
    throw SchemaError("meta-path '" + path.name + "' must start and end at the target type");
  for (std::size_t k = 0; k < path.edge_sequence.size(); ++k) {
    if (!graph.has_edge_type(path.edge_sequence[k]))
      throw SchemaError("meta-path '" + path.name + "' references unknown edge type '" + path.edge_sequence[k] + "'");
    forward_from(graph.edge_type(path.edge_sequence[k]), path.node_sequence[k], path.node_sequence[k + 1]);
  }
}

MetaPath make_meta_path(const HeterogeneousGraph& graph, std::string name, std::vector<std::string> edge_sequence) {
  MetaPath path{std::move(name), {graph.target_type}, std::move(edge_sequence)};
  for (const std::string& en : path.edge_sequence) {
    if (!graph.has_edge_type(en))
      throw SchemaError("meta-path '" + path.name + "' references unknown edge type '" + en + "'");
    const EdgeType& e = graph.edge_type(en);
    const std::string& cur = path.node_sequence.back();
    if (e.src_type == cur)
      path.node_sequence.push_back(e.dst_type);
    else if (e.dst_type == cur)
      path.node_sequence.push_back(e.src_type);
    else
      throw SchemaError("meta-path '" + path.name + "': edge type '" + en + "' does not touch '" + cur + "'");
  }
  validate_meta_path(graph, path);
  return path;
}

MetaPathAdjacency meta_path_adjacency(const HeterogeneousGraph& graph, const MetaPath& path) {
  validate_meta_path(graph, path);
  const int n = graph.target_count();
  SparseBool reach;
  for (std::size_t k = 0; k < path.edge_sequence.size(); ++k) {
    const EdgeType& e = graph.edge_type(path.edge_sequence[k]);
    SparseBool step = incidence(graph, e, forward_from(e, path.node_sequence[k], path.node_sequence[k + 1]));
    if (k == 0) {
      reach = std::move(step);
    } else {
      reach = (reach * step).pruned();
      for (int r = 0; r < reach.outerSize(); ++r)
        for (SparseBool::InnerIterator it(reach, r); it; ++it) it.valueRef() = 1.0;
    }
  }
  MetaPathAdjacency out{path, BoolMatrix::Constant(n, n, false)};
  for (int r = 0; r < reach.outerSize(); ++r)
    for (SparseBool::InnerIterator it(reach, r); it; ++it)
      if (it.value() != 0.0) out.adjacency(it.row(), it.col()) = true;
  for (int i = 0; i < n; ++i) out.adjacency(i, i) = true;
  return out;
}

std::vector<MetaPathAdjacency> meta_path_adjacencies(const HeterogeneousGraph& graph) {
  std::vector<MetaPathAdjacency> out;
  out.reserve(graph.meta_paths.size());
  for (const MetaPath& p : graph.meta_paths) out.push_back(meta_path_adjacency(graph, p));
  return out;
}

}  // namespace hgvae
