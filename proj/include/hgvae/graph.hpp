#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hgvae/autograd.hpp"

namespace hgvae {

/// A typed relation. Node ids are dense, 0-based, per type.
struct EdgeType {
  std::string name;
  std::string src_type;
  std::string dst_type;
  std::vector<std::pair<int, int>> edges;

  bool operator==(const EdgeType&) const = default;
};

/// A sequence of relations leading from the target type back to the target type.
struct MetaPath {
  std::string name;
  std::vector<std::string> node_sequence;  // length == edge_sequence.size() + 1
  std::vector<std::string> edge_sequence;

  bool operator==(const MetaPath&) const = default;
};

struct LabelSplit {
  int split_size = 0;  // labeled nodes per class
  std::vector<int> train_ids;
  std::vector<int> val_ids;
  std::vector<int> test_ids;

  bool operator==(const LabelSplit&) const = default;
};

struct HeterogeneousGraph {
  std::vector<std::string> node_types;
  std::vector<int> node_counts;
  std::vector<EdgeType> edge_types;
  std::map<std::string, Matrix> features;
  std::string target_type;
  int num_classes = 0;
  std::vector<int> labels;  // per target node, -1 when unlabeled; empty when no labels
  std::vector<MetaPath> meta_paths;
  std::vector<LabelSplit> splits;

  int node_count(std::string_view type) const;
  int target_count() const { return node_count(target_type); }
  const Matrix& target_features() const;
  const EdgeType& edge_type(std::string_view name) const;
  bool has_edge_type(std::string_view name) const;
  bool has_node_type(std::string_view type) const;
  const LabelSplit& split(int split_size) const;
  bool is_heterogeneous() const { return node_types.size() + edge_types.size() > 2; }

  /// Checks every structural invariant; throws DataError on violation.
  void validate() const;

  bool operator==(const HeterogeneousGraph& other) const;
};

/// Boolean adjacency among target nodes induced by one meta-path; diagonal is true.
struct MetaPathAdjacency {
  MetaPath meta_path;
  BoolMatrix adjacency;

  Eigen::Index size() const { return adjacency.rows(); }
};

/// Resolves the node sequence of a meta-path given by its relations, starting
/// at the target type. Throws SchemaError if the relations do not chain.
MetaPath make_meta_path(const HeterogeneousGraph& graph, std::string name,
                        std::vector<std::string> edge_sequence);

/// Throws SchemaError unless the meta-path is consistent with the graph schema.
void validate_meta_path(const HeterogeneousGraph& graph, const MetaPath& path);

MetaPathAdjacency meta_path_adjacency(const HeterogeneousGraph& graph, const MetaPath& path);
std::vector<MetaPathAdjacency> meta_path_adjacencies(const HeterogeneousGraph& graph);

HeterogeneousGraph load_dataset(const std::filesystem::path& data_dir);
void write_dataset(const HeterogeneousGraph& graph, const std::filesystem::path& data_dir);

}  // namespace hgvae
