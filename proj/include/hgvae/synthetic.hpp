#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgvae/graph.hpp"

namespace hgvae {

/// An auxiliary node type joined to the target type by one relation. Aux node
/// a belongs to class a % n_classes; a target node links to it with
/// probability p_in when their classes match and p_out otherwise.
struct AuxTypeSpec {
  std::string name;
  int count = 40;
  double p_in = 0.15;
  double p_out = 0.02;
};

/// Planted-partition heterogeneous graph. Target features are
/// class_mean + feature_noise * N(0, I); class means are nonzero only on the
/// first `signal_dim` coordinates, drawn from N(0, class_separation^2).
struct SyntheticSpec {
  std::string target_type = "target";
  int n_classes = 4;
  int nodes_per_class = 100;
  std::vector<AuxTypeSpec> aux_types = {{"alpha"}, {"beta"}};
  int feature_dim = 64;
  int signal_dim = 64;
  double class_separation = 1.0;
  double feature_noise = 1.0;
  std::uint64_t seed = 0;
  /// Labeled nodes per class for each split; when unset, {20, 40, 60} filtered
  /// to the sizes the class counts allow.
  std::optional<std::vector<int>> split_sizes;

  static SyntheticSpec from_json(const nlohmann::json& j);
  static SyntheticSpec load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Throws ConfigError for an infeasible or inconsistent spec.
  void validate() const;
};

HeterogeneousGraph generate_synthetic(const SyntheticSpec& spec);

/// generate_synthetic followed by write_dataset; also stores the spec as
/// `synthetic_spec.json`.
HeterogeneousGraph gen_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

/// Stratified split: `per_class` train nodes per class, the rest divided
/// evenly into validation and test, each capped at 1000.
LabelSplit make_split(std::span<const int> labels, int n_classes, int per_class, std::uint64_t seed);

}  // namespace hgvae
