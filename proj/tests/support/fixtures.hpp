#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "hgvae/graph.hpp"
#include "hgvae/rng.hpp"
#include "hgvae/synthetic.hpp"

namespace hgvae::testing {

/// Small planted-partition graph: 2 aux types, 2 meta-paths.
inline HeterogeneousGraph tiny_graph(int nodes_per_class = 6, int n_classes = 2, int feature_dim = 5,
                                     std::uint64_t seed = 7) {
  SyntheticSpec spec;
  spec.n_classes = n_classes;
  spec.nodes_per_class = nodes_per_class;
  spec.feature_dim = feature_dim;
  spec.signal_dim = feature_dim;
  spec.aux_types = {{"alpha", 2 * n_classes, 0.5, 0.1}, {"beta", 2 * n_classes, 0.5, 0.1}};
  spec.seed = seed;
  spec.split_sizes = std::vector<int>{};
  return generate_synthetic(spec);
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  return scale * standard_normal(rows, cols, rng);
}

inline BoolMatrix bool_identity(Eigen::Index n) {
  BoolMatrix out = BoolMatrix::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i) out(i, i) = true;
  return out;
}

inline bool same_pattern(const BoolMatrix& a, const BoolMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a == b).all();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hgvae_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace hgvae::testing
