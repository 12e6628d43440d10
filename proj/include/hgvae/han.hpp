#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hgvae/autograd.hpp"
#include "hgvae/graph.hpp"
#include "hgvae/parameters.hpp"

namespace hgvae {

enum class Activation { kElu, kRelu, kIdentity };

Activation parse_activation(std::string_view name);
std::string to_string(Activation a);
ag::Var apply_activation(ag::Var x, Activation a);

struct HanLayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  int num_paths = 1;
  int heads = 1;           // out_dim must be divisible by heads
  int semantic_dim = 128;  // hidden size of the semantic scoring MLP
  Activation activation = Activation::kElu;
  double leaky_slope = 0.2;
};

/// Feature and attention dropout for one forward pass; rate 0 disables it.
struct DropoutSpec {
  double rate = 0.0;
  std::uint64_t seed = 0;

  bool enabled() const { return rate > 0.0; }
};

struct NodeAttentionOutput {
  ag::Var embedding;               // N x out_dim, after activation
  std::vector<Matrix> attention;   // per head, N x N, softmax weights before dropout
};

struct SemanticAttentionOutput {
  ag::Var embedding;  // sum_p beta_p * H_p
  ag::Var beta;       // 1 x P
};

/// One hierarchical attention layer: GAT-style attention inside each
/// meta-path neighbourhood, then a softmax-weighted fusion across meta-paths.
///
/// Parameters live in a ParameterSet under `<prefix>.`:
///   p<k>.h<h>.W      in_dim x head_dim   projection for path k, head h
///   p<k>.h<h>.a_src  head_dim x 1        attention vector, centre node half
///   p<k>.h<h>.a_dst  head_dim x 1        attention vector, neighbour half
///   sem.W, sem.b, sem.q                  shared semantic scorer
class HanLayer {
 public:
  HanLayer(std::string prefix, HanLayerSpec spec);

  const HanLayerSpec& spec() const { return spec_; }
  const std::string& prefix() const { return prefix_; }
  int head_dim() const { return spec_.out_dim / spec_.heads; }

  void init_parameters(ParameterSet& params, Rng& rng) const;

  /// e_ij = LeakyReLU(a_src . W h_i + a_dst . W h_j) over j in N(i);
  /// h_i = act(sum_j softmax_j(e_ij) W h_j), heads concatenated.
  NodeAttentionOutput node_level(const BoundParameters& params, ag::Var x, const MetaPathAdjacency& adjacency,
                                 int path_index, Rng* dropout_rng = nullptr, double dropout_rate = 0.0) const;

  /// w_p = mean_i q . tanh(W_s h_i^p + b_s); beta = softmax(w).
  SemanticAttentionOutput semantic_level(const BoundParameters& params, std::span<const ag::Var> per_path) const;

  struct Output {
    ag::Var embedding;
    ag::Var beta;
    std::vector<ag::Var> per_path;
  };
  Output forward(const BoundParameters& params, ag::Var x, std::span<const MetaPathAdjacency> adjacencies,
                 const DropoutSpec& dropout = {}) const;

  std::string param(int path, int head, std::string_view leaf) const;
  std::string semantic_param(std::string_view leaf) const;

 private:
  std::string prefix_;
  HanLayerSpec spec_;
};

/// Keep-mask with entries 0 or 1/(1-rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

}  // namespace hgvae
