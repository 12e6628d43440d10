#pragma once

#include <cstdint>
#include <span>

#include "hgvae/config.hpp"
#include "hgvae/han.hpp"
#include "hgvae/parameters.hpp"
#include "hgvae/variational.hpp"

namespace hgvae {

struct ModelSpec {
  int feature_dim = 0;
  int hidden_dim = 256;
  int num_paths = 1;
  int heads = 1;
  int semantic_dim = 128;
  Activation activation = Activation::kElu;
  double dropout = 0.5;

  static ModelSpec from_config(const TrainingConfig& cfg, int feature_dim, int num_paths);
};

/// Anchor and positive encodings of the same masked input.
struct EncodedViews {
  ag::Var h1;
  ag::Var h2;
};

/// Encoder, posterior heads and decoder, all single HAN layers over the same
/// meta-path adjacencies. The latent size equals the hidden size.
class HgvaeModel {
 public:
  static constexpr const char* kMaskToken = "mask_token";

  explicit HgvaeModel(const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  const HanLayer& encoder() const { return encoder_; }
  const HanLayer& mu_head() const { return mu_head_; }
  const HanLayer& logvar_head() const { return logvar_head_; }
  const HanLayer& decoder() const { return decoder_; }

  /// Fresh parameters. The mask token starts at zero.
  ParameterSet init_parameters(std::uint64_t seed) const;

  /// Encoder output. Dropout is active only when `dropout_on` is set.
  ag::Var encode(const BoundParameters& params, ag::Var x, std::span<const MetaPathAdjacency> adjacencies,
                 bool dropout_on, std::uint64_t seed) const;

  /// Two dropout passes with independent seeds.
  EncodedViews make_views(const BoundParameters& params, ag::Var x, std::span<const MetaPathAdjacency> adjacencies,
                          std::uint64_t anchor_seed, std::uint64_t positive_seed) const;

  PosteriorStats posterior(const BoundParameters& params, ag::Var h, std::span<const MetaPathAdjacency> adjacencies,
                           const VariationalOptions& options) const;

  ag::Var decode(const BoundParameters& params, ag::Var z, std::span<const MetaPathAdjacency> adjacencies) const;

  /// Deterministic inference encoding: no masking, no dropout.
  Matrix embed(const ParameterSet& params, const Matrix& features,
               std::span<const MetaPathAdjacency> adjacencies) const;

 private:
  ModelSpec spec_;
  HanLayer encoder_;
  HanLayer mu_head_;
  HanLayer logvar_head_;
  HanLayer decoder_;
};

}  // namespace hgvae
