#include "hgvae/model.hpp"

namespace hgvae {

ModelSpec ModelSpec::from_config(const TrainingConfig& cfg, int feature_dim, int num_paths) {
  ModelSpec spec;
  spec.feature_dim = feature_dim;
  spec.hidden_dim = cfg.hidden_dim;
  spec.num_paths = num_paths;
  spec.heads = cfg.heads;
  spec.semantic_dim = cfg.semantic_dim;
  spec.activation = parse_activation(cfg.activation);
  spec.dropout = cfg.dropout;
  return spec;
}

namespace {

HanLayerSpec layer(int in, int out, const ModelSpec& s, int heads, Activation act) {
  HanLayerSpec l;
  l.in_dim = in;
  l.out_dim = out;
  l.num_paths = s.num_paths;
  l.heads = heads;
  l.semantic_dim = s.semantic_dim;
  l.activation = act;
  return l;
}

}  // namespace

HgvaeModel::HgvaeModel(const ModelSpec& spec)
    : spec_(spec),
      encoder_("encoder", layer(spec.feature_dim, spec.hidden_dim, spec, spec.heads, spec.activation)),
      mu_head_("mu", layer(spec.hidden_dim, spec.hidden_dim, spec, 1, Activation::kIdentity)),
      logvar_head_("logvar", layer(spec.hidden_dim, spec.hidden_dim, spec, 1, Activation::kIdentity)),
      decoder_("decoder", layer(spec.hidden_dim, spec.feature_dim, spec, 1, Activation::kIdentity)) {}

ParameterSet HgvaeModel::init_parameters(std::uint64_t seed) const {
  ParameterSet params;
  Rng rng(seed);
  params.add(kMaskToken, Matrix::Zero(1, spec_.feature_dim));
  encoder_.init_parameters(params, rng);
  mu_head_.init_parameters(params, rng);
  logvar_head_.init_parameters(params, rng);
  decoder_.init_parameters(params, rng);
  return params;
}

ag::Var HgvaeModel::encode(const BoundParameters& params, ag::Var x, std::span<const MetaPathAdjacency> adjacencies,
                           bool dropout_on, std::uint64_t seed) const {
  DropoutSpec dropout{dropout_on ? spec_.dropout : 0.0, seed};
  return encoder_.forward(params, x, adjacencies, dropout).embedding;
}

EncodedViews HgvaeModel::make_views(const BoundParameters& params, ag::Var x,
                                    std::span<const MetaPathAdjacency> adjacencies, std::uint64_t anchor_seed,
                                    std::uint64_t positive_seed) const {
  return {encode(params, x, adjacencies, true, anchor_seed), encode(params, x, adjacencies, true, positive_seed)};
}

PosteriorStats HgvaeModel::posterior(const BoundParameters& params, ag::Var h,
                                     std::span<const MetaPathAdjacency> adjacencies,
                                     const VariationalOptions& options) const {
  return infer_posterior(mu_head_, logvar_head_, params, h, adjacencies, options);
}

ag::Var HgvaeModel::decode(const BoundParameters& params, ag::Var z,
                           std::span<const MetaPathAdjacency> adjacencies) const {
  return decoder_.forward(params, z, adjacencies).embedding;
}

Matrix HgvaeModel::embed(const ParameterSet& params, const Matrix& features,
                         std::span<const MetaPathAdjacency> adjacencies) const {
  ag::Tape tape;
  BoundParameters bound(tape, params);
  return encode(bound, tape.constant(features), adjacencies, false, 0).value();
}

}  // namespace hgvae
