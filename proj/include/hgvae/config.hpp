#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgvae/han.hpp"
#include "hgvae/objectives.hpp"
#include "hgvae/pnsg.hpp"
#include "hgvae/variational.hpp"

namespace hgvae {

/// Every knob of a training run. Serialized as nested JSON whose dotted paths
/// are the config keys (`train.lr`, `mask.rate`, `loss.tau`, ...).
struct TrainingConfig {
  // train.*
  int epochs = 200;
  double lr = 5e-4;
  std::uint64_t seed = 0;
  int checkpoint_every = 50;
  bool early_stopping = false;
  int patience = 50;
  int eval_every = 10;

  // mask.*
  double mask_rate = 0.5;
  std::optional<double> mask_rate_final;
  std::uint64_t mask_seed_stream = 0;

  // model.*
  int hidden_dim = 256;
  int heads = 1;
  int semantic_dim = 128;
  double dropout = 0.5;
  std::string activation = "elu";

  // vi.*
  double norm_eps = 1e-5;
  double logvar_clamp = 10.0;

  // pnsg.*
  double kappa = 2.0;
  int num_negatives = 20;
  double pnsg_dropout_rate = 0.2;
  std::string pnsg_mode = "pnsg";

  // loss.*
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double tau = 0.5;
  double delta = 3.0;
  std::string esce_variant = "focal";
  bool denominator_includes_positive = false;

  /// Accepts nested objects or flat dotted keys; unknown keys are an error.
  static TrainingConfig from_json(const nlohmann::json& j);
  static TrainingConfig load(const std::string& path);
  nlohmann::json to_json() const;

  /// Sets one key from its textual value (JSON literal or bare string).
  void set(std::string_view key, std::string_view value);
  static std::vector<std::string> keys();

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  std::uint64_t hash() const;

  LossWeights loss_weights() const { return {alpha, beta, gamma}; }
  NegativeOptions negative_options() const { return {num_negatives, kappa, pnsg_dropout_rate}; }
  NegativeMode negative_mode() const { return parse_negative_mode(pnsg_mode); }
  EsceVariant esce() const { return parse_esce_variant(esce_variant); }
  VariationalOptions variational() const { return {norm_eps, logvar_clamp}; }
  double final_mask_rate() const { return mask_rate_final.value_or(mask_rate); }
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace hgvae
