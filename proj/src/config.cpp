#include "hgvae/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "hgvae/errors.hpp"

namespace hgvae {
namespace {

using nlohmann::json;

struct Field {
  std::function<void(TrainingConfig&, const json&)> read;
  std::function<json(const TrainingConfig&)> write;
};

template <typename T>
Field member(T TrainingConfig::*ptr) {
  return Field{[ptr](TrainingConfig& c, const json& v) { c.*ptr = v.get<T>(); },
               [ptr](const TrainingConfig& c) { return json(c.*ptr); }};
}

Field optional_double(std::optional<double> TrainingConfig::*ptr) {
  return Field{[ptr](TrainingConfig& c, const json& v) {
                 if (v.is_null())
                   c.*ptr = std::nullopt;
                 else
                   c.*ptr = v.get<double>();
               },
               [ptr](const TrainingConfig& c) { return (c.*ptr) ? json(*(c.*ptr)) : json(nullptr); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"train.epochs", member(&TrainingConfig::epochs)},
      {"train.lr", member(&TrainingConfig::lr)},
      {"train.seed", member(&TrainingConfig::seed)},
      {"train.checkpoint_every", member(&TrainingConfig::checkpoint_every)},
      {"train.early_stopping", member(&TrainingConfig::early_stopping)},
      {"train.patience", member(&TrainingConfig::patience)},
      {"train.eval_every", member(&TrainingConfig::eval_every)},
      {"mask.rate", member(&TrainingConfig::mask_rate)},
      {"mask.rate_final", optional_double(&TrainingConfig::mask_rate_final)},
      {"mask.seed_stream", member(&TrainingConfig::mask_seed_stream)},
      {"model.hidden_dim", member(&TrainingConfig::hidden_dim)},
      {"model.heads", member(&TrainingConfig::heads)},
      {"model.semantic_dim", member(&TrainingConfig::semantic_dim)},
      {"model.dropout", member(&TrainingConfig::dropout)},
      {"model.activation", member(&TrainingConfig::activation)},
      {"vi.norm_eps", member(&TrainingConfig::norm_eps)},
      {"vi.logvar_clamp", member(&TrainingConfig::logvar_clamp)},
      {"pnsg.kappa", member(&TrainingConfig::kappa)},
      {"pnsg.num_negatives", member(&TrainingConfig::num_negatives)},
      {"pnsg.dropout_rate", member(&TrainingConfig::pnsg_dropout_rate)},
      {"pnsg.mode", member(&TrainingConfig::pnsg_mode)},
      {"loss.alpha", member(&TrainingConfig::alpha)},
      {"loss.beta", member(&TrainingConfig::beta)},
      {"loss.gamma", member(&TrainingConfig::gamma)},
      {"loss.tau", member(&TrainingConfig::tau)},
      {"loss.delta", member(&TrainingConfig::delta)},
      {"loss.esce_variant", member(&TrainingConfig::esce_variant)},
      {"loss.denominator_includes_positive", member(&TrainingConfig::denominator_includes_positive)},
  };
  return table;
}

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object())
      flatten(v, key, out);
    else
      out[key] = v;
  }
}

void assign(TrainingConfig& cfg, const std::string& key, const json& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second.read(cfg, value);
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + value.dump() + " (" + e.what() + ")");
  }
}

}  // namespace

TrainingConfig TrainingConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::map<std::string, json> flat;
  flatten(j, "", flat);
  TrainingConfig cfg;
  for (const auto& [key, value] : flat) assign(cfg, key, value);
  cfg.validate();
  return cfg;
}

TrainingConfig TrainingConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
}

json TrainingConfig::to_json() const {
  json out = json::object();
  for (const auto& [key, field] : fields()) {
    const auto dot = key.find('.');
    out[key.substr(0, dot)][key.substr(dot + 1)] = field.write(*this);
  }
  return out;
}

void TrainingConfig::set(std::string_view key, std::string_view value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  assign(*this, std::string(key), parsed);
}

std::vector<std::string> TrainingConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [key, _] : fields()) out.push_back(key);
  return out;
}

void TrainingConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(epochs >= 1, "train.epochs must be >= 1");
  require(lr > 0.0, "train.lr must be > 0");
  require(checkpoint_every >= 0, "train.checkpoint_every must be >= 0");
  require(patience >= 1 && eval_every >= 1, "train.patience and train.eval_every must be >= 1");
  require(mask_rate >= 0.0 && mask_rate <= 1.0, "mask.rate must lie in [0, 1]");
  require(!mask_rate_final || (*mask_rate_final >= 0.0 && *mask_rate_final <= 1.0),
          "mask.rate_final must lie in [0, 1]");
  require(hidden_dim >= 1 && semantic_dim >= 1, "model dimensions must be >= 1");
  require(heads >= 1 && hidden_dim % heads == 0, "model.hidden_dim must be divisible by model.heads");
  require(dropout >= 0.0 && dropout < 1.0, "model.dropout must lie in [0, 1)");
  parse_activation(activation);
  require(norm_eps > 0.0, "vi.norm_eps must be > 0");
  require(num_negatives >= 1, "pnsg.num_negatives must be >= 1");
  require(pnsg_dropout_rate > 0.0 && pnsg_dropout_rate < 1.0, "pnsg.dropout_rate must lie in (0, 1)");
  parse_negative_mode(pnsg_mode);
  require(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0, "loss weights must be >= 0");
  require(tau > 0.0, "loss.tau must be > 0");
  require(delta >= 1.0, "loss.delta must be >= 1");
  parse_esce_variant(esce_variant);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t TrainingConfig::hash() const { return fnv1a(to_json().dump()); }

}  // namespace hgvae
