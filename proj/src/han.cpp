#include "hgvae/han.hpp"

#include <cmath>
#include <stdexcept>

#include "hgvae/errors.hpp"

namespace hgvae {

Activation parse_activation(std::string_view name) {
  if (name == "elu") return Activation::kElu;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity" || name == "none") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected elu|relu|identity)");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kElu:
      return "elu";
    case Activation::kRelu:
      return "relu";
    case Activation::kIdentity:
      return "identity";
  }
  return "?";
}

ag::Var apply_activation(ag::Var x, Activation a) {
  switch (a) {
    case Activation::kElu:
      return ag::elu(x);
    case Activation::kRelu:
      return ag::relu(x);
    case Activation::kIdentity:
      return x;
  }
  return x;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = keep(rng) ? scale : 0.0;
  return m;
}

HanLayer::HanLayer(std::string prefix, HanLayerSpec spec) : prefix_(std::move(prefix)), spec_(spec) {
  if (spec_.in_dim <= 0 || spec_.out_dim <= 0) throw ConfigError(prefix_ + ": layer dimensions must be positive");
  if (spec_.heads <= 0 || spec_.out_dim % spec_.heads != 0)
    throw ConfigError(prefix_ + ": out_dim " + std::to_string(spec_.out_dim) + " not divisible by " +
                      std::to_string(spec_.heads) + " heads");
  if (spec_.num_paths <= 0) throw ConfigError(prefix_ + ": at least one meta-path is required");
  if (spec_.semantic_dim <= 0) throw ConfigError(prefix_ + ": semantic_dim must be positive");
}

std::string HanLayer::param(int path, int head, std::string_view leaf) const {
  return prefix_ + ".p" + std::to_string(path) + ".h" + std::to_string(head) + "." + std::string(leaf);
}

std::string HanLayer::semantic_param(std::string_view leaf) const { return prefix_ + ".sem." + std::string(leaf); }

void HanLayer::init_parameters(ParameterSet& params, Rng& rng) const {
  const int hd = head_dim();
  const double gain = std::sqrt(2.0);
  for (int p = 0; p < spec_.num_paths; ++p)
    for (int h = 0; h < spec_.heads; ++h) {
      params.add(param(p, h, "W"), xavier_uniform(spec_.in_dim, hd, rng, gain));
      params.add(param(p, h, "a_src"), xavier_uniform(hd, 1, rng, gain));
      params.add(param(p, h, "a_dst"), xavier_uniform(hd, 1, rng, gain));
    }
  params.add(semantic_param("W"), xavier_uniform(spec_.out_dim, spec_.semantic_dim, rng));
  params.add(semantic_param("b"), Matrix::Zero(1, spec_.semantic_dim));
  params.add(semantic_param("q"), xavier_uniform(spec_.semantic_dim, 1, rng));
}

NodeAttentionOutput HanLayer::node_level(const BoundParameters& params, ag::Var x, const MetaPathAdjacency& adjacency,
                                         int path_index, Rng* dropout_rng, double dropout_rate) const {
  if (x.cols() != spec_.in_dim)
    throw std::invalid_argument(prefix_ + ": input has " + std::to_string(x.cols()) + " columns, expected " +
                                std::to_string(spec_.in_dim));
  if (adjacency.size() != x.rows()) throw std::invalid_argument(prefix_ + ": adjacency size mismatch");
  const bool drop = dropout_rng != nullptr && dropout_rate > 0.0;

  ag::Var input = x;
  if (drop) input = ag::multiply_constant(x, dropout_mask(x.rows(), x.cols(), dropout_rate, *dropout_rng));

  NodeAttentionOutput out;
  std::vector<ag::Var> heads;
  for (int h = 0; h < spec_.heads; ++h) {
    ag::Var wh = ag::matmul(input, params[param(path_index, h, "W")]);
    ag::Var src = ag::matmul(wh, params[param(path_index, h, "a_src")]);
    ag::Var dst = ag::matmul(wh, params[param(path_index, h, "a_dst")]);
    ag::Var scores = ag::leaky_relu(ag::add_col_row(src, ag::transpose(dst)), spec_.leaky_slope);
    ag::Var att = ag::masked_softmax_rows(scores, adjacency.adjacency);
    out.attention.push_back(att.value());
    if (drop) att = ag::multiply_constant(att, dropout_mask(att.rows(), att.cols(), dropout_rate, *dropout_rng));
    heads.push_back(ag::masked_matmul(att, adjacency.adjacency, wh));
  }
  ag::Var joined = heads.size() == 1 ? heads.front() : ag::concat_cols(heads);
  out.embedding = apply_activation(joined, spec_.activation);
  return out;
}

SemanticAttentionOutput HanLayer::semantic_level(const BoundParameters& params,
                                                 std::span<const ag::Var> per_path) const {
  if (per_path.empty()) throw std::invalid_argument(prefix_ + ": semantic attention over zero meta-paths");
  for (const ag::Var& h : per_path)
    if (h.rows() != per_path.front().rows() || h.cols() != spec_.out_dim)
      throw std::invalid_argument(prefix_ + ": per-path embeddings must share shape");

  std::vector<ag::Var> scores;
  scores.reserve(per_path.size());
  for (const ag::Var& h : per_path) {
    ag::Var hidden = ag::tanh(ag::add_row(ag::matmul(h, params[semantic_param("W")]), params[semantic_param("b")]));
    scores.push_back(ag::mean(ag::matmul(hidden, params[semantic_param("q")])));
  }
  SemanticAttentionOutput out;
  out.beta = ag::softmax_rows(ag::concat_cols(scores));
  out.embedding = ag::scale_by(per_path[0], ag::element(out.beta, 0, 0));
  for (std::size_t p = 1; p < per_path.size(); ++p)
    out.embedding = out.embedding + ag::scale_by(per_path[p], ag::element(out.beta, 0, static_cast<Eigen::Index>(p)));
  return out;
}

HanLayer::Output HanLayer::forward(const BoundParameters& params, ag::Var x,
                                   std::span<const MetaPathAdjacency> adjacencies, const DropoutSpec& dropout) const {
  if (static_cast<int>(adjacencies.size()) != spec_.num_paths)
    throw std::invalid_argument(prefix_ + ": expected " + std::to_string(spec_.num_paths) + " meta-paths, got " +
                                std::to_string(adjacencies.size()));
  Rng rng(dropout.seed);
  Output out;
  for (int p = 0; p < spec_.num_paths; ++p)
    out.per_path.push_back(node_level(params, x, adjacencies[p], p, dropout.enabled() ? &rng : nullptr, dropout.rate)
                               .embedding);
  SemanticAttentionOutput sem = semantic_level(params, out.per_path);
  out.embedding = sem.embedding;
  out.beta = sem.beta;
  return out;
}

}  // namespace hgvae
