#include "hgvae/pnsg.hpp"

#include <cmath>
#include <stdexcept>

#include "hgvae/errors.hpp"
#include "hgvae/rng.hpp"

namespace hgvae {
namespace {

constexpr std::uint64_t kDropoutStream = 1;
constexpr std::uint64_t kViStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

}  // namespace

NegativeMode parse_negative_mode(std::string_view name) {
  if (name == "pnsg" || name == "progressive") return NegativeMode::kProgressive;
  if (name == "noise") return NegativeMode::kNoise;
  if (name == "dropout_only") return NegativeMode::kDropoutOnly;
  if (name == "vi_only") return NegativeMode::kViOnly;
  if (name == "unshifted") return NegativeMode::kUnshifted;
  throw ConfigError("unknown negative mode '" + std::string(name) +
                    "' (expected pnsg|noise|dropout_only|vi_only|unshifted)");
}

std::string to_string(NegativeMode mode) {
  switch (mode) {
    case NegativeMode::kProgressive:
      return "pnsg";
    case NegativeMode::kNoise:
      return "noise";
    case NegativeMode::kDropoutOnly:
      return "dropout_only";
    case NegativeMode::kViOnly:
      return "vi_only";
    case NegativeMode::kUnshifted:
      return "unshifted";
  }
  return "?";
}

double lambda_schedule(int epoch, int total_epochs) {
  if (total_epochs < 1) throw std::invalid_argument("lambda_schedule: total epochs must be >= 1");
  if (epoch < 0 || epoch > total_epochs)
    throw std::out_of_range("lambda_schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(total_epochs) + "]");
  return 1.0 - static_cast<double>(epoch) / static_cast<double>(total_epochs);
}

Matrix dropout_negatives(const Matrix& h1, double rate, int m, std::uint64_t seed) {
  if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("dropout_negatives: rate must lie in (0, 1)");
  if (m < 0) throw std::invalid_argument("dropout_negatives: negative count");
  if (m > 0 && h1.rows() == 0) throw std::invalid_argument("dropout_negatives: empty source");
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, h1.rows() - 1);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix out(m, h1.cols());
  for (int k = 0; k < m; ++k) {
    const Eigen::Index src = pick(rng);
    for (Eigen::Index j = 0; j < h1.cols(); ++j) out(k, j) = keep(rng) ? h1(src, j) * scale : 0.0;
  }
  return out;
}

Matrix shifted_mean(const Matrix& mu, double kappa) { return kappa * mu; }

Matrix vi_negatives(const Matrix& mu_star, const Matrix& log_var, int m, std::uint64_t seed) {
  if (mu_star.rows() != log_var.rows() || mu_star.cols() != log_var.cols())
    throw std::invalid_argument("vi_negatives: mu/log_var shape mismatch");
  if (m < 0) throw std::invalid_argument("vi_negatives: negative count");
  if (m > 0 && mu_star.rows() == 0) throw std::invalid_argument("vi_negatives: empty posterior");
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, mu_star.rows() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(m, mu_star.cols());
  for (int k = 0; k < m; ++k) {
    const Eigen::Index i = pick(rng);
    for (Eigen::Index j = 0; j < mu_star.cols(); ++j)
      out(k, j) = mu_star(i, j) + std::exp(0.5 * log_var(i, j)) * normal(rng);
  }
  return out;
}

NegativeBatch assemble_negatives(const Matrix& h1, const Matrix& mu, const Matrix& log_var, int epoch,
                                 int total_epochs, const NegativeOptions& options, std::uint64_t seed) {
  if (options.num_negatives < 1) throw std::invalid_argument("assemble_negatives: need at least one negative");
  if (h1.cols() != mu.cols()) throw std::invalid_argument("assemble_negatives: anchor and latent dims differ");
  const int m = options.num_negatives;
  NegativeBatch batch;
  batch.lambda = lambda_schedule(epoch, total_epochs);
  batch.kappa = options.kappa;
  batch.n_dropout = static_cast<int>(std::lround(batch.lambda * m));
  batch.n_vi = m - batch.n_dropout;
  batch.samples.resize(m, h1.cols());
  if (batch.n_dropout > 0)
    batch.samples.topRows(batch.n_dropout) =
        dropout_negatives(h1, options.dropout_rate, batch.n_dropout, derive_seed(seed, {kDropoutStream}));
  if (batch.n_vi > 0)
    batch.samples.bottomRows(batch.n_vi) =
        vi_negatives(shifted_mean(mu, options.kappa), log_var, batch.n_vi, derive_seed(seed, {kViStream}));
  return batch;
}

NegativeBatch generate_negatives(NegativeMode mode, const Matrix& h1, const Matrix& mu, const Matrix& log_var,
                                 int epoch, int total_epochs, const NegativeOptions& options, std::uint64_t seed) {
  switch (mode) {
    case NegativeMode::kProgressive:
      return assemble_negatives(h1, mu, log_var, epoch, total_epochs, options, seed);
    case NegativeMode::kDropoutOnly:
      return assemble_negatives(h1, mu, log_var, 0, total_epochs, options, seed);
    case NegativeMode::kViOnly:
      return assemble_negatives(h1, mu, log_var, total_epochs, total_epochs, options, seed);
    case NegativeMode::kUnshifted: {
      NegativeOptions unshifted = options;
      unshifted.kappa = 1.0;
      return assemble_negatives(h1, mu, log_var, total_epochs, total_epochs, unshifted, seed);
    }
    case NegativeMode::kNoise: {
      if (options.num_negatives < 1) throw std::invalid_argument("generate_negatives: need at least one negative");
      Rng rng(derive_seed(seed, {kNoiseStream}));
      NegativeBatch batch;
      batch.samples = standard_normal(options.num_negatives, h1.cols(), rng);
      batch.n_noise = options.num_negatives;
      batch.lambda = lambda_schedule(epoch, total_epochs);
      batch.kappa = options.kappa;
      return batch;
    }
  }
  throw std::logic_error("unhandled negative mode");
}

}  // namespace hgvae
