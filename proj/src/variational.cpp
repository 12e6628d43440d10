#include "hgvae/variational.hpp"

#include <stdexcept>

namespace hgvae {

PosteriorStats infer_posterior(const HanLayer& mu_head, const HanLayer& logvar_head, const BoundParameters& params,
                               ag::Var h, std::span<const MetaPathAdjacency> adjacencies,
                               const VariationalOptions& options) {
  PosteriorStats stats;
  stats.mu = ag::row_standardize(mu_head.forward(params, h, adjacencies).embedding, options.norm_eps);
  stats.log_var = ag::row_standardize(logvar_head.forward(params, h, adjacencies).embedding, options.norm_eps);
  if (options.logvar_clamp > 0.0)
    stats.log_var = ag::clamp(stats.log_var, -options.logvar_clamp, options.logvar_clamp);
  return stats;
}

ag::Var reparameterize(const PosteriorStats& stats, const Matrix& eps) {
  if (stats.mu.rows() != stats.log_var.rows() || stats.mu.cols() != stats.log_var.cols())
    throw std::invalid_argument("reparameterize: mu/log_var shape mismatch");
  if (eps.rows() != stats.mu.rows() || eps.cols() != stats.mu.cols())
    throw std::invalid_argument("reparameterize: noise shape mismatch");
  ag::Var sigma = ag::exp(ag::scale(stats.log_var, 0.5));
  return stats.mu + ag::multiply_constant(sigma, eps);
}

ag::Var kl_standard_normal(const PosteriorStats& stats) {
  const double n = static_cast<double>(stats.mu.rows());
  if (n == 0) throw std::invalid_argument("kl_standard_normal: no nodes");
  ag::Var terms = ag::square(stats.mu) + ag::exp(stats.log_var) - stats.log_var;
  // sum(...) - N*d, averaged over N nodes, halved.
  const double d = static_cast<double>(stats.mu.cols());
  ag::Var total = ag::sum(terms);
  ag::Tape& tape = *total.tape();
  return ag::scale(total - tape.constant(Matrix::Constant(1, 1, n * d)), 0.5 / n);
}

double kl_standard_normal(const Matrix& mu, const Matrix& log_var) {
  ag::Tape tape;
  return kl_standard_normal(PosteriorStats{tape.constant(mu), tape.constant(log_var)}).scalar();
}

}  // namespace hgvae
