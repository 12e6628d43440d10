#pragma once

#include <span>

#include "hgvae/autograd.hpp"
#include "hgvae/han.hpp"

namespace hgvae {

/// Diagonal Gaussian posterior per node. `log_var` is the log-variance.
struct PosteriorStats {
  ag::Var mu;
  ag::Var log_var;
};

struct VariationalOptions {
  double norm_eps = 1e-5;
  double logvar_clamp = 10.0;  // log_var limited to [-clamp, clamp]; <= 0 disables
};

/// mu = Norm(HAN_mu(H)), log_var = clamp(Norm(HAN_sigma(H))), Norm being
/// per-row standardization without affine parameters.
PosteriorStats infer_posterior(const HanLayer& mu_head, const HanLayer& logvar_head, const BoundParameters& params,
                               ag::Var h, std::span<const MetaPathAdjacency> adjacencies,
                               const VariationalOptions& options = {});

/// z = mu + exp(log_var / 2) * eps, with eps supplied by the caller.
ag::Var reparameterize(const PosteriorStats& stats, const Matrix& eps);

/// Mean over nodes of 0.5 * sum_d (mu^2 + exp(log_var) - 1 - log_var).
ag::Var kl_standard_normal(const PosteriorStats& stats);
double kl_standard_normal(const Matrix& mu, const Matrix& log_var);

}  // namespace hgvae
