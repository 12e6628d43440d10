#pragma once

#include <span>
#include <string>
#include <string_view>

#include "hgvae/autograd.hpp"

namespace hgvae {

/// Contrastive loss with cosine similarity. For each anchor row u:
///   -log( exp(s(u,u+)/tau) / sum_k exp(s(u,k)/tau) )
/// with k over the shared negative rows (plus the positive when
/// `include_positive`). Negatives are constants. Returns the mean over anchors.
ag::Var info_nce(ag::Var anchor, ag::Var positive, const Matrix& negatives, double tau,
                 bool include_positive = false);

enum class EsceVariant {
  kLiteral,  // (1-c)^delta * log(1-c)
  kFocal,    // (1-c)^delta * -log(c)
};

EsceVariant parse_esce_variant(std::string_view name);
std::string to_string(EsceVariant v);

/// Floor applied to negative cosines and to every log argument.
inline constexpr double kEsceFloor = 1e-6;

/// Per-row reconstruction term for cosine c, and its derivative d/dc.
double esce_term(double cosine, double delta, EsceVariant variant);
double esce_term_derivative(double cosine, double delta, EsceVariant variant);

/// Mean of esce_term(cos(x_i, x_hat_i)) over the masked rows. Rows where
/// either side has zero norm are skipped (reported through `skipped`).
ag::Var esce(const Matrix& x, ag::Var x_hat, std::span<const int> masked, double delta, EsceVariant variant,
             int* skipped = nullptr);

/// -(1-p)^delta * log(p).
double focal_loss(double p, double delta);

struct LossWeights {
  double alpha = 1.0;  // KL term
  double beta = 1.0;   // contrastive term
  double gamma = 1.0;  // reconstruction term
};

struct LossBreakdown {
  double l_elbo = 0.0;
  double l_pnsm = 0.0;
  double l_esce = 0.0;
  double total = 0.0;
  LossWeights weights;
};

LossBreakdown total_loss(double l_elbo, double l_pnsm, double l_esce, const LossWeights& w);
ag::Var total_loss(ag::Var l_elbo, ag::Var l_pnsm, ag::Var l_esce, const LossWeights& w);

}  // namespace hgvae
