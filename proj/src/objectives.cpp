#include "hgvae/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <spdlog/spdlog.h>

#include "hgvae/errors.hpp"

namespace hgvae {

ag::Var info_nce(ag::Var anchor, ag::Var positive, const Matrix& negatives, double tau, bool include_positive) {
  if (!(tau > 0.0)) throw std::invalid_argument("info_nce: temperature must be positive");
  if (negatives.rows() == 0) throw std::invalid_argument("info_nce: empty negative set");
  if (anchor.rows() != positive.rows() || anchor.cols() != positive.cols())
    throw std::invalid_argument("info_nce: anchor/positive shape mismatch");
  if (negatives.cols() != anchor.cols()) throw std::invalid_argument("info_nce: negative dimension mismatch");

  ag::Tape& tape = *anchor.tape();
  ag::Var a = ag::row_l2_normalize(anchor);
  ag::Var p = ag::row_l2_normalize(positive);
  ag::Var n = ag::row_l2_normalize(tape.constant(negatives));
  ag::Var pos = ag::scale(ag::row_dot(a, p), 1.0 / tau);
  ag::Var neg = ag::scale(ag::matmul(a, ag::transpose(n)), 1.0 / tau);
  if (include_positive) {
    const ag::Var parts[] = {pos, neg};
    neg = ag::concat_cols(parts);
  }
  return ag::mean(ag::logsumexp_rows(neg) - pos);
}

EsceVariant parse_esce_variant(std::string_view name) {
  if (name == "literal") return EsceVariant::kLiteral;
  if (name == "focal") return EsceVariant::kFocal;
  throw ConfigError("unknown ESCE variant '" + std::string(name) + "' (expected literal|focal)");
}

std::string to_string(EsceVariant v) { return v == EsceVariant::kLiteral ? "literal" : "focal"; }

double esce_term(double cosine, double delta, EsceVariant variant) {
  const double c = cosine < 0.0 ? kEsceFloor : cosine;
  const double u = 1.0 - c;
  const double weight = std::pow(u, delta);
  if (variant == EsceVariant::kLiteral) return weight * std::log(std::max(u, kEsceFloor));
  return weight * -std::log(std::max(c, kEsceFloor));
}

double esce_term_derivative(double cosine, double delta, EsceVariant variant) {
  if (cosine < 0.0) return 0.0;  // clamped to a constant
  const double c = cosine;
  const double u = 1.0 - c;
  const double dweight_dc = -delta * std::pow(u, delta - 1.0);
  if (variant == EsceVariant::kLiteral) {
    const double log_u = std::log(std::max(u, kEsceFloor));
    const double dlog_dc = u > kEsceFloor ? -1.0 / u : 0.0;
    return dweight_dc * log_u + std::pow(u, delta) * dlog_dc;
  }
  const double neg_log_c = -std::log(std::max(c, kEsceFloor));
  const double dneglog_dc = c > kEsceFloor ? -1.0 / c : 0.0;
  return dweight_dc * neg_log_c + std::pow(u, delta) * dneglog_dc;
}

ag::Var esce(const Matrix& x, ag::Var x_hat, std::span<const int> masked, double delta, EsceVariant variant,
             int* skipped) {
  if (!(delta >= 1.0)) throw std::invalid_argument("esce: delta must be >= 1");
  if (masked.empty()) throw std::invalid_argument("esce: masked set is empty");
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols())
    throw std::invalid_argument("esce: reconstruction shape mismatch");

  constexpr double kZeroNorm = 1e-12;
  std::vector<int> kept;
  kept.reserve(masked.size());
  for (int i : masked) {
    if (x.row(i).norm() < kZeroNorm || x_hat.value().row(i).norm() < kZeroNorm) continue;
    kept.push_back(i);
  }
  const int n_skipped = static_cast<int>(masked.size() - kept.size());
  if (skipped) *skipped = n_skipped;
  if (n_skipped > 0) spdlog::warn("esce: skipped {} masked row(s) with zero norm", n_skipped);

  ag::Tape& tape = *x_hat.tape();
  if (kept.empty()) return tape.constant(Matrix::Zero(1, 1));

  Matrix target(static_cast<Eigen::Index>(kept.size()), x.cols());
  for (std::size_t k = 0; k < kept.size(); ++k) target.row(static_cast<Eigen::Index>(k)) = x.row(kept[k]).normalized();
  ag::Var recon = ag::row_l2_normalize(ag::select_rows(x_hat, kept));
  ag::Var cosine = ag::row_dot(recon, tape.constant(std::move(target)));
  ag::Var terms = ag::map(
      cosine, [delta, variant](double c) { return esce_term(c, delta, variant); },
      [delta, variant](double c) { return esce_term_derivative(c, delta, variant); });
  return ag::mean(terms);
}

double focal_loss(double p, double delta) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("focal_loss: p must lie in (0, 1]");
  return -std::pow(1.0 - p, delta) * std::log(p);
}

LossBreakdown total_loss(double l_elbo, double l_pnsm, double l_esce, const LossWeights& w) {
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0) throw std::invalid_argument("loss weights must be non-negative");
  return LossBreakdown{l_elbo, l_pnsm, l_esce, w.alpha * l_elbo + w.beta * l_pnsm + w.gamma * l_esce, w};
}

ag::Var total_loss(ag::Var l_elbo, ag::Var l_pnsm, ag::Var l_esce, const LossWeights& w) {
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0) throw std::invalid_argument("loss weights must be non-negative");
  return ag::scale(l_elbo, w.alpha) + ag::scale(l_pnsm, w.beta) + ag::scale(l_esce, w.gamma);
}

}  // namespace hgvae
