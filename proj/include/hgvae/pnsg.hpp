#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "hgvae/autograd.hpp"

namespace hgvae {

/// Negative rows shared by every anchor in one epoch, plus where they came from.
struct NegativeBatch {
  Matrix samples;      // m x d
  int n_dropout = 0;   // rows taken from dropout-corrupted anchors
  int n_vi = 0;        // rows drawn from the shifted posterior
  int n_noise = 0;     // standard normal rows (noise mode only)
  double lambda = 1.0;
  double kappa = 1.0;
};

/// How negatives are produced. kProgressive is the full mixing scheme; the rest
/// are the ablation variants.
enum class NegativeMode { kProgressive, kNoise, kDropoutOnly, kViOnly, kUnshifted };

NegativeMode parse_negative_mode(std::string_view name);
std::string to_string(NegativeMode mode);

struct NegativeOptions {
  int num_negatives = 20;
  double kappa = 2.0;
  double dropout_rate = 0.2;
};

/// 1 - t/T.
double lambda_schedule(int epoch, int total_epochs);

/// m rows sampled uniformly (with replacement) from h1, each with inverted dropout.
Matrix dropout_negatives(const Matrix& h1, double rate, int m, std::uint64_t seed);

/// kappa * mu.
Matrix shifted_mean(const Matrix& mu, double kappa);

/// m rows, each mu_star[i] + exp(log_var[i] / 2) * eps for a uniformly sampled node i.
Matrix vi_negatives(const Matrix& mu_star, const Matrix& log_var, int m, std::uint64_t seed);

/// round(lambda * m) dropout rows followed by m - round(lambda * m) VI rows.
NegativeBatch assemble_negatives(const Matrix& h1, const Matrix& mu, const Matrix& log_var, int epoch,
                                 int total_epochs, const NegativeOptions& options, std::uint64_t seed);

/// Dispatches on mode. kDropoutOnly pins lambda to 1, kViOnly to 0, kUnshifted
/// is kViOnly with kappa = 1, kNoise draws i.i.d. standard normal rows.
NegativeBatch generate_negatives(NegativeMode mode, const Matrix& h1, const Matrix& mu, const Matrix& log_var,
                                 int epoch, int total_epochs, const NegativeOptions& options, std::uint64_t seed);

}  // namespace hgvae
