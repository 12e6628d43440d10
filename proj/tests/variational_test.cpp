#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hgvae/variational.hpp"
#include "support/fixtures.hpp"

namespace hgvae {
namespace {

using testing::random_matrix;

struct Heads {
  HanLayer mu{"mu", {4, 6, 2, 1, 3, Activation::kIdentity}};
  HanLayer logvar{"logvar", {4, 6, 2, 1, 3, Activation::kIdentity}};
  ParameterSet params;

  explicit Heads(std::uint64_t seed) {
    Rng rng(seed);
    mu.init_parameters(params, rng);
    logvar.init_parameters(params, rng);
  }
};

std::vector<MetaPathAdjacency> two_paths(int n) {
  std::vector<MetaPathAdjacency> out;
  for (int p = 0; p < 2; ++p) {
    BoolMatrix adj = testing::bool_identity(n);
    for (int i = 0; i < n; ++i) adj(i, (i + p + 1) % n) = adj((i + p + 1) % n, i) = true;
    out.push_back({MetaPath{"p" + std::to_string(p), {}, {}}, adj});
  }
  return out;
}

TEST(Kl, StandardNormalIsZero) {
  EXPECT_EQ(kl_standard_normal(Matrix::Zero(5, 4), Matrix::Zero(5, 4)), 0.0);
}

TEST(Kl, UnitMeanGivesHalfPerDimension) {
  EXPECT_NEAR(kl_standard_normal(Matrix::Ones(1, 1), Matrix::Zero(1, 1)), 0.5, 1e-9);
  EXPECT_NEAR(kl_standard_normal(Matrix::Ones(3, 7), Matrix::Zero(3, 7)), 0.5 * 7, 1e-9);
}

TEST(Kl, MatchesPerElementFormulaAndIsNonnegative) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix mu = random_matrix(6, 5, seed);
    const Matrix lv = random_matrix(6, 5, seed + 100);
    double expected = 0.0;
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 5; ++j) expected += 0.5 * (mu(i, j) * mu(i, j) + std::exp(lv(i, j)) - 1 - lv(i, j));
    expected /= 6;
    const double kl = kl_standard_normal(mu, lv);
    EXPECT_NEAR(kl, expected, 1e-9);
    EXPECT_GE(kl, 0.0);
  }
}

TEST(Kl, InvariantUnderNodePermutation) {
  const Matrix mu = random_matrix(6, 3, 1);
  const Matrix lv = random_matrix(6, 3, 2);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 3, 0, 5, 1, 4, 2;
  EXPECT_NEAR(kl_standard_normal(perm * mu, perm * lv), kl_standard_normal(mu, lv), 1e-12);
}

TEST(Kl, MatchesMonteCarloEstimate) {
  Matrix mu(1, 3);
  mu << 0.7, -0.4, 1.2;
  Matrix lv(1, 3);
  lv << -0.5, 0.3, 0.9;
  const int draws = 1000000;
  Rng rng(2024);
  std::normal_distribution<double> normal;
  double acc = 0.0;
  for (int s = 0; s < draws; ++s)
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double sigma = std::exp(0.5 * lv(0, j));
      const double eps = normal(rng);
      const double z = mu(0, j) + sigma * eps;
      // log q - log p for one coordinate; the 2*pi terms cancel.
      acc += (-0.5 * eps * eps - std::log(sigma)) - (-0.5 * z * z);
    }
  const double estimate = acc / draws;
  const double exact = kl_standard_normal(mu, lv);
  EXPECT_NEAR(estimate / exact, 1.0, 0.01);
}

TEST(Reparameterize, FixedNoiseGivesMeanPlusSigma) {
  ag::Tape tape;
  const Matrix mu = random_matrix(3, 2, 1);
  const Matrix lv = random_matrix(3, 2, 2);
  const Matrix z = reparameterize({tape.constant(mu), tape.constant(lv)}, Matrix::Ones(3, 2)).value();
  EXPECT_LT((z - (mu.array() + (0.5 * lv.array()).exp()).matrix()).norm(), 1e-14);
}

TEST(Reparameterize, VanishingVarianceReturnsMean) {
  ag::Tape tape;
  const Matrix mu = random_matrix(3, 2, 1);
  const Matrix z =
      reparameterize({tape.constant(mu), tape.constant(Matrix::Constant(3, 2, -60.0))}, random_matrix(3, 2, 5)).value();
  EXPECT_LT((z - mu).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Reparameterize, SampleMomentsMatchPosterior) {
  const int draws = 100000;
  Matrix mu(1, 2);
  mu << 1.5, -0.5;
  Matrix lv(1, 2);
  lv << std::log(0.36), std::log(2.25);
  Rng rng(77);
  Eigen::RowVector2d sum = Eigen::RowVector2d::Zero();
  Eigen::RowVector2d sq = Eigen::RowVector2d::Zero();
  for (int s = 0; s < draws; ++s) {
    ag::Tape tape;
    const Matrix z = reparameterize({tape.constant(mu), tape.constant(lv)}, standard_normal(1, 2, rng)).value();
    sum += z.row(0);
    sq += z.row(0).cwiseProduct(z.row(0));
  }
  for (Eigen::Index j = 0; j < 2; ++j) {
    const double sigma2 = std::exp(lv(0, j));
    const double mean = sum(j) / draws;
    const double var = sq(j) / draws - mean * mean;
    EXPECT_LE(std::abs(mean - mu(0, j)), 3 * std::sqrt(sigma2) / std::sqrt(static_cast<double>(draws)));
    EXPECT_NEAR(var / sigma2, 1.0, 0.02);
  }
}

TEST(Reparameterize, GradientsAreIdentityAndHalfSigmaEps) {
  ag::Tape tape;
  ag::Var mu = tape.variable(random_matrix(2, 3, 1));
  ag::Var lv = tape.variable(random_matrix(2, 3, 2));
  const Matrix eps = random_matrix(2, 3, 3);
  tape.backward(ag::sum(reparameterize({mu, lv}, eps)));
  EXPECT_EQ(mu.grad(), Matrix::Ones(2, 3));
  const Matrix expected = (0.5 * (0.5 * lv.value().array()).exp() * eps.array()).matrix();
  EXPECT_LT((lv.grad() - expected).norm(), 1e-14);
}

TEST(Reparameterize, ShapeMismatchThrows) {
  ag::Tape tape;
  EXPECT_THROW(reparameterize({tape.constant(Matrix::Zero(2, 2)), tape.constant(Matrix::Zero(2, 3))}, Matrix::Zero(2, 2)),
               std::invalid_argument);
  EXPECT_THROW(reparameterize({tape.constant(Matrix::Zero(2, 2)), tape.constant(Matrix::Zero(2, 2))}, Matrix::Zero(3, 2)),
               std::invalid_argument);
}

TEST(InferPosterior, RowsAreStandardized) {
  Heads heads(3);
  const auto adjs = two_paths(8);
  ag::Tape tape;
  BoundParameters b(tape, heads.params);
  const PosteriorStats s = infer_posterior(heads.mu, heads.logvar, b, tape.constant(random_matrix(8, 4, 9)), adjs);
  ASSERT_EQ(s.mu.rows(), 8);
  ASSERT_EQ(s.mu.cols(), 6);
  EXPECT_EQ(s.log_var.cols(), 6);
  for (const Matrix& m : {s.mu.value(), s.log_var.value()})
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double mean = m.row(i).mean();
      const double var = (m.row(i).array() - mean).square().mean();
      EXPECT_NEAR(mean, 0.0, 1e-6);
      EXPECT_NEAR(var, 1.0, 1e-3);  // eps 1e-5 in the denominator
    }
}

TEST(InferPosterior, ZeroInputAndZeroHeadsGiveStandardNormal) {
  Heads heads(3);
  for (auto& [name, value] : heads.params) value.setZero();
  const auto adjs = two_paths(5);
  ag::Tape tape;
  BoundParameters b(tape, heads.params);
  const PosteriorStats s = infer_posterior(heads.mu, heads.logvar, b, tape.constant(Matrix::Zero(5, 4)), adjs);
  EXPECT_EQ(s.mu.value(), Matrix::Zero(5, 6));
  EXPECT_EQ(s.log_var.value(), Matrix::Zero(5, 6));
}

TEST(InferPosterior, LogVarClampBoundsValues) {
  Heads heads(3);
  const auto adjs = two_paths(6);
  ag::Tape tape;
  BoundParameters b(tape, heads.params);
  const PosteriorStats s =
      infer_posterior(heads.mu, heads.logvar, b, tape.constant(random_matrix(6, 4, 2)), adjs, {1e-5, 0.5});
  EXPECT_LE(s.log_var.value().cwiseAbs().maxCoeff(), 0.5);
  EXPECT_TRUE(s.log_var.value().allFinite());
}

}  // namespace
}  // namespace hgvae
