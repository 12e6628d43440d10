#include <gtest/gtest.h>

#include <cmath>

#include "hgvae/han.hpp"
#include "hgvae/model.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

namespace hgvae {
namespace {

using testing::random_matrix;

MetaPathAdjacency random_adjacency(int n, double p, std::uint64_t seed, const std::string& name = "m") {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  BoolMatrix adj = testing::bool_identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) adj(i, j) = adj(j, i) = true;
  return {MetaPath{name, {}, {}}, adj};
}

struct Layer {
  HanLayer han;
  ParameterSet params;
  Layer(HanLayerSpec spec, std::uint64_t seed) : han("enc", spec) {
    Rng rng(seed);
    han.init_parameters(params, rng);
  }
};

HanLayerSpec spec(int in, int out, int paths, int heads = 1, Activation act = Activation::kElu) {
  return {in, out, paths, heads, 5, act};
}

double elu(double v) { return v > 0 ? v : std::exp(v) - 1; }

// Per-node loops over neighbours, one head.
Matrix dense_node_attention(const Matrix& x, const BoolMatrix& adj, const Matrix& w, const Matrix& a_src,
                            const Matrix& a_dst) {
  const Matrix wh = x * w;
  Matrix out = Matrix::Zero(x.rows(), w.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> e;
    std::vector<Eigen::Index> nbr;
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      if (adj(i, j)) {
        const double s = wh.row(i).dot(a_src.col(0)) + wh.row(j).dot(a_dst.col(0));
        e.push_back(s > 0 ? s : 0.2 * s);
        nbr.push_back(j);
      }
    double mx = -1e300, z = 0;
    for (double v : e) mx = std::max(mx, v);
    for (double v : e) z += std::exp(v - mx);
    for (std::size_t k = 0; k < e.size(); ++k) out.row(i) += std::exp(e[k] - mx) / z * wh.row(nbr[k]);
  }
  return out.unaryExpr([](double v) { return elu(v); });
}

TEST(NodeAttention, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Layer l(spec(4, 3, 1), seed);
    const auto adj = random_adjacency(3 + static_cast<int>(seed), 0.5, seed + 10);
    const Matrix x = random_matrix(adj.size(), 4, seed + 20);
    ag::Tape tape;
    BoundParameters b(tape, l.params);
    const NodeAttentionOutput out = l.han.node_level(b, tape.constant(x), adj, 0);
    const Matrix expected = dense_node_attention(x, adj.adjacency, l.params.at(l.han.param(0, 0, "W")),
                                                 l.params.at(l.han.param(0, 0, "a_src")),
                                                 l.params.at(l.han.param(0, 0, "a_dst")));
    EXPECT_LT((out.embedding.value() - expected).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(NodeAttention, WeightsSumToOneOverNeighbours) {
  Layer l(spec(4, 6, 1, 2), 1);
  const auto adj = random_adjacency(15, 0.3, 2);
  ag::Tape tape;
  BoundParameters b(tape, l.params);
  const NodeAttentionOutput out = l.han.node_level(b, tape.constant(random_matrix(15, 4, 3)), adj, 0);
  ASSERT_EQ(out.attention.size(), 2u);
  for (const Matrix& att : out.attention) {
    for (Eigen::Index i = 0; i < 15; ++i) {
      EXPECT_NEAR(att.row(i).sum(), 1.0, 1e-8);
      for (Eigen::Index j = 0; j < 15; ++j)
        if (!adj.adjacency(i, j)) EXPECT_EQ(att(i, j), 0.0);
    }
  }
}

TEST(NodeAttention, IsolatedNodeKeepsItsOwnProjection) {
  Layer l(spec(3, 4, 1, 1, Activation::kIdentity), 4);
  MetaPathAdjacency adj{MetaPath{"m", {}, {}}, testing::bool_identity(5)};
  const Matrix x = random_matrix(5, 3, 1);
  ag::Tape tape;
  BoundParameters b(tape, l.params);
  const NodeAttentionOutput out = l.han.node_level(b, tape.constant(x), adj, 0);
  EXPECT_LT((out.embedding.value() - x * l.params.at(l.han.param(0, 0, "W"))).norm(), 1e-12);
}

TEST(NodeAttention, UniformScoresGiveUniformWeights) {
  Layer l(spec(3, 4, 1), 4);
  l.params.at(l.han.param(0, 0, "a_src")).setZero();
  l.params.at(l.han.param(0, 0, "a_dst")).setZero();
  const auto adj = random_adjacency(10, 0.4, 8);
  ag::Tape tape;
  BoundParameters b(tape, l.params);
  const NodeAttentionOutput out = l.han.node_level(b, tape.constant(random_matrix(10, 3, 1)), adj, 0);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const double deg = adj.adjacency.row(i).cast<double>().sum();
    for (Eigen::Index j = 0; j < 10; ++j)
      if (adj.adjacency(i, j)) EXPECT_NEAR(out.attention[0](i, j), 1.0 / deg, 1e-12);
  }
}

TEST(SemanticAttention, SinglePathHasUnitWeight) {
  Layer l(spec(3, 4, 1), 2);
  ag::Tape tape;
  BoundParameters b(tape, l.params);
  const ag::Var h = tape.constant(random_matrix(6, 4, 1));
  const std::vector<ag::Var> per_path = {h};
  const SemanticAttentionOutput out = l.han.semantic_level(b, per_path);
  EXPECT_EQ(out.beta.value()(0, 0), 1.0);
  EXPECT_EQ(out.embedding.value(), h.value());
}

TEST(SemanticAttention, IdenticalPathsAreUniform) {
  Layer l(spec(3, 4, 3), 2);
  ag::Tape tape;
  BoundParameters b(tape, l.params);
  const ag::Var h = tape.constant(random_matrix(6, 4, 1));
  const std::vector<ag::Var> per_path = {h, h, h};
  const SemanticAttentionOutput out = l.han.semantic_level(b, per_path);
  for (int p = 0; p < 3; ++p) EXPECT_NEAR(out.beta.value()(0, p), 1.0 / 3.0, 1e-12);
  EXPECT_LT((out.embedding.value() - h.value()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SemanticAttention, RecomposesWeightedSum) {
  Layer l(spec(3, 4, 3), 5);
  ag::Tape tape;
  BoundParameters b(tape, l.params);
  std::vector<ag::Var> per_path;
  for (int p = 0; p < 3; ++p) per_path.push_back(tape.constant(random_matrix(7, 4, 30 + p)));
  const SemanticAttentionOutput out = l.han.semantic_level(b, per_path);

  const Matrix& w = l.params.at(l.han.semantic_param("W"));
  const Matrix& bias = l.params.at(l.han.semantic_param("b"));
  const Matrix& q = l.params.at(l.han.semantic_param("q"));
  std::vector<double> score(3), beta(3);
  double z = 0;
  for (int p = 0; p < 3; ++p) {
    const Matrix hidden = ((per_path[p].value() * w).rowwise() + bias.row(0)).array().tanh().matrix();
    score[p] = (hidden * q).mean();
    z += std::exp(score[p]);
  }
  Matrix expected = Matrix::Zero(7, 4);
  for (int p = 0; p < 3; ++p) {
    beta[p] = std::exp(score[p]) / z;
    expected += beta[p] * per_path[p].value();
    EXPECT_NEAR(out.beta.value()(0, p), beta[p], 1e-12);
    EXPECT_GE(out.beta.value()(0, p), 0.0);
  }
  EXPECT_NEAR(out.beta.value().sum(), 1.0, 1e-8);
  EXPECT_LT((out.embedding.value() - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(l.han.semantic_level(b, std::vector<ag::Var>{}), std::invalid_argument);
}

TEST(HanLayerForward, PathOrderPermutesBetaOnly) {
  Layer l(spec(4, 6, 2), 3);
  const std::vector<MetaPathAdjacency> adjs = {random_adjacency(9, 0.3, 1, "a"), random_adjacency(9, 0.5, 2, "b")};
  const std::vector<MetaPathAdjacency> swapped = {adjs[1], adjs[0]};
  ParameterSet sp = l.params;
  for (const char* leaf : {"W", "a_src", "a_dst"}) {
    sp.at(l.han.param(0, 0, leaf)) = l.params.at(l.han.param(1, 0, leaf));
    sp.at(l.han.param(1, 0, leaf)) = l.params.at(l.han.param(0, 0, leaf));
  }
  const Matrix x = random_matrix(9, 4, 4);
  ag::Tape tape;
  BoundParameters b1(tape, l.params), b2(tape, sp);
  const auto o1 = l.han.forward(b1, tape.constant(x), adjs);
  const auto o2 = l.han.forward(b2, tape.constant(x), swapped);
  EXPECT_NEAR(o1.beta.value()(0, 0), o2.beta.value()(0, 1), 1e-12);
  EXPECT_NEAR(o1.beta.value()(0, 1), o2.beta.value()(0, 0), 1e-12);
  EXPECT_LT((o1.embedding.value() - o2.embedding.value()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(HanLayerForward, GradientsMatchFiniteDifferences) {
  Layer l(spec(5, 4, 2, 2), 6);
  const std::vector<MetaPathAdjacency> adjs = {random_adjacency(12, 0.3, 1), random_adjacency(12, 0.4, 2)};
  const Matrix x = random_matrix(12, 5, 3);
  const Matrix readout = random_matrix(12, 4, 9);
  auto loss = [&](const BoundParameters& b) {
    ag::Tape& tape = *b[l.han.semantic_param("q")].tape();
    return ag::sum(ag::multiply_constant(l.han.forward(b, tape.constant(x), adjs).embedding, readout));
  };
  // Attention vectors act through the LeakyReLU kink only, so their gradients can be tiny.
  const testing::GradCheckReport r = testing::check_gradients(l.params, loss, 1e-5, 1e-4);
  EXPECT_LE(r.worst_error, 1e-4) << r.summary();
}

TEST(Encoder, DeterministicWithoutDropout) {
  const HeterogeneousGraph g = testing::tiny_graph();
  const auto adjs = meta_path_adjacencies(g);
  ModelSpec ms;
  ms.feature_dim = static_cast<int>(g.target_features().cols());
  ms.hidden_dim = 8;
  ms.semantic_dim = 4;
  ms.num_paths = static_cast<int>(adjs.size());
  const HgvaeModel model(ms);
  const ParameterSet params = model.init_parameters(1);
  ag::Tape tape;
  BoundParameters b(tape, params);
  const ag::Var x = tape.constant(g.target_features());
  EXPECT_EQ(model.encode(b, x, adjs, false, 1).value(), model.encode(b, x, adjs, false, 2).value());

  const EncodedViews v = model.make_views(b, x, adjs, 10, 11);
  EXPECT_EQ(v.h1.rows(), v.h2.rows());
  EXPECT_NE(v.h1.value(), v.h2.value());
  const EncodedViews again = model.make_views(b, x, adjs, 10, 11);
  EXPECT_EQ(v.h1.value(), again.h1.value());
  EXPECT_EQ(v.h2.value(), again.h2.value());

  ModelSpec no_drop = ms;
  no_drop.dropout = 0.0;
  const HgvaeModel plain(no_drop);
  const EncodedViews same = plain.make_views(b, x, adjs, 10, 11);
  EXPECT_EQ(same.h1.value(), same.h2.value());
  EXPECT_EQ(plain.encode(b, x, adjs, true, 3).value(), plain.encode(b, x, adjs, false, 3).value());
}

TEST(Dropout, MaskValuesAndRate) {
  Rng rng(3);
  const Matrix m = dropout_mask(200, 50, 0.5, rng);
  for (Eigen::Index i = 0; i < m.size(); ++i) EXPECT_TRUE(m(i) == 0.0 || m(i) == 2.0);
  EXPECT_NEAR((m.array() == 0.0).cast<double>().mean(), 0.5, 0.02);
}

TEST(Activation, ParseAndApply) {
  EXPECT_EQ(parse_activation("relu"), Activation::kRelu);
  EXPECT_EQ(to_string(Activation::kElu), "elu");
  EXPECT_THROW(parse_activation("gelu"), std::exception);
  ag::Tape tape;
  Matrix x(1, 2);
  x << -1.0, 2.0;
  const Matrix r = apply_activation(tape.constant(x), Activation::kRelu).value();
  EXPECT_EQ(r(0, 0), 0.0);
  EXPECT_EQ(r(0, 1), 2.0);
  EXPECT_NEAR(apply_activation(tape.constant(x), Activation::kElu).value()(0, 0), std::exp(-1.0) - 1, 1e-15);
}

}  // namespace
}  // namespace hgvae
