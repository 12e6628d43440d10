#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hgvae/errors.hpp"
#include "hgvae/synthetic.hpp"
#include "support/fixtures.hpp"

namespace hgvae {
namespace {

using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SyntheticSpec small_spec(std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.nodes_per_class = 30;
  spec.feature_dim = 8;
  spec.signal_dim = 4;
  spec.seed = seed;
  return spec;
}

TEST(Synthetic, DefaultShape) {
  SyntheticSpec spec;
  spec.seed = 3;
  const HeterogeneousGraph g = generate_synthetic(spec);
  EXPECT_EQ(g.target_count(), 400);
  EXPECT_EQ(g.num_classes, 4);
  EXPECT_EQ(g.target_features().cols(), 64);
  EXPECT_EQ(g.meta_paths.size(), 2u);
  EXPECT_EQ(g.node_types.size(), 3u);
  EXPECT_NO_THROW(g.validate());
  std::set<int> sizes;
  for (const LabelSplit& s : g.splits) sizes.insert(s.split_size);
  EXPECT_EQ(sizes, std::set<int>({20, 40, 60}));
}

TEST(Synthetic, PlantedPartitionLimitIsBlockDiagonal) {
  SyntheticSpec spec = small_spec();
  spec.feature_noise = 0.0;
  for (AuxTypeSpec& a : spec.aux_types) {
    a.p_in = 1.0;
    a.p_out = 0.0;
  }
  const HeterogeneousGraph g = generate_synthetic(spec);
  for (const MetaPathAdjacency& a : meta_path_adjacencies(g))
    for (Eigen::Index i = 0; i < a.adjacency.rows(); ++i)
      for (Eigen::Index j = 0; j < a.adjacency.cols(); ++j)
        EXPECT_EQ(a.adjacency(i, j), g.labels[i] == g.labels[j]) << i << "," << j;
  // Without noise every node sits on its class mean.
  const Matrix& x = g.target_features();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      if (g.labels[i] == g.labels[j]) EXPECT_EQ(x.row(i), x.row(j));
}

TEST(Synthetic, LinkAssortativityMatchesExpectation) {
  SyntheticSpec spec;
  double in_class = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const HeterogeneousGraph g = generate_synthetic(spec);
    for (const EdgeType& e : g.edge_types) {
      ASSERT_EQ(e.src_type, g.target_type);
      for (const auto& [t, a] : e.edges) {
        in_class += g.labels[t] == a % spec.n_classes;
        total += 1;
      }
    }
  }
  const double p_in = 0.15, p_out = 0.02;
  const double expected = p_in / (p_in + (spec.n_classes - 1) * p_out);
  EXPECT_NEAR(in_class / total / expected, 1.0, 0.03);
}

TEST(Synthetic, SameSpecWritesIdenticalDirectories) {
  TempDir a("syn"), b("syn");
  gen_synthetic(small_spec(9), a.path());
  gen_synthetic(small_spec(9), b.path());
  std::set<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(a.path()))
    names.insert(entry.path().filename().string());
  EXPECT_GE(names.size(), 5u);
  for (const std::string& name : names) EXPECT_EQ(slurp(a.path() / name), slurp(b.path() / name)) << name;

  TempDir c("syn");
  gen_synthetic(small_spec(10), c.path());
  EXPECT_NE(slurp(a.path() / "features_target.csv"), slurp(c.path() / "features_target.csv"));
}

TEST(Synthetic, SplitsAreDisjointAndStratified) {
  const HeterogeneousGraph g = generate_synthetic(small_spec());
  ASSERT_FALSE(g.splits.empty());
  for (const LabelSplit& s : g.splits) {
    std::set<int> train(s.train_ids.begin(), s.train_ids.end());
    std::set<int> val(s.val_ids.begin(), s.val_ids.end());
    std::set<int> test(s.test_ids.begin(), s.test_ids.end());
    for (int id : val) EXPECT_FALSE(train.count(id) || test.count(id));
    for (int id : test) EXPECT_FALSE(train.count(id));
    std::vector<int> per_class(4, 0);
    for (int id : train) ++per_class[g.labels[id]];
    for (int c : per_class) EXPECT_EQ(c, s.split_size);
    EXPECT_LE(static_cast<int>(val.size()) - static_cast<int>(test.size()), 1);
    EXPECT_EQ(train.size() + val.size() + test.size(), 120u);
  }
}

TEST(Synthetic, MakeSplitCapsAtOneThousand) {
  std::vector<int> labels(3000);
  for (int i = 0; i < 3000; ++i) labels[i] = i % 3;
  const LabelSplit s = make_split(labels, 3, 20, 1);
  EXPECT_EQ(s.val_ids.size(), 1000u);
  EXPECT_EQ(s.test_ids.size(), 1000u);
}

TEST(Synthetic, InvalidSpecsAreConfigErrors) {
  SyntheticSpec spec = small_spec();
  spec.aux_types[0].p_out = 0.5;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
  spec = small_spec();
  spec.split_sizes = std::vector<int>{40};
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
  spec = small_spec();
  spec.aux_types.pop_back();
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
  EXPECT_THROW(SyntheticSpec::from_json({{"n_clases", 3}}), ConfigError);
}

TEST(Synthetic, SpecJsonRoundTrip) {
  SyntheticSpec spec = small_spec(4);
  spec.class_separation = 0.7;
  spec.split_sizes = std::vector<int>{5, 10};
  const SyntheticSpec back = SyntheticSpec::from_json(spec.to_json());
  EXPECT_EQ(back.to_json(), spec.to_json());
}

}  // namespace
}  // namespace hgvae
