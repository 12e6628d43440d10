#include <gtest/gtest.h>

#include <limits>

#include <fstream>
#include <functional>
#include <random>
#include <set>

#include "hgvae/errors.hpp"
#include "hgvae/graph.hpp"
#include "support/fixtures.hpp"
#include "support/graph_oracles.hpp"

namespace hgvae {
namespace {

using testing::bibliographic;
using testing::enumerate_paths;
using testing::TempDir;

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

TEST(MetaPath, NodeSequenceFollowsRelations) {
  const HeterogeneousGraph g = bibliographic(4, 5, 2, 0.3, 1);
  EXPECT_EQ(g.meta_paths[1].node_sequence,
            (std::vector<std::string>{"author", "paper", "venue", "paper", "author"}));
}

TEST(MetaPath, UnknownOrDisconnectedRelationIsSchemaError) {
  const HeterogeneousGraph g = bibliographic(4, 5, 2, 0.3, 1);
  EXPECT_THROW(make_meta_path(g, "bad", {"writes", "cites"}), SchemaError);
  EXPECT_THROW(make_meta_path(g, "bad", {"published_in", "writes"}), SchemaError);
  EXPECT_THROW(make_meta_path(g, "short", {"writes"}), SchemaError);
  // Ends on paper, not on the target type.
  EXPECT_THROW(make_meta_path(g, "open", {"writes", "published_in", "published_in"}), SchemaError);
}

TEST(MetaPathAdjacency, SharedPaperLinksAuthors) {
  HeterogeneousGraph g;
  g.node_types = {"author", "paper"};
  g.node_counts = {3, 2};
  g.target_type = "author";
  g.edge_types = {{"writes", "author", "paper", {{0, 0}, {1, 0}, {2, 1}}}};
  const MetaPathAdjacency a = meta_path_adjacency(g, make_meta_path(g, "APA", {"writes", "writes"}));
  EXPECT_TRUE(a.adjacency(0, 1));
  EXPECT_TRUE(a.adjacency(1, 0));
  EXPECT_FALSE(a.adjacency(0, 2));
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(a.adjacency(i, i));
}

TEST(MetaPathAdjacency, NoEdgesGivesIdentity) {
  HeterogeneousGraph g = bibliographic(5, 4, 2, 0.0, 2);
  for (EdgeType& e : g.edge_types) e.edges.clear();
  for (const MetaPathAdjacency& a : meta_path_adjacencies(g))
    EXPECT_TRUE(testing::same_pattern(a.adjacency, testing::bool_identity(5)));
}

TEST(MetaPathAdjacency, MatchesPathEnumeration) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const HeterogeneousGraph g = bibliographic(10, 8, 3, 0.15, seed);
    for (const MetaPath& p : g.meta_paths) {
      const MetaPathAdjacency a = meta_path_adjacency(g, p);
      EXPECT_TRUE(testing::same_pattern(a.adjacency, enumerate_paths(g, p))) << p.name << " seed " << seed;
      EXPECT_TRUE(testing::same_pattern(a.adjacency, a.adjacency.transpose())) << "palindromic path must be symmetric";
    }
  }
}

TEST(MetaPathAdjacency, MatchesPathEnumerationUpToFiftyNodes) {
  const HeterogeneousGraph g = bibliographic(50, 30, 5, 0.05, 99);
  for (const MetaPath& p : g.meta_paths) EXPECT_TRUE(testing::same_pattern(meta_path_adjacency(g, p).adjacency, enumerate_paths(g, p)));
}

TEST(Graph, HeterogeneityCount) {
  HeterogeneousGraph g;
  g.node_types = {"a"};
  g.node_counts = {2};
  g.edge_types = {{"e", "a", "a", {}}};
  EXPECT_FALSE(g.is_heterogeneous());
  EXPECT_TRUE(bibliographic(3, 3, 1, 0.5, 0).is_heterogeneous());
}

TEST(Graph, ValidateRejectsBrokenInvariants) {
  HeterogeneousGraph g = bibliographic(4, 5, 2, 0.3, 3);
  g.edge_types[0].edges.emplace_back(4, 0);
  EXPECT_THROW(g.validate(), DataError);

  g = bibliographic(4, 5, 2, 0.3, 3);
  g.features["author"](1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(g.validate(), DataError);

  g = bibliographic(4, 5, 2, 0.3, 3);
  g.splits = {{20, {0, 1}, {1}, {2}}};
  EXPECT_THROW(g.validate(), DataError);
}

TEST(Dataset, RoundTripsFieldByField) {
  TempDir dir("graph_roundtrip");
  HeterogeneousGraph g = testing::tiny_graph(8, 3, 4, 11);
  g.splits = {{2, {0, 1, 2, 3, 4, 5}, {6, 7, 8}, {9, 10, 11}}};
  write_dataset(g, dir.path());
  const HeterogeneousGraph back = load_dataset(dir.path());
  EXPECT_TRUE(back == g);
  EXPECT_TRUE(load_dataset(dir.path()) == back);
}

TEST(Dataset, ZeroEdgesLoads) {
  TempDir dir("graph_noedges");
  HeterogeneousGraph g = bibliographic(4, 3, 2, 0.0, 5);
  for (EdgeType& e : g.edge_types) e.edges.clear();
  write_dataset(g, dir.path());
  const HeterogeneousGraph back = load_dataset(dir.path());
  for (const MetaPathAdjacency& a : meta_path_adjacencies(back)) EXPECT_TRUE(testing::same_pattern(a.adjacency, testing::bool_identity(4)));
}

class DatasetErrors : public ::testing::Test {
 protected:
  void SetUp() override { write_dataset(bibliographic(4, 5, 2, 0.5, 8), dir_.path()); }
  TempDir dir_{"graph_errors"};
};

TEST_F(DatasetErrors, MissingSchema) {
  std::filesystem::remove(dir_ / "schema.json");
  EXPECT_THROW(load_dataset(dir_.path()), MissingFileError);
}

TEST_F(DatasetErrors, MissingTargetFeatures) {
  std::filesystem::remove(dir_ / "features_author.csv");
  try {
    load_dataset(dir_.path());
    FAIL() << "expected MissingFileError";
  } catch (const MissingFileError& e) {
    EXPECT_NE(e.path().find("features_author.csv"), std::string::npos);
  }
}

TEST_F(DatasetErrors, FeatureRowCountMismatch) {
  write_text(dir_ / "features_author.csv", "1,2,3\n4,5,6\n");
  try {
    load_dataset(dir_.path());
    FAIL() << "expected ShapeMismatchError";
  } catch (const ShapeMismatchError& e) {
    EXPECT_NE(e.file().find("features_author.csv"), std::string::npos);
  }
}

TEST_F(DatasetErrors, DanglingEdgeReportsLine) {
  write_text(dir_ / "edges_writes.csv", "0,0\n1,1\n2,7\n");
  try {
    load_dataset(dir_.path());
    FAIL() << "expected DanglingEdgeError";
  } catch (const DanglingEdgeError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(e.file().find("edges_writes.csv"), std::string::npos);
  }
}

TEST_F(DatasetErrors, NonNumericFeature) {
  write_text(dir_ / "features_author.csv", "1,2,3\n4,x,6\n1,1,1\n2,2,2\n");
  try {
    load_dataset(dir_.path());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST_F(DatasetErrors, NonFiniteFeature) {
  write_text(dir_ / "features_author.csv", "1,2,3\n4,inf,6\n1,1,1\n2,2,2\n");
  EXPECT_THROW(load_dataset(dir_.path()), ParseError);
}

TEST_F(DatasetErrors, ErrorKindsAreDistinct) {
  write_text(dir_ / "edges_writes.csv", "0,9\n");
  EXPECT_THROW(
      {
        try {
          load_dataset(dir_.path());
        } catch (const ShapeMismatchError&) {
          FAIL() << "dangling edge reported as shape mismatch";
        }
      },
      DanglingEdgeError);
}

}  // namespace
}  // namespace hgvae
