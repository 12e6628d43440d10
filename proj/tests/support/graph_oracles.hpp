#pragma once

#include <functional>
#include <random>

#include "hgvae/graph.hpp"
#include "support/fixtures.hpp"

namespace hgvae::testing {

// author -writes- paper -published_in- venue
inline HeterogeneousGraph bibliographic(int authors, int papers, int venues, double p_write, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p_write);
  std::uniform_int_distribution<int> venue_of(0, venues - 1);
  HeterogeneousGraph g;
  g.node_types = {"author", "paper", "venue"};
  g.node_counts = {authors, papers, venues};
  g.target_type = "author";
  EdgeType writes{"writes", "author", "paper", {}};
  for (int a = 0; a < authors; ++a)
    for (int p = 0; p < papers; ++p)
      if (coin(rng)) writes.edges.emplace_back(a, p);
  EdgeType published{"published_in", "paper", "venue", {}};
  for (int p = 0; p < papers; ++p) published.edges.emplace_back(p, venue_of(rng));
  g.edge_types = {writes, published};
  g.features["author"] = random_matrix(authors, 3, seed + 1);
  g.meta_paths.push_back(make_meta_path(g, "APA", {"writes", "writes"}));
  g.meta_paths.push_back(make_meta_path(g, "APVPA", {"writes", "published_in", "published_in", "writes"}));
  return g;
}

// Walks every path instance explicitly, one relation at a time.
inline BoolMatrix enumerate_paths(const HeterogeneousGraph& g, const MetaPath& path) {
  const int n = g.target_count();
  BoolMatrix adj = BoolMatrix::Constant(n, n, false);
  std::function<void(int, std::size_t, int)> walk = [&](int start, std::size_t step, int node) {
    if (step == path.edge_sequence.size()) {
      adj(start, node) = true;
      return;
    }
    const EdgeType& e = g.edge_type(path.edge_sequence[step]);
    const std::string& from = path.node_sequence[step];
    for (const auto& [s, d] : e.edges) {
      if (e.src_type == from && s == node) walk(start, step + 1, d);
      else if (e.src_type != from && d == node) walk(start, step + 1, s);
    }
  };
  for (int i = 0; i < n; ++i) walk(i, 0, i);
  for (int i = 0; i < n; ++i) adj(i, i) = true;
  return adj;
}

}  // namespace hgvae::testing
