#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgvae/autograd.hpp"
#include "hgvae/graph.hpp"

namespace hgvae {

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

/// Micro-F1 from pooled counts, Macro-F1 as the unweighted mean over all
/// `n_classes` (a class with no support and no predictions scores 0).
F1Scores f1_scores(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over repeats
};

MeanStd mean_std(std::span<const double> values);

/// Multinomial logistic regression with bias and L2 penalty on the weights,
/// fitted by accelerated full-batch gradient descent.
class LogisticRegression {
 public:
  struct Options {
    double l2 = 1e-2;
    int max_iter = 1000;
    double tol = 1e-7;  // stop when the gradient norm falls below this
  };

  LogisticRegression(int n_classes, Options options) : n_classes_(n_classes), options_(options) {}

  /// `init_seed` draws the small random starting weights.
  void fit(const Matrix& x, std::span<const int> y, std::uint64_t init_seed);
  Matrix decision_function(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;

  const Matrix& weights() const { return weights_; }  // (d + 1) x C, bias in the last row

 private:
  int n_classes_;
  Options options_;
  Matrix weights_;
};

struct ProbeOptions {
  std::vector<double> l2_grid = {1e-3, 1e-2, 1e-1, 1.0};
  int repeats = 5;
  std::uint64_t seed = 0;
  int max_iter = 1000;
};

struct ProbeResult {
  int split_size = 0;
  MeanStd micro;
  MeanStd macro;
  std::vector<double> micro_runs;
  std::vector<double> macro_runs;
  std::vector<double> chosen_l2;
  std::vector<std::uint64_t> seeds;
};

/// Fits on the train ids, picks the penalty by validation Micro-F1 and reports
/// test scores. Features are centred on the train mean and divided by their
/// overall RMS first. Throws DataError when a class is missing from train.
ProbeResult linear_probe(const Matrix& embeddings, std::span<const int> labels, int n_classes,
                         const LabelSplit& split, const ProbeOptions& options = {});

struct KMeansResult {
  std::vector<int> assignment;
  Matrix centroids;
  double inertia = 0.0;
};

/// k-means++ seeding followed by Lloyd iterations; best inertia over `restarts`.
KMeansResult kmeans(const Matrix& x, int k, int restarts, std::uint64_t seed, int max_iter = 300);

/// Mutual information normalized by the arithmetic mean of the two entropies.
double nmi(std::span<const int> a, std::span<const int> b);
/// Adjusted Rand index; 1 for identical partitions, 0 in expectation by chance.
double ari(std::span<const int> a, std::span<const int> b);

struct ClusterResult {
  MeanStd nmi;
  MeanStd ari;
  std::vector<std::uint64_t> seeds;
};

/// Clusters every labeled row into k groups, `repeats` times with 10 restarts each.
ClusterResult cluster_eval(const Matrix& embeddings, std::span<const int> labels, int k, int repeats,
                           std::uint64_t seed);

/// Mean silhouette coefficient under Euclidean distance.
double silhouette(const Matrix& x, std::span<const int> labels);

struct EmbeddingTable {
  std::vector<int> node_ids;
  std::vector<int> labels;  // -1 when unknown
  Matrix values;
};

/// CSV `node_id,label,dim_0..dim_{d-1}`.
void export_embeddings(const Matrix& embeddings, std::span<const int> labels, const std::filesystem::path& path);
EmbeddingTable read_embeddings(const std::filesystem::path& path);

struct EvalReport {
  std::string dataset;
  std::string config_hash;
  int repeats = 0;
  std::vector<ProbeResult> classification;
  std::optional<ClusterResult> clustering;

  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

}  // namespace hgvae
