#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hgvae/config.hpp"
#include "hgvae/evaluation.hpp"
#include "hgvae/graph.hpp"
#include "hgvae/trainer.hpp"

namespace hgvae {

struct TrainOutcome {
  TrainerState state;
  Matrix embeddings;
};

/// Trains on `graph`, writing into `out_dir` (when nonempty) the resolved
/// config, periodic and final checkpoints, the loss CSV and the embeddings.
TrainOutcome train_and_embed(const TrainingConfig& config, const HeterogeneousGraph& graph,
                             const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
                             std::optional<TrainerState> resume_from = std::nullopt);

struct EvalOptions {
  bool classify = true;
  bool cluster = false;
  std::vector<int> split_sizes = {20, 40, 60};
  int repeats = 5;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Splits missing from the graph are skipped with a warning.
EvalReport evaluate(const Matrix& embeddings, const HeterogeneousGraph& graph, const EvalOptions& options);

/// Best validation Micro-F1 of the probe over the regularization grid.
double validation_micro_f1(const Matrix& embeddings, const HeterogeneousGraph& graph, const LabelSplit& split,
                           std::uint64_t seed);

/// Maps a sweep parameter name (kappa, hidden_dim, num_negatives) to its config key.
std::string sweep_key(const std::string& param);

struct SweepPoint {
  std::string value;
  EvalReport report;
};

/// One training run and report per value, run sequentially.
std::vector<SweepPoint> run_sweep(const TrainingConfig& base, const HeterogeneousGraph& graph,
                                  const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
                                  const std::string& param, const std::vector<std::string>& values,
                                  const EvalOptions& eval);

}  // namespace hgvae
