#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "hgvae/config.hpp"
#include "hgvae/graph.hpp"
#include "hgvae/model.hpp"
#include "hgvae/objectives.hpp"
#include "hgvae/optimizer.hpp"
#include "hgvae/pnsg.hpp"

namespace hgvae {

struct EpochRecord {
  int epoch = 0;
  LossBreakdown loss;
  double lambda = 0.0;
  int n_dropout = 0;
  int n_vi = 0;
  int masked = 0;
};

struct TrainerState {
  ParameterSet params;
  Adam optimizer;
  int epoch = 0;  // next epoch to run
  std::vector<EpochRecord> history;
};

/// Everything an epoch needs about the graph, precomputed once.
struct TrainingData {
  Matrix features;
  std::vector<MetaPathAdjacency> adjacencies;

  static TrainingData from_graph(const HeterogeneousGraph& graph);
};

struct TrainHooks {
  /// Called after every epoch.
  std::function<void(const TrainerState&)> on_epoch;
  /// Validation score for early stopping, higher is better.
  std::function<double(const Matrix& embeddings)> validate;
};

class Trainer {
 public:
  Trainer(TrainingConfig config, TrainingData data);

  const TrainingConfig& config() const { return config_; }
  const HgvaeModel& model() const { return model_; }
  const TrainingData& data() const { return data_; }

  TrainerState initial_state() const;

  struct EpochLoss {
    ag::Var total;
    ag::Var kl;
    ag::Var contrastive;
    ag::Var reconstruction;
    NegativeBatch negatives;
    int masked = 0;
  };
  /// Records the full objective of epoch t on the parameters' tape without
  /// stepping. `fixed_negatives`, when given, replaces the sampled negative rows.
  EpochLoss epoch_loss(const BoundParameters& params, int epoch, const Matrix* fixed_negatives = nullptr) const;

  /// One full-batch step at epoch state.epoch; advances the state.
  /// Throws DivergenceError when any loss term is non-finite.
  EpochRecord train_epoch(TrainerState& state) const;

  /// Runs from state.epoch up to the configured number of epochs.
  void train(TrainerState& state, const TrainHooks& hooks = {}) const;

  Matrix embed(const ParameterSet& params) const;

 private:
  TrainingConfig config_;
  TrainingData data_;
  HgvaeModel model_;
};

/// `epoch,l_elbo,l_pnsm,l_esce,total,lambda`, full precision.
void write_loss_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);
std::vector<EpochRecord> read_loss_csv(const std::filesystem::path& path);

}  // namespace hgvae
