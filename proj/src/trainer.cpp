#include "hgvae/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hgvae/errors.hpp"
#include "hgvae/masking.hpp"
#include "hgvae/variational.hpp"

namespace hgvae {

TrainingData TrainingData::from_graph(const HeterogeneousGraph& graph) {
  TrainingData data;
  data.features = graph.target_features();
  data.adjacencies = meta_path_adjacencies(graph);
  if (data.adjacencies.empty()) throw SchemaError("dataset defines no meta-paths");
  return data;
}

Trainer::Trainer(TrainingConfig config, TrainingData data)
    : config_(std::move(config)),
      data_(std::move(data)),
      model_(ModelSpec::from_config(config_, static_cast<int>(data_.features.cols()),
                                    static_cast<int>(data_.adjacencies.size()))) {
  config_.validate();
}

TrainerState Trainer::initial_state() const {
  TrainerState state{model_.init_parameters(stream_seed(config_.seed, Stream::kInit)),
                     Adam(AdamOptions{.lr = config_.lr}), 0, {}};
  return state;
}

namespace {

void require_finite(double value, const char* component, int epoch) {
  if (!std::isfinite(value)) throw DivergenceError(component, epoch, "loss is " + std::to_string(value));
}

}  // namespace

Trainer::EpochLoss Trainer::epoch_loss(const BoundParameters& params, int t, const Matrix* fixed_negatives) const {
  const int total = config_.epochs;
  if (t < 0 || t >= total)
    throw std::out_of_range("epoch " + std::to_string(t) + " outside [0, " + std::to_string(total) + ")");
  const std::uint64_t seed = config_.seed;
  const int n = static_cast<int>(data_.features.rows());

  const double rate = mask_rate_at(config_.mask_rate, config_.final_mask_rate(), t, total);
  const MaskPlan plan =
      make_mask_plan(n, rate, derive_seed(stream_seed(seed, Stream::kMask, t), {config_.mask_seed_stream}));

  ag::Var token = params[HgvaeModel::kMaskToken];
  ag::Tape& tape = *token.tape();
  ag::Var x = mask_features(tape.constant(data_.features), plan, token);

  EncodedViews views = model_.make_views(params, x, data_.adjacencies, stream_seed(seed, Stream::kView1, t),
                                         stream_seed(seed, Stream::kView2, t));
  PosteriorStats post = model_.posterior(params, views.h2, data_.adjacencies, config_.variational());

  EpochLoss out;
  out.kl = kl_standard_normal(post);
  out.negatives =
      generate_negatives(config_.negative_mode(), views.h1.value(), post.mu.value(), post.log_var.value(), t, total,
                         config_.negative_options(), stream_seed(seed, Stream::kNegatives, t));
  if (fixed_negatives) out.negatives.samples = *fixed_negatives;
  out.contrastive =
      info_nce(views.h1, views.h2, out.negatives.samples, config_.tau, config_.denominator_includes_positive);

  Rng eps_rng(stream_seed(seed, Stream::kReparam, t));
  ag::Var z = reparameterize(post, standard_normal(post.mu.rows(), post.mu.cols(), eps_rng));
  ag::Var x_hat = model_.decode(params, z, data_.adjacencies);
  out.reconstruction = plan.masked_ids.empty()
                           ? tape.constant(Matrix::Zero(1, 1))
                           : esce(data_.features, x_hat, plan.masked_ids, config_.delta, config_.esce());
  out.masked = static_cast<int>(plan.masked_ids.size());
  out.total = total_loss(out.kl, out.contrastive, out.reconstruction, config_.loss_weights());
  return out;
}

EpochRecord Trainer::train_epoch(TrainerState& state) const {
  const int t = state.epoch;
  ag::Tape tape;
  BoundParameters params(tape, state.params);
  const EpochLoss loss = epoch_loss(params, t);

  require_finite(loss.kl.scalar(), "kl", t);
  require_finite(loss.contrastive.scalar(), "info_nce", t);
  require_finite(loss.reconstruction.scalar(), "esce", t);
  require_finite(loss.total.scalar(), "total", t);

  tape.backward(loss.total);
  ParameterSet grads = params.gradients();
  if (!grads.all_finite()) throw DivergenceError("gradient", t, "non-finite parameter gradient");
  state.optimizer.step(state.params, grads);

  EpochRecord record;
  record.epoch = t;
  record.loss = total_loss(loss.kl.scalar(), loss.contrastive.scalar(), loss.reconstruction.scalar(),
                           config_.loss_weights());
  record.lambda = loss.negatives.lambda;
  record.n_dropout = loss.negatives.n_dropout;
  record.n_vi = loss.negatives.n_vi;
  record.masked = loss.masked;
  state.history.push_back(record);
  state.epoch = t + 1;
  return record;
}

void Trainer::train(TrainerState& state, const TrainHooks& hooks) const {
  const bool early = config_.early_stopping && hooks.validate;
  double best_score = -1.0;
  int best_epoch = state.epoch;
  ParameterSet best_params;

  while (state.epoch < config_.epochs) {
    const EpochRecord r = train_epoch(state);
    spdlog::debug("epoch {} total={:.6f} elbo={:.6f} pnsm={:.6f} esce={:.6f} lambda={:.4f}", r.epoch, r.loss.total,
                  r.loss.l_elbo, r.loss.l_pnsm, r.loss.l_esce, r.lambda);
    if (hooks.on_epoch) hooks.on_epoch(state);

    if (early && state.epoch % config_.eval_every == 0) {
      const double score = hooks.validate(embed(state.params));
      if (score > best_score) {
        best_score = score;
        best_epoch = state.epoch;
        best_params = state.params;
      } else if (state.epoch - best_epoch >= config_.patience) {
        spdlog::info("early stopping at epoch {}; best validation score {:.4f} at epoch {}", state.epoch, best_score,
                     best_epoch);
        state.params = best_params;
        return;
      }
    }
  }
  if (early && best_params.size() > 0) state.params = best_params;
}

Matrix Trainer::embed(const ParameterSet& params) const {
  return model_.embed(params, data_.features, data_.adjacencies);
}

void write_loss_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,l_elbo,l_pnsm,l_esce,total,lambda\n";
  char buf[512];
  for (const EpochRecord& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.loss.l_elbo, r.loss.l_pnsm,
                  r.loss.l_esce, r.loss.total, r.lambda);
    out << buf;
  }
}

std::vector<EpochRecord> read_loss_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  std::string line;
  std::getline(in, line);
  std::vector<EpochRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    EpochRecord r;
    char c1, c2, c3, c4, c5;
    std::istringstream row(line);
    if (!(row >> r.epoch >> c1 >> r.loss.l_elbo >> c2 >> r.loss.l_pnsm >> c3 >> r.loss.l_esce >> c4 >> r.loss.total >>
          c5 >> r.lambda))
      throw ParseError(path.string(), lineno, "expected 6 numeric columns");
    out.push_back(r);
  }
  return out;
}

}  // namespace hgvae
