#include "hgvae/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <spdlog/spdlog.h>

#include "hgvae/checkpoint.hpp"
#include "hgvae/errors.hpp"

namespace hgvae {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string checkpoint_name(int epoch) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "checkpoint_epoch_%04d.hgv", epoch);
  return buf;
}

}  // namespace

TrainOutcome train_and_embed(const TrainingConfig& config, const HeterogeneousGraph& graph, const fs::path& data_dir,
                             const fs::path& out_dir, std::optional<TrainerState> resume_from) {
  Trainer trainer(config, TrainingData::from_graph(graph));
  TrainerState state = resume_from ? std::move(*resume_from) : trainer.initial_state();
  const bool write = !out_dir.empty();
  if (write) {
    fs::create_directories(out_dir);
    write_text(out_dir / "config.resolved.json", config.to_json().dump(2) + "\n");
  }
  spdlog::info("training {} epochs from epoch {} on {} target nodes, {} meta-paths, {} parameters", config.epochs,
               state.epoch, graph.target_count(), graph.meta_paths.size(), state.params.num_scalars());

  TrainHooks hooks;
  hooks.on_epoch = [&](const TrainerState& s) {
    const EpochRecord& r = s.history.back();
    if (s.epoch % 10 == 0 || s.epoch == config.epochs)
      spdlog::info("epoch {:4d}  total {:.5f}  elbo {:.5f}  pnsm {:.5f}  esce {:.5f}  lambda {:.3f}", r.epoch,
                   r.loss.total, r.loss.l_elbo, r.loss.l_pnsm, r.loss.l_esce, r.lambda);
    if (write && config.checkpoint_every > 0 && s.epoch % config.checkpoint_every == 0)
      save_checkpoint({config, s, data_dir.string()}, out_dir / checkpoint_name(s.epoch));
  };
  if (config.early_stopping) {
    if (graph.splits.empty() || graph.labels.empty()) {
      spdlog::warn("early stopping requested but the dataset has no labeled splits; disabled");
    } else {
      const LabelSplit& split = graph.splits.front();
      hooks.validate = [&, split](const Matrix& emb) { return validation_micro_f1(emb, graph, split, config.seed); };
    }
  }
  trainer.train(state, hooks);

  TrainOutcome out{std::move(state), {}};
  out.embeddings = trainer.embed(out.state.params);
  if (write) {
    save_checkpoint({config, out.state, data_dir.string()}, out_dir / "final.hgv");
    write_loss_csv(out.state.history, out_dir / "loss.csv");
    export_embeddings(out.embeddings, graph.labels, out_dir / "embeddings.csv");
  }
  return out;
}

double validation_micro_f1(const Matrix& embeddings, const HeterogeneousGraph& graph, const LabelSplit& split,
                           std::uint64_t seed) {
  LabelSplit as_test = split;
  as_test.test_ids = split.val_ids;
  ProbeOptions opts;
  opts.repeats = 1;
  opts.seed = seed;
  return linear_probe(embeddings, graph.labels, graph.num_classes, as_test, opts).micro.mean;
}

EvalReport evaluate(const Matrix& embeddings, const HeterogeneousGraph& graph, const EvalOptions& options) {
  if (graph.labels.empty()) throw DataError("evaluation needs labels.csv");
  if (embeddings.rows() != graph.target_count())
    throw DataError("embeddings have " + std::to_string(embeddings.rows()) + " rows but the dataset has " +
                    std::to_string(graph.target_count()) + " target nodes");
  EvalReport report;
  report.config_hash = options.config_hash;
  report.repeats = options.repeats;
  if (options.classify) {
    ProbeOptions probe;
    probe.repeats = options.repeats;
    probe.seed = options.seed;
    for (int size : options.split_sizes) {
      const auto it = std::find_if(graph.splits.begin(), graph.splits.end(),
                                   [size](const LabelSplit& s) { return s.split_size == size; });
      if (it == graph.splits.end()) {
        spdlog::warn("dataset has no split of size {}; skipped", size);
        continue;
      }
      report.classification.push_back(linear_probe(embeddings, graph.labels, graph.num_classes, *it, probe));
    }
  }
  if (options.cluster)
    report.clustering = cluster_eval(embeddings, graph.labels, graph.num_classes, options.repeats, options.seed);
  return report;
}

std::string sweep_key(const std::string& param) {
  if (param == "kappa") return "pnsg.kappa";
  if (param == "hidden_dim") return "model.hidden_dim";
  if (param == "num_negatives") return "pnsg.num_negatives";
  throw ConfigError("unknown sweep parameter '" + param + "' (expected kappa|hidden_dim|num_negatives)");
}

std::vector<SweepPoint> run_sweep(const TrainingConfig& base, const HeterogeneousGraph& graph,
                                  const fs::path& data_dir, const fs::path& out_dir, const std::string& param,
                                  const std::vector<std::string>& values, const EvalOptions& eval) {
  const std::string key = sweep_key(param);
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<TrainingConfig> configs;
  for (const std::string& v : values) {
    TrainingConfig cfg = base;
    cfg.set(key, v);
    cfg.validate();
    configs.push_back(cfg);
  }
  std::vector<SweepPoint> points;
  for (std::size_t k = 0; k < values.size(); ++k) {
    spdlog::info("sweep {} = {} ({}/{})", param, values[k], k + 1, values.size());
    const fs::path dir = out_dir.empty() ? fs::path() : out_dir / (param + "_" + values[k]);
    TrainOutcome run = train_and_embed(configs[k], graph, data_dir, dir);
    EvalOptions opts = eval;
    opts.config_hash = std::to_string(configs[k].hash());
    EvalReport report = evaluate(run.embeddings, graph, opts);
    report.dataset = param + "=" + values[k];
    if (!dir.empty()) {
      write_text(dir / "report.json", report.to_json().dump(2) + "\n");
      write_text(dir / "report.md", report.to_markdown());
    }
    points.push_back({values[k], std::move(report)});
  }
  return points;
}

}  // namespace hgvae
