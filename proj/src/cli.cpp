#include "hgvae/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hgvae/checkpoint.hpp"
#include "hgvae/errors.hpp"
#include "hgvae/evaluation.hpp"
#include "hgvae/pipeline.hpp"
#include "hgvae/synthetic.hpp"

namespace hgvae {

namespace fs = std::filesystem;

namespace {

void setup_logging(const std::string& level) {
  auto logger = spdlog::get("hgvae");
  if (!logger) logger = spdlog::stderr_color_mt("hgvae");
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e%z [%l] %v");
  spdlog::set_default_logger(logger);
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") throw ConfigError("unknown log level '" + level + "'");
  spdlog::set_level(lvl);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  for (const std::string& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

/// Resolved run config: defaults < config file < --seed < --set overrides.
TrainingConfig resolve_config(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                              const std::vector<std::string>& overrides) {
  TrainingConfig cfg = config_path.empty() ? TrainingConfig{} : TrainingConfig::load(config_path);
  if (seed) cfg.seed = *seed;
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void write_report(const EvalReport& report, const std::string& out) {
  if (out.empty()) {
    std::cout << report.to_json().dump(2) << '\n';
    return;
  }
  fs::path json_path(out);
  fs::path md_path = json_path;
  md_path.replace_extension(".md");
  if (json_path.extension() != ".json") json_path += ".json";
  write_text(json_path, report.to_json().dump(2) + "\n");
  write_text(md_path, report.to_markdown());
  std::cout << report.to_markdown();
  spdlog::info("report written to {}", json_path.string());
}

std::string svg_color(int label) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return label < 0 ? "#444444" : palette[label % 10];
}

void write_scatter_svg(const EmbeddingTable& table, const fs::path& out) {
  if (table.values.cols() < 2) throw DataError("plot needs at least two embedding dimensions");
  if (table.values.cols() > 2)
    spdlog::warn("embeddings have {} dimensions; plotting the first two (reduce them externally first)",
                 table.values.cols());
  constexpr double kSize = 600.0, kPad = 20.0;
  const Matrix xy = table.values.leftCols(2);
  const Eigen::RowVector2d lo = xy.rows() ? Eigen::RowVector2d(xy.colwise().minCoeff()) : Eigen::RowVector2d(0, 0);
  const Eigen::RowVector2d hi = xy.rows() ? Eigen::RowVector2d(xy.colwise().maxCoeff()) : Eigen::RowVector2d(1, 1);
  const Eigen::RowVector2d span = (hi - lo).cwiseMax(1e-12);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    const double px = kPad + (xy(i, 0) - lo(0)) / span(0) * (kSize - 2 * kPad);
    const double py = kSize - kPad - (xy(i, 1) - lo(1)) / span(1) * (kSize - 2 * kPad);
    svg << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\""
        << svg_color(table.labels[static_cast<std::size_t>(i)]) << "\" fill-opacity=\"0.7\"/>\n";
  }
  svg << "</svg>\n";
  write_text(out, svg.str());
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Variational heterogeneous graph autoencoder: training, embedding and evaluation"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  // train
  auto* train = app.add_subcommand("train", "Train a model and write checkpoints, losses and embeddings");
  std::string config_path, data_dir, out_dir, resume;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  train->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  train->add_option("--data-dir", data_dir, "Dataset directory")->required();
  train->add_option("--out-dir", out_dir, "Output directory")->required();
  train->add_option("--seed", seed, "Base seed");
  train->add_option("--set", overrides, "Config override key=value (repeatable)");
  train->add_option("--resume", resume, "Continue from a checkpoint")->check(CLI::ExistingFile);

  // embed
  auto* embed = app.add_subcommand("embed", "Export inference embeddings from a checkpoint");
  std::string checkpoint, embed_out, embed_data;
  embed->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  embed->add_option("--out", embed_out, "Output CSV")->required();
  embed->add_option("--data-dir", embed_data, "Dataset directory (defaults to the one stored in the checkpoint)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate embeddings by linear probe or clustering");
  std::string emb_path, eval_data, task = "classify", splits = "20,40,60", eval_out;
  int repeats = 5;
  std::uint64_t eval_seed = 0;
  eval->add_option("--embeddings", emb_path, "Embeddings CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--data-dir", eval_data, "Dataset directory")->required();
  eval->add_option("--task", task, "classify|cluster|both")->check(CLI::IsMember({"classify", "cluster", "both"}));
  eval->add_option("--splits", splits, "Comma-separated split sizes");
  eval->add_option("--repeats", repeats, "Repeats per metric")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_option("--out", eval_out, "Report path (.json; a .md twin is written alongside)");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Write a planted-partition heterogeneous dataset");
  std::string spec_path, gen_out;
  gen->add_option("--spec", spec_path, "Synthetic spec JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output dataset directory")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate once per value of one hyperparameter");
  std::string param, values, sweep_config, sweep_data, sweep_out, sweep_splits = "20,40,60";
  std::optional<std::uint64_t> sweep_seed;
  std::vector<std::string> sweep_overrides;
  int sweep_repeats = 5;
  sweep->add_option("--param", param, "kappa|hidden_dim|num_negatives")
      ->required()
      ->check(CLI::IsMember({"kappa", "hidden_dim", "num_negatives"}));
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--config", sweep_config, "Base JSON config")->check(CLI::ExistingFile);
  sweep->add_option("--data-dir", sweep_data, "Dataset directory")->required();
  sweep->add_option("--out-dir", sweep_out, "Output directory")->required();
  sweep->add_option("--seed", sweep_seed, "Base seed");
  sweep->add_option("--set", sweep_overrides, "Config override key=value (repeatable)");
  sweep->add_option("--splits", sweep_splits, "Comma-separated split sizes");
  sweep->add_option("--repeats", sweep_repeats, "Repeats per metric")->check(CLI::PositiveNumber);

  // plot
  auto* plot = app.add_subcommand("plot", "2-D scatter (SVG) of embeddings, colored by label");
  std::string plot_in, plot_out;
  plot->add_option("--embeddings", plot_in, "Embeddings CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "hgvae: error: usage: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    setup_logging(log_level);
    if (train->parsed()) {
      TrainingConfig cfg;
      std::optional<TrainerState> state;
      if (!resume.empty()) {
        if (!config_path.empty() || seed || !overrides.empty())
          throw ConfigError("--resume takes its config from the checkpoint; drop --config/--seed/--set");
        Checkpoint ck = load_checkpoint(resume);
        cfg = ck.config;
        state = std::move(ck.state);
        spdlog::info("resuming from {} at epoch {}", resume, state->epoch);
      } else {
        cfg = resolve_config(config_path, seed, overrides);
      }
      const HeterogeneousGraph graph = load_dataset(data_dir);
      train_and_embed(cfg, graph, data_dir, out_dir, std::move(state));
      spdlog::info("wrote {}", (fs::path(out_dir) / "final.hgv").string());
    } else if (embed->parsed()) {
      Checkpoint ck = load_checkpoint(checkpoint);
      const std::string dir = embed_data.empty() ? ck.data_dir : embed_data;
      if (dir.empty()) throw ConfigError("checkpoint does not record its dataset; pass --data-dir");
      const HeterogeneousGraph graph = load_dataset(dir);
      const Trainer trainer(ck.config, TrainingData::from_graph(graph));
      export_embeddings(trainer.embed(ck.state.params), graph.labels, embed_out);
      spdlog::info("wrote {} embeddings to {}", graph.target_count(), embed_out);
    } else if (eval->parsed()) {
      const HeterogeneousGraph graph = load_dataset(eval_data);
      const EmbeddingTable table = read_embeddings(emb_path);
      EvalOptions opts;
      opts.classify = task != "cluster";
      opts.cluster = task != "classify";
      opts.split_sizes = parse_int_list(splits, "--splits");
      opts.repeats = repeats;
      opts.seed = eval_seed;
      EvalReport report = evaluate(table.values, graph, opts);
      report.dataset = fs::path(eval_data).filename().string();
      write_report(report, eval_out);
    } else if (gen->parsed()) {
      const SyntheticSpec spec = SyntheticSpec::load(spec_path);
      const HeterogeneousGraph g = gen_synthetic(spec, gen_out);
      spdlog::info("wrote synthetic dataset with {} target nodes to {}", g.target_count(), gen_out);
    } else if (sweep->parsed()) {
      const TrainingConfig base = resolve_config(sweep_config, sweep_seed, sweep_overrides);
      const HeterogeneousGraph graph = load_dataset(sweep_data);
      EvalOptions opts;
      opts.cluster = true;
      opts.split_sizes = parse_int_list(sweep_splits, "--splits");
      opts.repeats = sweep_repeats;
      opts.seed = base.seed;
      const auto points = run_sweep(base, graph, sweep_data, sweep_out, param, split_list(values), opts);
      std::string summary;
      for (const SweepPoint& p : points) summary += "## " + p.report.dataset + "\n\n" + p.report.to_markdown() + "\n";
      write_text(fs::path(sweep_out) / "sweep.md", summary);
      std::cout << summary;
    } else if (plot->parsed()) {
      write_scatter_svg(read_embeddings(plot_in), plot_out);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "hgvae: error: config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "hgvae: error: data: " << e.what() << '\n';
    return kExitData;
  } catch (const DivergenceError& e) {
    std::cerr << "hgvae: error: divergence: component=" << e.component() << " epoch=" << e.epoch() << ": "
              << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "hgvae: error: internal: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace hgvae
