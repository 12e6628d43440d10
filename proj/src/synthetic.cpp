#include "hgvae/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "hgvae/errors.hpp"
#include "hgvae/rng.hpp"

namespace hgvae {

namespace {

using nlohmann::json;

constexpr int kMaxEvalNodes = 1000;

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SyntheticSpec SyntheticSpec::from_json(const json& j) {
  static const std::vector<std::string> known = {"target_type",  "n_classes",        "nodes_per_class",
                                                 "aux_types",    "feature_dim",      "signal_dim",
                                                 "class_separation", "feature_noise", "seed",
                                                 "split_sizes"};
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown synthetic spec key '" + key + "'");
  SyntheticSpec s;
  try {
    read_opt(j, "target_type", s.target_type);
    read_opt(j, "n_classes", s.n_classes);
    read_opt(j, "nodes_per_class", s.nodes_per_class);
    read_opt(j, "feature_dim", s.feature_dim);
    s.signal_dim = s.feature_dim;
    read_opt(j, "signal_dim", s.signal_dim);
    read_opt(j, "class_separation", s.class_separation);
    read_opt(j, "feature_noise", s.feature_noise);
    read_opt(j, "seed", s.seed);
    if (j.contains("split_sizes")) s.split_sizes = j.at("split_sizes").get<std::vector<int>>();
    if (j.contains("aux_types")) {
      s.aux_types.clear();
      for (const json& a : j.at("aux_types")) {
        AuxTypeSpec aux;
        aux.name = a.at("name").get<std::string>();
        read_opt(a, "count", aux.count);
        read_opt(a, "p_in", aux.p_in);
        read_opt(a, "p_out", aux.p_out);
        s.aux_types.push_back(aux);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticSpec SyntheticSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synthetic spec " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

json SyntheticSpec::to_json() const {
  json j;
  j["target_type"] = target_type;
  j["n_classes"] = n_classes;
  j["nodes_per_class"] = nodes_per_class;
  j["feature_dim"] = feature_dim;
  j["signal_dim"] = signal_dim;
  j["class_separation"] = class_separation;
  j["feature_noise"] = feature_noise;
  j["seed"] = seed;
  if (split_sizes) j["split_sizes"] = *split_sizes;
  j["aux_types"] = json::array();
  for (const AuxTypeSpec& a : aux_types)
    j["aux_types"].push_back({{"name", a.name}, {"count", a.count}, {"p_in", a.p_in}, {"p_out", a.p_out}});
  return j;
}

void SyntheticSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("synthetic spec: " + what);
  };
  require(!target_type.empty(), "target_type is empty");
  require(n_classes >= 2, "n_classes must be >= 2");
  require(nodes_per_class >= 2, "nodes_per_class must be >= 2");
  require(aux_types.size() >= 2, "at least two auxiliary node types are required");
  require(feature_dim >= 1, "feature_dim must be >= 1");
  require(signal_dim >= 0 && signal_dim <= feature_dim, "signal_dim must lie in [0, feature_dim]");
  require(class_separation >= 0, "class_separation must be >= 0");
  require(feature_noise >= 0, "feature_noise must be >= 0");
  for (const AuxTypeSpec& a : aux_types) {
    require(!a.name.empty() && a.name != target_type, "auxiliary type names must be nonempty and distinct");
    require(std::count_if(aux_types.begin(), aux_types.end(), [&](const AuxTypeSpec& b) { return b.name == a.name; }) ==
                1,
            "duplicate auxiliary type '" + a.name + "'");
    require(a.count >= n_classes, a.name + ": count must be at least n_classes");
    require(a.p_in >= 0 && a.p_in <= 1 && a.p_out >= 0 && a.p_out <= 1, a.name + ": probabilities must lie in [0, 1]");
    require(a.p_in > a.p_out, a.name + ": p_in must exceed p_out");
  }
  if (split_sizes)
    for (int s : *split_sizes)
      require(s >= 1 && s < nodes_per_class, "split size " + std::to_string(s) + " does not fit " +
                                                 std::to_string(nodes_per_class) + " nodes per class");
}

LabelSplit make_split(std::span<const int> labels, int n_classes, int per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  LabelSplit split;
  split.split_size = per_class;
  std::vector<int> taken(static_cast<std::size_t>(n_classes), 0);
  std::vector<int> rest;
  for (int id : order) {
    const int c = labels[static_cast<std::size_t>(id)];
    if (c < 0) continue;
    if (taken[static_cast<std::size_t>(c)] < per_class) {
      ++taken[static_cast<std::size_t>(c)];
      split.train_ids.push_back(id);
    } else {
      rest.push_back(id);
    }
  }
  for (int c = 0; c < n_classes; ++c)
    if (taken[static_cast<std::size_t>(c)] < per_class)
      throw ConfigError("split " + std::to_string(per_class) + ": class " + std::to_string(c) + " has only " +
                        std::to_string(taken[static_cast<std::size_t>(c)]) + " nodes");
  const std::size_t half = std::min<std::size_t>(rest.size() / 2, kMaxEvalNodes);
  split.val_ids.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(half));
  split.test_ids.assign(rest.begin() + static_cast<std::ptrdiff_t>(half),
                        rest.begin() + static_cast<std::ptrdiff_t>(std::min(rest.size(), 2 * half)));
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.val_ids.begin(), split.val_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  return split;
}

HeterogeneousGraph generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::uint64_t base = stream_seed(spec.seed, Stream::kSynthetic);
  const int n = spec.n_classes * spec.nodes_per_class;

  HeterogeneousGraph g;
  g.target_type = spec.target_type;
  g.num_classes = spec.n_classes;
  g.node_types.push_back(spec.target_type);
  g.node_counts.push_back(n);

  // Labels are interleaved so that every prefix of the id range is balanced.
  g.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g.labels[static_cast<std::size_t>(i)] = i % spec.n_classes;

  Rng feature_rng(derive_seed(base, {0}));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix means = Matrix::Zero(spec.n_classes, spec.feature_dim);
  for (int c = 0; c < spec.n_classes; ++c)
    for (int j = 0; j < spec.signal_dim; ++j) means(c, j) = spec.class_separation * normal(feature_rng);
  Matrix x(n, spec.feature_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < spec.feature_dim; ++j)
      x(i, j) = means(g.labels[static_cast<std::size_t>(i)], j) + spec.feature_noise * normal(feature_rng);
  g.features[spec.target_type] = std::move(x);

  for (std::size_t t = 0; t < spec.aux_types.size(); ++t) {
    const AuxTypeSpec& aux = spec.aux_types[t];
    g.node_types.push_back(aux.name);
    g.node_counts.push_back(aux.count);
    EdgeType e{spec.target_type + "_" + aux.name, spec.target_type, aux.name, {}};
    Rng rng(derive_seed(base, {1, t}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < aux.count; ++a) {
        const bool same = g.labels[static_cast<std::size_t>(i)] == a % spec.n_classes;
        if (unif(rng) < (same ? aux.p_in : aux.p_out)) e.edges.emplace_back(i, a);
      }
    g.edge_types.push_back(std::move(e));

    auto initial = [](const std::string& s) {
      return s.empty() ? '?' : static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    };
    std::string name{initial(spec.target_type), initial(aux.name), initial(spec.target_type)};
    if (std::any_of(g.meta_paths.begin(), g.meta_paths.end(), [&](const MetaPath& p) { return p.name == name; }))
      name = spec.target_type + "-" + aux.name + "-" + spec.target_type;
    const std::string edge = g.edge_types.back().name;
    g.meta_paths.push_back(make_meta_path(g, name, {edge, edge}));
  }

  std::vector<int> sizes;
  if (spec.split_sizes) {
    sizes = *spec.split_sizes;
  } else {
    for (int s : {20, 40, 60})
      if (s < spec.nodes_per_class) sizes.push_back(s);
  }
  for (std::size_t k = 0; k < sizes.size(); ++k)
    g.splits.push_back(make_split(g.labels, spec.n_classes, sizes[k], derive_seed(base, {2, k})));

  g.validate();
  return g;
}

HeterogeneousGraph gen_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  HeterogeneousGraph g = generate_synthetic(spec);
  write_dataset(g, out_dir);
  std::ofstream out(out_dir / "synthetic_spec.json");
  if (!out) throw DataError("cannot write " + (out_dir / "synthetic_spec.json").string());
  out << spec.to_json().dump(2) << '\n';
  return g;
}

}  // namespace hgvae
