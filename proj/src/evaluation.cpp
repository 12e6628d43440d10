#include "hgvae/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "hgvae/errors.hpp"
#include "hgvae/rng.hpp"

namespace hgvae {

F1Scores f1_scores(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
  if (y_true.empty()) throw std::invalid_argument("f1_scores: empty input");
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("f1_scores: length mismatch");
  if (n_classes < 1) throw std::invalid_argument("f1_scores: n_classes must be >= 1");
  std::vector<long> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes)
      throw std::invalid_argument("f1_scores: class id out of range");
    if (t == p) {
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  auto f1 = [](double tp_, double fp_, double fn_) {
    const double denom = 2 * tp_ + fp_ + fn_;
    return denom > 0 ? 2 * tp_ / denom : 0.0;
  };
  F1Scores out;
  const double stp = std::accumulate(tp.begin(), tp.end(), 0.0);
  const double sfp = std::accumulate(fp.begin(), fp.end(), 0.0);
  const double sfn = std::accumulate(fn.begin(), fn.end(), 0.0);
  out.micro = f1(stp, sfp, sfn);
  for (int c = 0; c < n_classes; ++c) out.macro += f1(tp[c], fp[c], fn[c]);
  out.macro /= n_classes;
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / n);
  return out;
}

namespace {

Matrix with_bias(const Matrix& x) {
  Matrix xa(x.rows(), x.cols() + 1);
  xa.leftCols(x.cols()) = x;
  xa.col(x.cols()).setOnes();
  return xa;
}

void softmax_rows_inplace(Matrix& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - mx).exp();
    z.row(i) /= z.row(i).sum();
  }
}

std::vector<int> argmax_rows(const Matrix& z) {
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index j;
    z.row(i).maxCoeff(&j);
    out[static_cast<std::size_t>(i)] = static_cast<int>(j);
  }
  return out;
}

}  // namespace

void LogisticRegression::fit(const Matrix& x, std::span<const int> y, std::uint64_t init_seed) {
  if (x.rows() == 0) throw std::invalid_argument("logistic regression: no training rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw std::invalid_argument("logistic regression: label count");
  const Matrix xa = with_bias(x);
  const Eigen::Index n = xa.rows(), d = xa.cols();
  Matrix onehot = Matrix::Zero(n, n_classes_);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    if (c < 0 || c >= n_classes_) throw std::invalid_argument("logistic regression: label out of range");
    onehot(i, c) = 1.0;
  }

  // Largest eigenvalue of the Gram matrix bounds the curvature of the loss.
  const Matrix gram = n <= d ? Matrix(xa * xa.transpose()) : Matrix(xa.transpose() * xa);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lipschitz = 0.5 * eig.eigenvalues().maxCoeff() / static_cast<double>(n) + options_.l2;
  const double step = 1.0 / std::max(lipschitz, 1e-12);

  Rng rng(init_seed);
  std::normal_distribution<double> normal(0.0, 0.01);
  weights_.resize(d, n_classes_);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < n_classes_; ++j) weights_(i, j) = normal(rng);

  auto gradient = [&](const Matrix& w) {
    Matrix p = xa * w;
    softmax_rows_inplace(p);
    Matrix g = xa.transpose() * (p - onehot) / static_cast<double>(n);
    g.topRows(d - 1) += options_.l2 * w.topRows(d - 1);
    return g;
  };

  Matrix prev = weights_;
  for (int k = 1; k <= options_.max_iter; ++k) {
    const Matrix look = weights_ + (static_cast<double>(k - 1) / (k + 2)) * (weights_ - prev);
    const Matrix g = gradient(look);
    prev = weights_;
    weights_ = look - step * g;
    if (g.norm() < options_.tol) break;
  }
}

Matrix LogisticRegression::decision_function(const Matrix& x) const {
  if (weights_.size() == 0) throw std::logic_error("logistic regression: not fitted");
  return with_bias(x) * weights_;
}

std::vector<int> LogisticRegression::predict(const Matrix& x) const { return argmax_rows(decision_function(x)); }

namespace {

Matrix gather(const Matrix& x, std::span<const int> ids) {
  Matrix out(static_cast<Eigen::Index>(ids.size()), x.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(ids[k]);
  return out;
}

std::vector<int> gather_labels(std::span<const int> labels, std::span<const int> ids, const char* which) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= labels.size() || labels[static_cast<std::size_t>(id)] < 0)
      throw DataError(std::string("linear probe: ") + which + " node " + std::to_string(id) + " has no label");
    out.push_back(labels[static_cast<std::size_t>(id)]);
  }
  return out;
}

}  // namespace

ProbeResult linear_probe(const Matrix& embeddings, std::span<const int> labels, int n_classes,
                         const LabelSplit& split, const ProbeOptions& options) {
  if (options.repeats < 1) throw ConfigError("linear probe: repeats must be >= 1");
  if (options.l2_grid.empty()) throw ConfigError("linear probe: empty regularization grid");
  if (split.test_ids.empty()) throw DataError("linear probe: split " + std::to_string(split.split_size) +
                                              " has no test nodes");
  const std::vector<int> y_train = gather_labels(labels, split.train_ids, "train");
  const std::vector<int> y_val = gather_labels(labels, split.val_ids, "validation");
  const std::vector<int> y_test = gather_labels(labels, split.test_ids, "test");
  std::vector<bool> present(static_cast<std::size_t>(n_classes), false);
  for (int c : y_train) {
    if (c >= n_classes) throw DataError("linear probe: label " + std::to_string(c) + " out of range");
    present[static_cast<std::size_t>(c)] = true;
  }
  for (int c = 0; c < n_classes; ++c)
    if (!present[static_cast<std::size_t>(c)])
      throw DataError("linear probe: class " + std::to_string(c) + " absent from the train split");

  Matrix train = gather(embeddings, split.train_ids);
  const Eigen::RowVectorXd centre = train.colwise().mean();
  const double rms = std::sqrt((embeddings.rowwise() - centre).squaredNorm() /
                               std::max<double>(1.0, static_cast<double>(embeddings.size())));
  const double scale = rms > 1e-12 ? 1.0 / rms : 1.0;
  auto prep = [&](std::span<const int> ids) { return Matrix((gather(embeddings, ids).rowwise() - centre) * scale); };
  train = prep(split.train_ids);
  const Matrix val = prep(split.val_ids);
  const Matrix test = prep(split.test_ids);

  ProbeResult result;
  result.split_size = split.split_size;
  for (int r = 0; r < options.repeats; ++r) {
    const std::uint64_t seed = stream_seed(options.seed, Stream::kProbe, static_cast<std::uint64_t>(r));
    result.seeds.push_back(seed);
    double best_val = -1.0;
    std::optional<LogisticRegression> best;
    double best_l2 = 0.0;
    for (double l2 : options.l2_grid) {
      LogisticRegression clf(n_classes, {.l2 = l2, .max_iter = options.max_iter});
      clf.fit(train, y_train, seed);
      const double score = y_val.empty() ? f1_scores(y_train, clf.predict(train), n_classes).micro
                                         : f1_scores(y_val, clf.predict(val), n_classes).micro;
      if (score > best_val) {
        best_val = score;
        best = clf;
        best_l2 = l2;
      }
    }
    const F1Scores s = f1_scores(y_test, best->predict(test), n_classes);
    result.micro_runs.push_back(s.micro);
    result.macro_runs.push_back(s.macro);
    result.chosen_l2.push_back(best_l2);
  }
  result.micro = mean_std(result.micro_runs);
  result.macro = mean_std(result.macro_runs);
  return result;
}

namespace {

Matrix squared_distances(const Matrix& x, const Matrix& c) {
  const Eigen::VectorXd xn = x.rowwise().squaredNorm();
  const Eigen::RowVectorXd cn = c.rowwise().squaredNorm().transpose();
  Matrix d = (-2.0 * x * c.transpose()).colwise() + xn;
  d.rowwise() += cn;
  return d.cwiseMax(0.0);
}

KMeansResult kmeans_once(const Matrix& x, int k, Rng& rng, int max_iter) {
  const Eigen::Index n = x.rows();
  Matrix centroids(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = x.row(first(rng));
  Eigen::VectorXd closest = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      double target = unif(rng) * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= closest(pick);
        if (target <= 0) break;
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = x.row(pick);
    closest = closest.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  KMeansResult out;
  out.assignment.assign(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd best_d(n);
  for (int it = 0; it < max_iter; ++it) {
    const Matrix d = squared_distances(x, centroids);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index j;
      best_d(i) = d.row(i).minCoeff(&j);
      if (out.assignment[static_cast<std::size_t>(i)] != static_cast<int>(j)) {
        out.assignment[static_cast<std::size_t>(i)] = static_cast<int>(j);
        changed = true;
      }
    }
    if (!changed && it > 0) break;
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(out.assignment[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(out.assignment[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      } else {
        // Empty cluster: move it to the point farthest from its centre.
        Eigen::Index far;
        best_d.maxCoeff(&far);
        centroids.row(c) = x.row(far);
        best_d(far) = 0.0;
      }
    }
  }
  const Matrix d = squared_distances(x, centroids);
  out.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index j;
    out.inertia += d.row(i).minCoeff(&j);
    out.assignment[static_cast<std::size_t>(i)] = static_cast<int>(j);
  }
  out.centroids = std::move(centroids);
  return out;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, int k, int restarts, std::uint64_t seed, int max_iter) {
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (x.rows() < k) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = kmeans_once(x, k, rng, max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

namespace {

struct Contingency {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  double n = 0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("partition sizes differ");
  if (a.empty()) throw std::invalid_argument("empty partitions");
  Contingency c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.joint[{a[i], b[i]}] += 1;
    c.rows[a[i]] += 1;
    c.cols[b[i]] += 1;
  }
  c.n = static_cast<double>(a.size());
  return c;
}

double entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, v] : counts) h -= (v / n) * std::log(v / n);
  return h;
}

double comb2(double v) { return v * (v - 1) / 2; }

}  // namespace

double nmi(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency(a, b);
  if (c.rows.size() == 1 && c.cols.size() == 1) return 1.0;
  double mi = 0.0;
  for (const auto& [key, v] : c.joint)
    mi += (v / c.n) * std::log(v * c.n / (c.rows.at(key.first) * c.cols.at(key.second)));
  const double denom = 0.5 * (entropy(c.rows, c.n) + entropy(c.cols, c.n));
  if (denom <= 0) return 1.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

double ari(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency(a, b);
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [_, v] : c.joint) index += comb2(v);
  for (const auto& [_, v] : c.rows) sa += comb2(v);
  for (const auto& [_, v] : c.cols) sb += comb2(v);
  const double total = comb2(c.n);
  if (total == 0) return 1.0;
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

ClusterResult cluster_eval(const Matrix& embeddings, std::span<const int> labels, int k, int repeats,
                           std::uint64_t seed) {
  if (k < 2) throw ConfigError("cluster_eval: k must be >= 2");
  if (repeats < 1) throw ConfigError("cluster_eval: repeats must be >= 1");
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size())
    throw DataError("cluster_eval: embedding rows and labels differ in count");
  std::vector<int> ids, truth;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) {
      ids.push_back(static_cast<int>(i));
      truth.push_back(labels[i]);
    }
  if (static_cast<int>(ids.size()) < k) throw DataError("cluster_eval: fewer labeled nodes than clusters");
  const Matrix x = gather(embeddings, ids);

  ClusterResult out;
  std::vector<double> nmis, aris;
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t s = stream_seed(seed, Stream::kKMeans, static_cast<std::uint64_t>(r));
    out.seeds.push_back(s);
    const KMeansResult km = kmeans(x, k, 10, s);
    nmis.push_back(nmi(truth, km.assignment));
    aris.push_back(ari(truth, km.assignment));
  }
  out.nmi = mean_std(nmis);
  out.ari = mean_std(aris);
  return out;
}

double silhouette(const Matrix& x, std::span<const int> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw std::invalid_argument("silhouette: size mismatch");
  std::map<int, int> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw std::invalid_argument("silhouette: need at least two clusters");
  const Matrix d = squared_distances(x, x).cwiseSqrt();
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int li = labels[static_cast<std::size_t>(i)];
    std::map<int, double> sums;
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      if (j != i) sums[labels[static_cast<std::size_t>(j)]] += d(i, j);
    if (sizes[li] == 1) continue;  // singleton clusters score 0
    const double a = sums[li] / (sizes[li] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [l, s] : sums)
      if (l != li) b = std::min(b, s / sizes[l]);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(x.rows());
}

void export_embeddings(const Matrix& embeddings, std::span<const int> labels, const std::filesystem::path& path) {
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(embeddings.rows()))
    throw std::invalid_argument("export_embeddings: label count differs from row count");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "node_id,label";
  for (Eigen::Index j = 0; j < embeddings.cols(); ++j) out << ",dim_" << j;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    out << i << ',' << (labels.empty() ? -1 : labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < embeddings.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", embeddings(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path);
  if (!in) throw MissingFileError(file);
  std::string line;
  if (!std::getline(in, line) || line.rfind("node_id,label", 0) != 0)
    throw ParseError(file, 1, "expected header 'node_id,label,dim_0,...'");
  const auto dims = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') - 1);

  EmbeddingTable table;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (static_cast<Eigen::Index>(cells.size()) != dims + 2)
      throw ParseError(file, lineno, "expected " + std::to_string(dims + 2) + " columns, got " +
                                         std::to_string(cells.size()));
    try {
      table.node_ids.push_back(std::stoi(cells[0]));
      table.labels.push_back(std::stoi(cells[1]));
      for (std::size_t k = 2; k < cells.size(); ++k) values.push_back(std::stod(cells[k]));
    } catch (const std::exception&) {
      throw ParseError(file, lineno, "non-numeric value");
    }
  }
  const auto n = static_cast<Eigen::Index>(table.node_ids.size());
  table.values.resize(n, dims);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dims; ++j) table.values(i, j) = values[static_cast<std::size_t>(i * dims + j)];
  return table;
}

nlohmann::json EvalReport::to_json() const {
  using nlohmann::json;
  auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
  json j;
  j["dataset"] = dataset;
  j["config_hash"] = config_hash;
  j["repeats"] = repeats;
  json cls = json::array();
  for (const ProbeResult& p : classification)
    cls.push_back({{"split", p.split_size},
                   {"micro_f1", ms(p.micro)},
                   {"macro_f1", ms(p.macro)},
                   {"micro_f1_runs", p.micro_runs},
                   {"macro_f1_runs", p.macro_runs},
                   {"chosen_l2", p.chosen_l2},
                   {"seeds", p.seeds}});
  j["classification"] = cls;
  if (clustering)
    j["clustering"] = {{"nmi", ms(clustering->nmi)}, {"ari", ms(clustering->ari)}, {"seeds", clustering->seeds}};
  return j;
}

std::string EvalReport::to_markdown() const {
  auto pct = [](const MeanStd& m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", 100 * m.mean, 100 * m.std);
    return std::string(buf);
  };
  std::ostringstream out;
  if (!classification.empty()) {
    out << "| Dataset | Metric | Split | Score |\n|---|---|---|---|\n";
    for (const char* metric : {"Mi-F1", "Ma-F1"})
      for (const ProbeResult& p : classification)
        out << "| " << dataset << " | " << metric << " | " << p.split_size << " | "
            << pct(metric[1] == 'i' ? p.micro : p.macro) << " |\n";
  }
  if (clustering) {
    if (!classification.empty()) out << '\n';
    out << "| Dataset | NMI | ARI |\n|---|---|---|\n";
    out << "| " << dataset << " | " << pct(clustering->nmi) << " | " << pct(clustering->ari) << " |\n";
  }
  return out.str();
}

}  // namespace hgvae
