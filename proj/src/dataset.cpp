// On-disk dataset directory:
//   schema.json              node/edge types, target type, meta-paths, classes
//   features_<type>.csv      one row of floats per node (required for the target type)
//   edges_<edge_type>.csv    src,dst per row
//   labels.csv               node_id,class_id (optional)
//   splits.json              {"<size>": {"train": [...], "val": [...], "test": [...]}} (optional)

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hgvae/errors.hpp"
#include "hgvae/graph.hpp"

namespace hgvae {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

double parse_double(const std::string& field, const std::string& file, std::size_t line) {
  const std::string f = strip(field);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(f.c_str(), &end);
  if (f.empty() || end != f.c_str() + f.size() || errno == ERANGE)
    throw ParseError(file, line, "not a number: '" + f + "'");
  if (!std::isfinite(v)) throw ParseError(file, line, "non-finite value '" + f + "'");
  return v;
}

long parse_int(const std::string& field, const std::string& file, std::size_t line) {
  const std::string f = strip(field);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(f.c_str(), &end, 10);
  if (f.empty() || end != f.c_str() + f.size() || errno == ERANGE)
    throw ParseError(file, line, "not an integer: '" + f + "'");
  return v;
}

std::ifstream open_input(const fs::path& p) {
  if (!fs::exists(p)) throw MissingFileError(p.string());
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

json read_json(const fs::path& p) {
  std::ifstream in = open_input(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(p.string(), 0, std::string("invalid JSON: ") + e.what());
  }
}

/// Calls fn(fields, line_no) for every non-blank line.
template <typename Fn>
void for_each_row(const fs::path& p, Fn&& fn) {
  std::ifstream in = open_input(p);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    fn(split_fields(line), line_no);
  }
}

Matrix read_features(const fs::path& p, int expected_rows) {
  const std::string file = p.string();
  std::vector<std::vector<double>> rows;
  std::size_t last_line = 0;
  for_each_row(p, [&](const std::vector<std::string>& fields, std::size_t line) {
    if (!rows.empty() && fields.size() != rows.front().size())
      throw ParseError(file, line,
                       "expected " + std::to_string(rows.front().size()) + " columns, found " +
                           std::to_string(fields.size()));
    if (static_cast<int>(rows.size()) == expected_rows)
      throw ShapeMismatchError(file, line, "more feature rows than the declared count " + std::to_string(expected_rows));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) row.push_back(parse_double(f, file, line));
    rows.push_back(std::move(row));
    last_line = line;
  });
  if (static_cast<int>(rows.size()) != expected_rows)
    throw ShapeMismatchError(file, last_line,
                             "declared count " + std::to_string(expected_rows) + " but found " +
                                 std::to_string(rows.size()) + " feature rows");
  const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix x(expected_rows, cols);
  for (int i = 0; i < expected_rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = rows[i][j];
  return x;
}

std::vector<int> read_id_array(const json& j, const std::string& file, const std::string& what) {
  if (!j.is_array()) throw ParseError(file, 0, what + " must be an array");
  std::vector<int> ids;
  for (const json& v : j) {
    if (!v.is_number_integer()) throw ParseError(file, 0, what + " must contain integers");
    ids.push_back(v.get<int>());
  }
  return ids;
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& file) {
  if (!j.contains(key)) throw ParseError(file, 0, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(file, 0, std::string("bad value for '") + key + "': " + e.what());
  }
}

void write_matrix_csv(const fs::path& p, const Matrix& x) {
  std::FILE* f = std::fopen(p.c_str(), "w");
  if (!f) throw DataError("cannot write " + p.string());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) std::fprintf(f, j ? ",%.17g" : "%.17g", x(i, j));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

}  // namespace

HeterogeneousGraph load_dataset(const fs::path& data_dir) {
  const fs::path schema_path = data_dir / "schema.json";
  const std::string schema_file = schema_path.string();
  const json schema = read_json(schema_path);

  HeterogeneousGraph g;
  for (const json& nt : get_field<json>(schema, "node_types", schema_file)) {
    g.node_types.push_back(get_field<std::string>(nt, "name", schema_file));
    const int count = get_field<int>(nt, "count", schema_file);
    if (count < 0) throw ParseError(schema_file, 0, "negative count for node type " + g.node_types.back());
    g.node_counts.push_back(count);
  }
  g.target_type = get_field<std::string>(schema, "target_type", schema_file);
  g.num_classes = schema.value("num_classes", 0);
  if (!g.has_node_type(g.target_type))
    throw SchemaError(schema_file + ": target type '" + g.target_type + "' is not declared");

  for (const json& et : get_field<json>(schema, "edge_types", schema_file)) {
    EdgeType e{get_field<std::string>(et, "name", schema_file), get_field<std::string>(et, "src", schema_file),
               get_field<std::string>(et, "dst", schema_file), {}};
    if (!g.has_node_type(e.src_type) || !g.has_node_type(e.dst_type))
      throw SchemaError(schema_file + ": edge type '" + e.name + "' references an undeclared node type");
    const fs::path edge_path = data_dir / ("edges_" + e.name + ".csv");
    const std::string edge_file = edge_path.string();
    const int ns = g.node_count(e.src_type), nd = g.node_count(e.dst_type);
    for_each_row(edge_path, [&](const std::vector<std::string>& fields, std::size_t line) {
      if (fields.size() != 2) throw ParseError(edge_file, line, "expected 'src,dst'");
      const long s = parse_int(fields[0], edge_file, line);
      const long d = parse_int(fields[1], edge_file, line);
      if (s < 0 || s >= ns)
        throw DanglingEdgeError(edge_file, line,
                                "source id " + std::to_string(s) + " outside " + e.src_type + " [0," +
                                    std::to_string(ns) + ")");
      if (d < 0 || d >= nd)
        throw DanglingEdgeError(edge_file, line,
                                "destination id " + std::to_string(d) + " outside " + e.dst_type + " [0," +
                                    std::to_string(nd) + ")");
      e.edges.emplace_back(static_cast<int>(s), static_cast<int>(d));
    });
    g.edge_types.push_back(std::move(e));
  }

  for (std::size_t k = 0; k < g.node_types.size(); ++k) {
    const fs::path fp = data_dir / ("features_" + g.node_types[k] + ".csv");
    if (!fs::exists(fp)) {
      if (g.node_types[k] == g.target_type) throw MissingFileError(fp.string());
      continue;
    }
    g.features.emplace(g.node_types[k], read_features(fp, g.node_counts[k]));
  }

  const int n = g.target_count();
  const fs::path label_path = data_dir / "labels.csv";
  if (fs::exists(label_path)) {
    const std::string label_file = label_path.string();
    g.labels.assign(n, -1);
    for_each_row(label_path, [&](const std::vector<std::string>& fields, std::size_t line) {
      if (fields.size() != 2) throw ParseError(label_file, line, "expected 'node_id,class_id'");
      const long id = parse_int(fields[0], label_file, line);
      const long y = parse_int(fields[1], label_file, line);
      if (id < 0 || id >= n) throw DanglingEdgeError(label_file, line, "node id " + std::to_string(id) + " out of range");
      if (y < 0 || (g.num_classes > 0 && y >= g.num_classes))
        throw ParseError(label_file, line, "class id " + std::to_string(y) + " out of range");
      g.labels[id] = static_cast<int>(y);
    });
  }

  if (schema.contains("meta_paths")) {
    for (const json& mp : schema.at("meta_paths"))
      g.meta_paths.push_back(make_meta_path(g, get_field<std::string>(mp, "name", schema_file),
                                            get_field<std::vector<std::string>>(mp, "edges", schema_file)));
  }

  const fs::path split_path = data_dir / "splits.json";
  if (fs::exists(split_path)) {
    const std::string split_file = split_path.string();
    const json sj = read_json(split_path);
    for (const auto& [key, val] : sj.items()) {
      LabelSplit s;
      s.split_size = static_cast<int>(parse_int(key, split_file, 0));
      s.train_ids = read_id_array(get_field<json>(val, "train", split_file), split_file, key + ".train");
      s.val_ids = read_id_array(get_field<json>(val, "val", split_file), split_file, key + ".val");
      s.test_ids = read_id_array(get_field<json>(val, "test", split_file), split_file, key + ".test");
      g.splits.push_back(std::move(s));
    }
    std::sort(g.splits.begin(), g.splits.end(),
              [](const LabelSplit& a, const LabelSplit& b) { return a.split_size < b.split_size; });
  }

  g.validate();
  if (!g.is_heterogeneous())
    spdlog::warn("{}: graph has a single node type and a single edge type; it is homogeneous", data_dir.string());
  return g;
}

void write_dataset(const HeterogeneousGraph& g, const fs::path& data_dir) {
  g.validate();
  fs::create_directories(data_dir);
  json schema;
  schema["node_types"] = json::array();
  for (std::size_t k = 0; k < g.node_types.size(); ++k)
    schema["node_types"].push_back({{"name", g.node_types[k]}, {"count", g.node_counts[k]}});
  schema["edge_types"] = json::array();
  for (const EdgeType& e : g.edge_types)
    schema["edge_types"].push_back({{"name", e.name}, {"src", e.src_type}, {"dst", e.dst_type}});
  schema["target_type"] = g.target_type;
  schema["num_classes"] = g.num_classes;
  schema["meta_paths"] = json::array();
  for (const MetaPath& p : g.meta_paths) schema["meta_paths"].push_back({{"name", p.name}, {"edges", p.edge_sequence}});
  {
    std::ofstream out(data_dir / "schema.json");
    out << schema.dump(2) << '\n';
  }

  for (const auto& [type, x] : g.features) write_matrix_csv(data_dir / ("features_" + type + ".csv"), x);
  for (const EdgeType& e : g.edge_types) {
    std::ofstream out(data_dir / ("edges_" + e.name + ".csv"));
    for (const auto& [s, d] : e.edges) out << s << ',' << d << '\n';
  }
  if (!g.labels.empty()) {
    std::ofstream out(data_dir / "labels.csv");
    for (std::size_t i = 0; i < g.labels.size(); ++i)
      if (g.labels[i] >= 0) out << i << ',' << g.labels[i] << '\n';
  }
  if (!g.splits.empty()) {
    json sj = json::object();
    for (const LabelSplit& s : g.splits)
      sj[std::to_string(s.split_size)] = {{"train", s.train_ids}, {"val", s.val_ids}, {"test", s.test_ids}};
    std::ofstream out(data_dir / "splits.json");
    out << sj.dump() << '\n';
  }
}

}  // namespace hgvae
