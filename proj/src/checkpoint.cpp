#include "hgvae/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "hgvae/errors.hpp"

namespace hgvae {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

constexpr char kMagic[4] = {'H', 'G', 'V', '1'};

enum class DType : std::uint8_t { kF64 = 0, kI64 = 1, kUtf8 = 2 };

struct Entry {
  DType dtype = DType::kF64;
  std::vector<std::uint64_t> dims;
  std::vector<double> f64;
  std::vector<std::int64_t> i64;
  std::string text;
};

Entry matrix_entry(const Matrix& m) {
  Entry e;
  e.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  e.f64.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) e.f64.push_back(m(i, j));
  return e;
}

Entry int_entry(std::int64_t v) {
  Entry e;
  e.dtype = DType::kI64;
  e.dims = {1};
  e.i64 = {v};
  return e;
}

Entry text_entry(std::string s) {
  Entry e;
  e.dtype = DType::kUtf8;
  e.dims = {s.size()};
  e.text = std::move(s);
  return e;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& file) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError(file + ": truncated checkpoint");
  return v;
}

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string file) : entries_(std::move(entries)), file_(std::move(file)) {}

  const Entry& find(const std::string& name, DType dtype) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw DataError(file_ + ": checkpoint has no entry '" + name + "'");
    if (it->second.dtype != dtype) throw DataError(file_ + ": entry '" + name + "' has the wrong dtype");
    return it->second;
  }

  Matrix matrix(const std::string& name) const {
    const Entry& e = find(name, DType::kF64);
    if (e.dims.size() != 2) throw DataError(file_ + ": entry '" + name + "' is not a matrix");
    Matrix m(static_cast<Eigen::Index>(e.dims[0]), static_cast<Eigen::Index>(e.dims[1]));
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = e.f64[k++];
    return m;
  }

  std::int64_t integer(const std::string& name) const { return find(name, DType::kI64).i64.at(0); }
  const std::string& text(const std::string& name) const { return find(name, DType::kUtf8).text; }
  bool contains(const std::string& name) const { return entries_.count(name) > 0; }

  std::vector<std::string> names_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [name, _] : entries_)
      if (name.rfind(prefix, 0) == 0) out.push_back(name.substr(prefix.size()));
    return out;
  }

 private:
  std::map<std::string, Entry> entries_;
  std::string file_;
};

constexpr int kHistoryCols = 9;

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::vector<std::pair<std::string, Entry>> entries;
  const TrainerState& s = checkpoint.state;
  // Parameter order is kept explicitly so that a reload yields an identical set.
  std::string order;
  for (const auto& [name, value] : s.params) {
    entries.emplace_back("param/" + name, matrix_entry(value));
    order += name + "\n";
  }
  entries.emplace_back("param_order", text_entry(order));
  if (s.optimizer.steps() > 0) {
    for (const auto& [name, value] : s.optimizer.first_moment()) entries.emplace_back("adam.m/" + name, matrix_entry(value));
    for (const auto& [name, value] : s.optimizer.second_moment())
      entries.emplace_back("adam.v/" + name, matrix_entry(value));
  }
  entries.emplace_back("adam.step", int_entry(s.optimizer.steps()));
  entries.emplace_back("epoch", int_entry(s.epoch));

  Matrix history(static_cast<Eigen::Index>(s.history.size()), kHistoryCols);
  for (std::size_t i = 0; i < s.history.size(); ++i) {
    const EpochRecord& r = s.history[i];
    history.row(static_cast<Eigen::Index>(i)) << r.epoch, r.loss.l_elbo, r.loss.l_pnsm, r.loss.l_esce, r.loss.total,
        r.lambda, r.n_dropout, r.n_vi, r.masked;
  }
  entries.emplace_back("history", matrix_entry(history));
  entries.emplace_back("config", text_entry(checkpoint.config.to_json().dump()));
  entries.emplace_back("config_hash", int_entry(static_cast<std::int64_t>(checkpoint.config.hash())));
  entries.emplace_back("data_dir", text_entry(checkpoint.data_dir));

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kMagic, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, e] : entries) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put<std::uint8_t>(out, static_cast<std::uint8_t>(e.dtype));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(e.dims.size()));
      for (std::uint64_t d : e.dims) put<std::uint64_t>(out, d);
      switch (e.dtype) {
        case DType::kF64:
          out.write(reinterpret_cast<const char*>(e.f64.data()), static_cast<std::streamsize>(e.f64.size() * 8));
          break;
        case DType::kI64:
          out.write(reinterpret_cast<const char*>(e.i64.data()), static_cast<std::streamsize>(e.i64.size() * 8));
          break;
        case DType::kUtf8:
          out.write(e.text.data(), static_cast<std::streamsize>(e.text.size()));
          break;
      }
    }
    if (!out) throw DataError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(file);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw DataError(file + ": not an HGV1 checkpoint");

  std::map<std::string, Entry> entries;
  const auto count = get<std::uint32_t>(in, file);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name(get<std::uint32_t>(in, file), '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name.size()))) throw DataError(file + ": truncated checkpoint");
    Entry e;
    const auto dtype = get<std::uint8_t>(in, file);
    if (dtype > 2) throw DataError(file + ": unknown dtype in entry '" + name + "'");
    e.dtype = static_cast<DType>(dtype);
    e.dims.resize(get<std::uint32_t>(in, file));
    std::uint64_t n = 1;
    for (auto& d : e.dims) {
      d = get<std::uint64_t>(in, file);
      n *= d;
    }
    bool ok = true;
    switch (e.dtype) {
      case DType::kF64:
        e.f64.resize(n);
        ok = static_cast<bool>(in.read(reinterpret_cast<char*>(e.f64.data()), static_cast<std::streamsize>(n * 8)));
        break;
      case DType::kI64:
        e.i64.resize(n);
        ok = static_cast<bool>(in.read(reinterpret_cast<char*>(e.i64.data()), static_cast<std::streamsize>(n * 8)));
        break;
      case DType::kUtf8:
        e.text.resize(n);
        ok = static_cast<bool>(in.read(e.text.data(), static_cast<std::streamsize>(n)));
        break;
    }
    if (!ok) throw DataError(file + ": truncated checkpoint");
    entries.emplace(std::move(name), std::move(e));
  }
  Reader r(std::move(entries), file);

  Checkpoint ck;
  try {
    ck.config = TrainingConfig::from_json(nlohmann::json::parse(r.text("config")));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file + ": stored config is not valid JSON: " + e.what());
  }
  if (static_cast<std::uint64_t>(r.integer("config_hash")) != ck.config.hash())
    throw DataError(file + ": config hash mismatch");
  if (r.contains("data_dir")) ck.data_dir = r.text("data_dir");

  std::string order = r.text("param_order");
  std::size_t pos = 0;
  while (pos < order.size()) {
    const std::size_t nl = order.find('\n', pos);
    const std::string name = order.substr(pos, nl - pos);
    ck.state.params.add(name, r.matrix("param/" + name));
    pos = nl + 1;
  }

  const std::int64_t steps = r.integer("adam.step");
  ck.state.optimizer = Adam(AdamOptions{.lr = ck.config.lr});
  if (steps > 0) {
    ParameterSet m, v;
    for (const auto& [name, _] : ck.state.params) {
      m.add(name, r.matrix("adam.m/" + name));
      v.add(name, r.matrix("adam.v/" + name));
    }
    ck.state.optimizer.restore(std::move(m), std::move(v), steps);
  }
  ck.state.epoch = static_cast<int>(r.integer("epoch"));

  const Matrix history = r.matrix("history");
  if (history.rows() > 0 && history.cols() != kHistoryCols) throw DataError(file + ": malformed loss history");
  for (Eigen::Index i = 0; i < history.rows(); ++i) {
    EpochRecord rec;
    rec.epoch = static_cast<int>(history(i, 0));
    rec.loss = total_loss(history(i, 1), history(i, 2), history(i, 3), ck.config.loss_weights());
    rec.loss.total = history(i, 4);
    rec.lambda = history(i, 5);
    rec.n_dropout = static_cast<int>(history(i, 6));
    rec.n_vi = static_cast<int>(history(i, 7));
    rec.masked = static_cast<int>(history(i, 8));
    ck.state.history.push_back(rec);
  }
  return ck;
}

}  // namespace hgvae
