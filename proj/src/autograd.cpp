#include "hgvae/autograd.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>

namespace hgvae::ag {

const Matrix& Var::value() const { return tape_->value(id_); }
Matrix Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw std::logic_error("Var::scalar on non-1x1 value");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape() != this) throw std::logic_error("mixing Vars from different tapes");
    needs = needs || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs, false, needs ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

Matrix Tape::grad(int id) const {
  const Node& n = nodes_[id];
  if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw std::logic_error("backward root from another tape");
  if (nodes_[root.id()].value.size() != 1) throw std::logic_error("backward root must be 1x1");
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  accumulate(root.id(), Matrix::Ones(1, 1));
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    // The rule may accumulate into earlier nodes only, so `n.grad` stays put.
    n.backward(*this, n.grad);
  }
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

Var unary(Var a, Matrix out, std::function<Matrix(const Matrix& x, const Matrix& y, const Matrix& g)> rule) {
  Tape& t = *a.tape();
  const int out_id = static_cast<int>(t.size());
  return t.record(std::move(out), {a}, [a, out_id, rule = std::move(rule)](Tape& tp, const Matrix& g) {
    tp.accumulate(a, rule(a.value(), tp.value(out_id), g));
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  Matrix out = a.value() * b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
  });
}

Var matmul(Var a, const Matrix& b) { return matmul(a, a.tape()->constant(b)); }

Var masked_matmul(Var a, const BoolMatrix& mask, Var b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("masked_matmul: inner dimension mismatch");
  if (mask.rows() != a.rows() || mask.cols() != a.cols())
    throw std::invalid_argument("masked_matmul: mask shape mismatch");
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  // Row-major pattern of the mask; kept separately so that zero-valued entries
  // of a still receive gradient.
  auto pattern = std::make_shared<std::vector<std::pair<int, int>>>();
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      if (mask(i, j)) pattern->emplace_back(static_cast<int>(i), static_cast<int>(j));
  auto sparse = std::make_shared<Sparse>(a.rows(), a.cols());
  sparse->reserve(static_cast<Eigen::Index>(pattern->size()));
  for (const auto& [i, j] : *pattern) sparse->insert(i, j) = a.value()(i, j);
  sparse->makeCompressed();
  Matrix out = *sparse * b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b, sparse, pattern](Tape& t, const Matrix& g) {
    if (a.requires_grad()) {
      Matrix ga = Matrix::Zero(a.rows(), a.cols());
      // Column access on the transposes keeps the inner products contiguous.
      const Matrix gt = g.transpose();
      const Matrix bt = b.value().transpose();
      for (const auto& [i, j] : *pattern) ga(i, j) = gt.col(i).dot(bt.col(j));
      t.accumulate(a, ga);
    }
    if (b.requires_grad()) t.accumulate(b, Matrix(sparse->transpose() * g));
  });
}

Var transpose(Var a) {
  return unary(a, a.value().transpose(),
               [](const Matrix&, const Matrix&, const Matrix& g) -> Matrix { return g.transpose(); });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  return a.tape()->record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  return a.tape()->record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var hadamard(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "hadamard");
  return a.tape()->record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(b.value()));
    if (b.requires_grad()) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(Var a, double c) {
  return unary(a, a.value() * c, [c](const Matrix&, const Matrix&, const Matrix& g) -> Matrix { return g * c; });
}

Var scale_by(Var a, Var s) {
  if (s.value().size() != 1) throw std::invalid_argument("scale_by: scalar must be 1x1");
  return a.tape()->record(a.value() * s.scalar(), {a, s}, [a, s](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g * s.scalar());
    if (s.requires_grad()) t.accumulate(s, Matrix::Constant(1, 1, g.cwiseProduct(a.value()).sum()));
  });
}

Var multiply_constant(Var a, const Matrix& c) {
  require_same_shape(a.value(), c, "multiply_constant");
  return unary(a, a.value().cwiseProduct(c),
               [c](const Matrix&, const Matrix&, const Matrix& g) -> Matrix { return g.cwiseProduct(c); });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: shape mismatch");
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.tape()->record(std::move(out), {a, row}, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (row.requires_grad()) t.accumulate(row, g.colwise().sum());
  });
}

Var add_col_row(Var col, Var row) {
  if (col.cols() != 1 || row.rows() != 1) throw std::invalid_argument("add_col_row: expects n x 1 and 1 x m");
  const Eigen::Index n = col.rows(), m = row.cols();
  Matrix out = col.value().replicate(1, m) + row.value().replicate(n, 1);
  return col.tape()->record(std::move(out), {col, row}, [col, row](Tape& t, const Matrix& g) {
    if (col.requires_grad()) t.accumulate(col, g.rowwise().sum());
    if (row.requires_grad()) t.accumulate(row, g.colwise().sum());
  });
}

Var leaky_relu(Var a, double slope) {
  Matrix out = a.value().unaryExpr([slope](double x) { return x > 0 ? x : slope * x; });
  return unary(a, std::move(out), [slope](const Matrix& x, const Matrix&, const Matrix& g) -> Matrix {
    return g.cwiseProduct(x.unaryExpr([slope](double v) { return v > 0 ? 1.0 : slope; }));
  });
}

Var elu(Var a, double alpha) {
  Matrix out = a.value().unaryExpr([alpha](double x) { return x > 0 ? x : alpha * std::expm1(x); });
  return unary(a, std::move(out), [alpha](const Matrix& x, const Matrix&, const Matrix& g) -> Matrix {
    return g.cwiseProduct(x.unaryExpr([alpha](double v) { return v > 0 ? 1.0 : alpha * std::exp(v); }));
  });
}

Var relu(Var a) { return leaky_relu(a, 0.0); }

Var tanh(Var a) {
  Matrix out = a.value().array().tanh().matrix();
  return unary(a, std::move(out), [](const Matrix&, const Matrix& y, const Matrix& g) -> Matrix {
    return g.cwiseProduct((1.0 - y.array().square()).matrix());
  });
}

Var exp(Var a) {
  Matrix out = a.value().array().exp().matrix();
  return unary(a, std::move(out),
               [](const Matrix&, const Matrix& y, const Matrix& g) -> Matrix { return g.cwiseProduct(y); });
}

Var square(Var a) {
  Matrix out = a.value().array().square().matrix();
  return unary(a, std::move(out),
               [](const Matrix& x, const Matrix&, const Matrix& g) -> Matrix { return 2.0 * g.cwiseProduct(x); });
}

Var clamp(Var a, double lo, double hi) {
  Matrix out = a.value().cwiseMax(lo).cwiseMin(hi);
  return unary(a, std::move(out), [lo, hi](const Matrix& x, const Matrix&, const Matrix& g) -> Matrix {
    return g.cwiseProduct(x.unaryExpr([lo, hi](double v) { return (v < lo || v > hi) ? 0.0 : 1.0; }));
  });
}

Var map(Var a, std::function<double(double)> f, std::function<double(double)> df) {
  Matrix out = a.value().unaryExpr(f);
  return unary(a, std::move(out), [df = std::move(df)](const Matrix& x, const Matrix&, const Matrix& g) -> Matrix {
    return g.cwiseProduct(x.unaryExpr(df));
  });
}

Var sum(Var a) {
  const Eigen::Index r = a.rows(), c = a.cols();
  return unary(a, Matrix::Constant(1, 1, a.value().sum()),
               [r, c](const Matrix&, const Matrix&, const Matrix& g) -> Matrix { return Matrix::Constant(r, c, g(0, 0)); });
}

Var mean(Var a) {
  const Eigen::Index r = a.rows(), c = a.cols();
  if (a.value().size() == 0) throw std::invalid_argument("mean of empty matrix");
  const double n = static_cast<double>(a.value().size());
  return unary(a, Matrix::Constant(1, 1, a.value().sum() / n),
               [r, c, n](const Matrix&, const Matrix&, const Matrix& g) -> Matrix {
                 return Matrix::Constant(r, c, g(0, 0) / n);
               });
}

Var element(Var a, Eigen::Index r, Eigen::Index c) {
  const Eigen::Index rows = a.rows(), cols = a.cols();
  return unary(a, Matrix::Constant(1, 1, a.value()(r, c)),
               [r, c, rows, cols](const Matrix&, const Matrix&, const Matrix& g) -> Matrix {
                 Matrix out = Matrix::Zero(rows, cols);
                 out(r, c) = g(0, 0);
                 return out;
               });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    offsets.push_back(off);
    off += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts.front().tape()->record(std::move(out), parts, [inputs, offsets](Tape& t, const Matrix& g) {
    for (std::size_t k = 0; k < inputs.size(); ++k)
      t.accumulate(inputs[k], g.middleCols(offsets[k], inputs[k].cols()));
  });
}

Var select_rows(Var a, std::span<const int> rows) {
  std::vector<int> idx(rows.begin(), rows.end());
  Matrix out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = a.value().row(idx[k]);
  const Eigen::Index n = a.rows();
  return unary(a, std::move(out), [idx, n](const Matrix& x, const Matrix&, const Matrix& g) -> Matrix {
    Matrix ga = Matrix::Zero(n, x.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) ga.row(idx[k]) += g.row(static_cast<Eigen::Index>(k));
    return ga;
  });
}

Var replace_rows(Var base, Var token, std::span<const int> rows) {
  if (token.rows() != 1 || token.cols() != base.cols())
    throw std::invalid_argument("replace_rows: token must be 1 x cols");
  std::vector<int> idx(rows.begin(), rows.end());
  Matrix out = base.value();
  for (int r : idx) out.row(r) = token.value().row(0);
  return base.tape()->record(std::move(out), {base, token}, [base, token, idx](Tape& t, const Matrix& g) {
    if (base.requires_grad()) {
      Matrix gb = g;
      for (int r : idx) gb.row(r).setZero();
      t.accumulate(base, gb);
    }
    if (token.requires_grad()) {
      Matrix gt = Matrix::Zero(1, g.cols());
      for (int r : idx) gt.row(0) += g.row(r);
      t.accumulate(token, gt);
    }
  });
}

Var masked_softmax_rows(Var a, const BoolMatrix& mask) {
  const Matrix& x = a.value();
  if (mask.rows() != x.rows() || mask.cols() != x.cols())
    throw std::invalid_argument("masked_softmax_rows: mask shape mismatch");
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (mask(i, j)) mx = std::max(mx, x(i, j));
    if (!std::isfinite(mx)) throw std::invalid_argument("masked_softmax_rows: row without any unmasked entry");
    double z = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (!mask(i, j)) continue;
      out(i, j) = std::exp(x(i, j) - mx);
      z += out(i, j);
    }
    out.row(i) /= z;
  }
  return unary(a, std::move(out), [](const Matrix&, const Matrix& s, const Matrix& g) -> Matrix {
    const Eigen::VectorXd dot = g.cwiseProduct(s).rowwise().sum();
    return s.cwiseProduct(g - dot.replicate(1, g.cols()));
  });
}

Var softmax_rows(Var a) { return masked_softmax_rows(a, BoolMatrix::Constant(a.rows(), a.cols(), true)); }

Var logsumexp_rows(Var a) {
  const Matrix& x = a.value();
  if (x.cols() == 0) throw std::invalid_argument("logsumexp_rows: no columns");
  const Eigen::VectorXd mx = x.rowwise().maxCoeff();
  const Matrix e = (x - mx.replicate(1, x.cols())).array().exp().matrix();
  const Eigen::VectorXd z = e.rowwise().sum();
  Matrix out = (mx.array() + z.array().log()).matrix();
  Matrix soft = e.array().colwise() / z.array();
  return unary(a, std::move(out), [soft](const Matrix&, const Matrix&, const Matrix& g) -> Matrix {
    return soft.array().colwise() * g.col(0).array();
  });
}

Var row_standardize(Var a, double eps) {
  const Matrix& x = a.value();
  const Eigen::Index d = x.cols();
  if (d == 0) throw std::invalid_argument("row_standardize: no columns");
  const Eigen::VectorXd mu = x.rowwise().mean();
  const Matrix centered = x - mu.replicate(1, d);
  const Eigen::VectorXd var = centered.array().square().rowwise().mean();
  const Eigen::VectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix out = centered.array().colwise() * inv_std.array();
  return unary(a, std::move(out), [inv_std](const Matrix&, const Matrix& y, const Matrix& g) -> Matrix {
    const Eigen::VectorXd g_mean = g.rowwise().mean();
    const Eigen::VectorXd gy_mean = g.cwiseProduct(y).rowwise().mean();
    Matrix gx = g;
    gx.colwise() -= g_mean;
    gx -= (y.array().colwise() * gy_mean.array()).matrix();
    return gx.array().colwise() * inv_std.array();
  });
}

Var row_l2_normalize(Var a, double floor) {
  const Matrix& x = a.value();
  const Eigen::VectorXd norms = x.rowwise().norm();
  Eigen::VectorXd denom = norms.cwiseMax(floor);
  Matrix out = x.array().colwise() / denom.array();
  return unary(a, std::move(out), [norms, denom, floor](const Matrix&, const Matrix& y, const Matrix& g) -> Matrix {
    Matrix gx(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      if (norms(i) < floor) {
        gx.row(i).setZero();  // direction undefined; the row is held constant
      } else {
        const double proj = g.row(i).dot(y.row(i));
        gx.row(i) = (g.row(i) - proj * y.row(i)) / denom(i);
      }
    }
    return gx;
  });
}

Var row_dot(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "row_dot");
  Matrix out = a.value().cwiseProduct(b.value()).rowwise().sum();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, b.value().array().colwise() * g.col(0).array());
    if (b.requires_grad()) t.accumulate(b, a.value().array().colwise() * g.col(0).array());
  });
}

}  // namespace hgvae::ag
