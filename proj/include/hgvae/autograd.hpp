#pragma once

// Minimal reverse-mode differentiation over dense double matrices.
//
// A Tape records every operation applied to its Vars in creation order;
// backward() walks the record in reverse and accumulates gradients. Only
// nodes that transitively depend on a variable() leaf keep a backward rule.
// Everything is full-batch and single-threaded.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hgvae {

using Matrix = Eigen::MatrixXd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

namespace ag {

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  /// Gradient of the last backward() root w.r.t. this node; zeros if unreached.
  Matrix grad() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  /// Receives the gradient flowing into the node and pushes it to its inputs.
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);

  /// Records an op result. The rule is dropped when no input requires grad.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  /// Seeds d(root)/d(root) = 1 and propagates. Root must be 1x1.
  /// Clears gradients from any previous backward() first.
  void backward(Var root);

  void accumulate(int id, const Matrix& g);
  template <typename Expr>
  void accumulate(const Var& v, const Expr& g) {
    if (!nodes_[v.id()].requires_grad) return;
    accumulate(v.id(), Matrix(g));
  }

  const Matrix& value(int id) const { return nodes_[id].value; }
  Matrix grad(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Linear algebra.
Var matmul(Var a, Var b);
Var matmul(Var a, const Matrix& b);
/// (a masked to `mask`) * b, touching only the true entries of the mask.
/// Equals matmul(a, b) when a is zero outside the mask; a's gradient is zero there.
Var masked_matmul(Var a, const BoolMatrix& mask, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double c);
/// a * s where s is a 1x1 Var.
Var scale_by(Var a, Var s);
/// out(i,j) = a(i,j) * c(i,j) with c constant (dropout masks).
Var multiply_constant(Var a, const Matrix& c);
/// a + row broadcast over rows; row is 1 x a.cols().
Var add_row(Var a, Var row);
/// out(i,j) = col(i) + row(j); col is n x 1, row is 1 x m.
Var add_col_row(Var col, Var row);

// Elementwise.
Var leaky_relu(Var a, double slope);
Var elu(Var a, double alpha = 1.0);
Var relu(Var a);
Var tanh(Var a);
Var exp(Var a);
Var square(Var a);
/// Values outside [lo, hi] are clamped and receive zero gradient.
Var clamp(Var a, double lo, double hi);
/// Generic elementwise map with a caller-supplied derivative.
Var map(Var a, std::function<double(double)> f, std::function<double(double)> df);

// Reductions and reshaping.
Var sum(Var a);
Var mean(Var a);
Var element(Var a, Eigen::Index r, Eigen::Index c);
Var concat_cols(std::span<const Var> parts);
Var select_rows(Var a, std::span<const int> rows);
/// Rows listed in `rows` replaced by `token` (1 x cols); the rest copied from `base`.
Var replace_rows(Var base, Var token, std::span<const int> rows);

// Row-wise.
/// Softmax over entries where mask(i,j) is true; masked entries output 0.
/// Every row must have at least one true entry.
Var masked_softmax_rows(Var a, const BoolMatrix& mask);
Var softmax_rows(Var a);
Var logsumexp_rows(Var a);
/// (x - mean) / sqrt(var + eps) per row, population variance.
Var row_standardize(Var a, double eps);
/// x / max(|x|, floor) per row. Rows with norm below floor pass no gradient.
Var row_l2_normalize(Var a, double floor = 1e-12);
/// n x 1 column of per-row inner products.
Var row_dot(Var a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, double c) { return scale(a, c); }
inline Var operator*(double c, Var a) { return scale(a, c); }

}  // namespace ag
}  // namespace hgvae
