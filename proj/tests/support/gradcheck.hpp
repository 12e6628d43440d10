#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hgvae/parameters.hpp"

namespace hgvae::testing {

struct GradCheckReport {
  double worst_error = 0.0;
  std::string worst_tensor;
  int scalars_checked = 0;
  std::vector<std::pair<std::string, double>> per_tensor;
  std::vector<std::pair<std::string, double>> grad_norms;

  std::string summary() const {
    std::string out;
    for (std::size_t i = 0; i < per_tensor.size(); ++i)
      out += per_tensor[i].first + "=" + std::to_string(per_tensor[i].second) + " (|g| " +
             std::to_string(grad_norms[i].second) + ") ";
    return out;
  }
};

using LossFn = std::function<ag::Var(const BoundParameters&)>;

/// Compares tape gradients with central differences, one tensor at a time.
/// Error per tensor is |analytic - numeric| / max(|analytic|, |numeric|, floor).
inline GradCheckReport check_gradients(const ParameterSet& params, const LossFn& loss, double step = 1e-5,
                                       double floor = 1e-7) {
  ParameterSet analytic;
  {
    ag::Tape tape;
    BoundParameters bound(tape, params);
    ag::Var l = loss(bound);
    tape.backward(l);
    analytic = bound.gradients();
  }
  ParameterSet work = params;
  auto eval = [&] {
    ag::Tape tape;
    BoundParameters bound(tape, work);
    return loss(bound).scalar();
  };

  GradCheckReport report;
  for (auto& [name, value] : work) {
    Matrix numeric(value.rows(), value.cols());
    for (Eigen::Index i = 0; i < value.rows(); ++i)
      for (Eigen::Index j = 0; j < value.cols(); ++j) {
        const double orig = value(i, j);
        value(i, j) = orig + step;
        const double up = eval();
        value(i, j) = orig - step;
        const double down = eval();
        value(i, j) = orig;
        numeric(i, j) = (up - down) / (2 * step);
        ++report.scalars_checked;
      }
    const Matrix& a = analytic.at(name);
    const double err = (a - numeric).norm() / std::max({a.norm(), numeric.norm(), floor});
    report.per_tensor.emplace_back(name, err);
    report.grad_norms.emplace_back(name, a.norm());
    if (err > report.worst_error) {
      report.worst_error = err;
      report.worst_tensor = name;
    }
  }
  return report;
}

}  // namespace hgvae::testing
