#include "hgvae/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace hgvae {

void Adam::step(ParameterSet& params, const ParameterSet& grads) {
  if (m_.size() == 0) {
    m_ = params.zeros_like();
    v_ = params.zeros_like();
  }
  if (grads.size() != params.size() || m_.size() != params.size())
    throw std::invalid_argument("adam: parameter and gradient sets differ");
  ++steps_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  for (auto& [name, value] : params) {
    const Matrix& g = grads.at(name);
    Matrix& m = m_.at(name);
    Matrix& v = v_.at(name);
    m = options_.beta1 * m + (1.0 - options_.beta1) * g;
    v = options_.beta2 * v + (1.0 - options_.beta2) * g.cwiseAbs2();
    value.array() -= options_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + options_.eps);
  }
}

void Adam::restore(ParameterSet m, ParameterSet v, std::int64_t steps) {
  if (m.size() != v.size()) throw std::invalid_argument("adam: moment sets differ");
  m_ = std::move(m);
  v_ = std::move(v);
  steps_ = steps;
}

}  // namespace hgvae
