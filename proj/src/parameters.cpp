#include "hgvae/parameters.hpp"

#include <cmath>
#include <stdexcept>

namespace hgvae {

Matrix& ParameterSet::add(std::string name, Matrix value) {
  if (contains(name)) throw std::logic_error("duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
  return entries_.back().second;
}

Matrix& ParameterSet::at(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].second;
}

const Matrix& ParameterSet::at(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->at(name);
}

Eigen::Index ParameterSet::num_scalars() const {
  Eigen::Index n = 0;
  for (const auto& [_, m] : entries_) n += m.size();
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const auto& [name, m] : entries_) out.add(name, Matrix::Zero(m.rows(), m.cols()));
  return out;
}

bool ParameterSet::all_finite() const {
  for (const auto& [_, m] : entries_)
    if (!m.allFinite()) return false;
  return true;
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& [na, a] = entries_[i];
    const auto& [nb, b] = other.entries_[i];
    if (na != nb || a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
  }
  return true;
}

BoundParameters::BoundParameters(ag::Tape& tape, const ParameterSet& params) : source_(&params) {
  for (const auto& [name, m] : params) vars_.emplace(name, tape.variable(m));
}

ag::Var BoundParameters::operator[](std::string_view name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw std::out_of_range("unbound parameter '" + std::string(name) + "'");
  return it->second;
}

ParameterSet BoundParameters::gradients() const {
  ParameterSet out;
  for (const auto& [name, _] : *source_) out.add(name, vars_.at(name).grad());
  return out;
}

Matrix xavier_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng, double gain) {
  const double bound = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = u(rng);
  return out;
}

}  // namespace hgvae
