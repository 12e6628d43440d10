#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hgvae/autograd.hpp"
#include "hgvae/rng.hpp"

namespace hgvae {

/// Named, insertion-ordered collection of learnable matrices.
class ParameterSet {
 public:
  using Entry = std::pair<std::string, Matrix>;

  Matrix& add(std::string name, Matrix value);
  Matrix& at(std::string_view name);
  const Matrix& at(std::string_view name) const;
  bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }
  std::size_t size() const { return entries_.size(); }
  Eigen::Index num_scalars() const;

  std::vector<Entry>::iterator begin() { return entries_.begin(); }
  std::vector<Entry>::iterator end() { return entries_.end(); }
  std::vector<Entry>::const_iterator begin() const { return entries_.begin(); }
  std::vector<Entry>::const_iterator end() const { return entries_.end(); }

  ParameterSet zeros_like() const;
  bool all_finite() const;
  bool operator==(const ParameterSet& other) const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// The parameters of a ParameterSet recorded as leaves on a tape.
class BoundParameters {
 public:
  BoundParameters(ag::Tape& tape, const ParameterSet& params);

  ag::Var operator[](std::string_view name) const;
  /// Gradients from the tape's last backward(), shaped like the source set.
  ParameterSet gradients() const;

 private:
  const ParameterSet* source_;
  std::map<std::string, ag::Var, std::less<>> vars_;
};

/// Glorot-uniform initialization scaled by `gain`.
Matrix xavier_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng, double gain = 1.0);

}  // namespace hgvae
