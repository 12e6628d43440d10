#pragma once

#include <cstdint>

#include "hgvae/parameters.hpp"

namespace hgvae {

struct AdamOptions {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam without weight decay. Moments are kept per named parameter.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  void step(ParameterSet& params, const ParameterSet& grads);

  const AdamOptions& options() const { return options_; }
  std::int64_t steps() const { return steps_; }
  const ParameterSet& first_moment() const { return m_; }
  const ParameterSet& second_moment() const { return v_; }

  /// Restores moments saved from an earlier run.
  void restore(ParameterSet m, ParameterSet v, std::int64_t steps);

 private:
  AdamOptions options_;
  ParameterSet m_;
  ParameterSet v_;
  std::int64_t steps_ = 0;
};

}  // namespace hgvae
