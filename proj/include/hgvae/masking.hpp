#pragma once

#include <cstdint>
#include <vector>

#include "hgvae/autograd.hpp"

namespace hgvae {

/// Which target rows get their attributes replaced by the mask token.
struct MaskPlan {
  double rate = 0.0;
  std::vector<int> masked_ids;  // sorted ascending
  std::uint64_t seed = 0;
};

/// Samples round(rate * num_nodes) distinct ids uniformly without replacement.
MaskPlan make_mask_plan(int num_nodes, double rate, std::uint64_t seed);

/// Linear schedule from `initial` to `final_rate` over `total_epochs`; a
/// constant rate when the two are equal.
double mask_rate_at(double initial, double final_rate, int epoch, int total_epochs);

/// Row i of the result is the token for masked i, otherwise row i of features.
/// The token receives gradient from every masked row.
ag::Var mask_features(ag::Var features, const MaskPlan& plan, ag::Var token);
Matrix mask_features(const Matrix& features, const MaskPlan& plan, const Matrix& token);

}  // namespace hgvae
