#include "hgvae/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hgvae/rng.hpp"

namespace hgvae {

MaskPlan make_mask_plan(int num_nodes, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("mask rate must lie in [0, 1]");
  const int k = static_cast<int>(std::lround(rate * num_nodes));
  std::vector<int> ids(num_nodes);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, num_nodes - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return MaskPlan{rate, std::move(ids), seed};
}

double mask_rate_at(double initial, double final_rate, int epoch, int total_epochs) {
  if (total_epochs <= 1 || initial == final_rate) return initial;
  const double frac = std::clamp(static_cast<double>(epoch) / (total_epochs - 1), 0.0, 1.0);
  return initial + (final_rate - initial) * frac;
}

ag::Var mask_features(ag::Var features, const MaskPlan& plan, ag::Var token) {
  if (token.rows() != 1 || token.cols() != features.cols())
    throw std::invalid_argument("mask token length " + std::to_string(token.cols()) + " != feature dim " +
                                std::to_string(features.cols()));
  return ag::replace_rows(features, token, plan.masked_ids);
}

Matrix mask_features(const Matrix& features, const MaskPlan& plan, const Matrix& token) {
  if (token.rows() != 1 || token.cols() != features.cols())
    throw std::invalid_argument("mask token length " + std::to_string(token.cols()) + " != feature dim " +
                                std::to_string(features.cols()));
  Matrix out = features;
  for (int i : plan.masked_ids) out.row(i) = token.row(0);
  return out;
}

}  // namespace hgvae
