#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace hgvae {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a path of integers,
/// e.g. derive_seed(seed, {epoch, stream}). Order matters.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Named seed streams used by the training loop.
enum class Stream : std::uint64_t {
  kInit = 1,
  kMask = 2,
  kView1 = 3,
  kView2 = 4,
  kNegatives = 5,
  kReparam = 6,
  kProbe = 7,
  kKMeans = 8,
  kSynthetic = 9,
};

constexpr std::uint64_t stream_seed(std::uint64_t base, Stream s, std::uint64_t epoch = 0) {
  return derive_seed(base, {static_cast<std::uint64_t>(s), epoch});
}

inline Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

}  // namespace hgvae
