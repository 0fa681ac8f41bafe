#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cfaf/types.hpp"

namespace cfaf {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent substream seed from a master seed and a path of
/// identifiers (setup id, realization id, stream tag, ...). Order matters.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (auto p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

/// Stream tags so that different random quantities never share a substream.
enum class Stream : std::uint64_t {
  kGeometry = 1,
  kShadowing = 2,
  kAccessFading = 3,
  kFronthaulFading = 4,
  kSymbols = 5,
};

constexpr std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

/// Circularly symmetric complex Gaussian with unit variance, CN(0, 1).
template <typename Real = double>
Complex<Real> standard_complex_normal(Rng& rng) {
  std::normal_distribution<Real> normal(Real(0), Real(1));
  const Real scale = std::sqrt(Real(0.5));
  const Real re = normal(rng);
  const Real im = normal(rng);
  return {scale * re, scale * im};
}

template <typename Real = double>
CMatrix<Real> standard_complex_normal(Index rows, Index cols, Rng& rng) {
  CMatrix<Real> out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = standard_complex_normal<Real>(rng);
  return out;
}

}  // namespace cfaf
