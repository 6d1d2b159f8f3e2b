#pragma once

#include <catch_amalgamated.hpp>

#include "ellbranch/random.hpp"
#include "ellbranch/symmat.hpp"

namespace test {

using Catch::Approx;
using Catch::Matchers::WithinAbs;

inline ellb::Rng rng(std::uint64_t seed) { return ellb::Rng(seed); }

inline ellb::SymMat mat(std::initializer_list<std::initializer_list<double>> rows) { return ellb::SymMat::from_rows(rows); }

// Independent 2x2 eigenvalues: (a + d)/2 -+ sqrt(((a - d)/2)^2 + b^2).
inline std::array<double, 2> eig2(const ellb::SymMat& A) {
  const double m = 0.5 * (A(0, 0) + A(1, 1));
  const double r = std::hypot(0.5 * (A(0, 0) - A(1, 1)), A(0, 1));
  return {m - r, m + r};
}

inline double eig_min2(const ellb::SymMat& A) { return eig2(A)[0]; }
inline double eig_max2(const ellb::SymMat& A) { return eig2(A)[1]; }

}  // namespace test
