// Seeded sampling helpers. All randomness in the library flows through Rng so
// that identical seeds reproduce identical verdicts.
#pragma once

#include <cstdint>
#include <random>

#include "ellbranch/symmat.hpp"

namespace ellb {

using Rng = std::mt19937_64;

/// Orthonormal frame stored as columns.
struct Frame {
  int n = 0;
  std::array<Vec, kMaxDim> cols{};
};

double uniform(Rng& rng, double lo, double hi);
double normal(Rng& rng);
/// Log-uniform on [lo, hi], lo > 0.
double log_uniform(Rng& rng, double lo, double hi);
Vec random_unit(Rng& rng, int n);
/// Entries i.i.d. N(0, 1) before symmetrization, then rescaled to operator norm `norm`.
SymMat random_symmat(Rng& rng, int n, double norm = 1.0);
Frame random_rotation(Rng& rng, int n);
/// Q diag(d) Q^T
SymMat conjugate(const Frame& q, const Vec& d);
SymMat random_psd(Rng& rng, int n, double norm = 1.0);

}  // namespace ellb
