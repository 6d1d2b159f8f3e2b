// Helpers shared between translation units; not part of the public API.
#pragma once

#include <array>
#include <vector>

#include "ellbranch/ellset.hpp"

namespace ellb::detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

/// Zero plus rank-one and rank-two coordinate matrices at magnitudes 1, sqrt(cap), cap.
std::vector<SymMat> probe_matrices(int n, double cap);
/// Centroid plus points halfway to eight boundary points.
std::vector<Vec> probe_points(const DomainSpec& d);
/// Centroid, points at 90% of the way to eight boundary points, then `count` random interior points.
std::vector<Vec> sample_points(const DomainSpec& d, Rng& rng, std::size_t count);

bool is_all(const EllipticSetSpec& s);
/// A point of the constraint's boundary on the line A + tI (exact for translated PSD constraints).
SymMat phi_boundary(const EllipticSetSpec& phi, const SymMat& A);
/// F(x, A), or -infinity when A is outside the operator's admissible set.
double safe_eval(const OperatorSpec& op, const Vec& x, const SymMat& A);

/// Gaussian elimination with partial pivoting on a row-major n x n system; throws InvalidInput if singular.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b);

/// Primitive lattice directions with max-norm <= radius, one per antipodal pair.
std::vector<std::array<int, kMaxDim>> primitive_directions(int n, int radius);
/// All integer offsets with max-norm <= radius (including zero).
std::vector<std::array<int, kMaxDim>> offsets(int n, int radius);

}  // namespace ellb::detail
