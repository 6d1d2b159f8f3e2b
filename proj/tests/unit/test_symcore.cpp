#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace ellb;
using namespace test;

namespace {

// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric solution of the cubic).
std::array<double, 3> eig3(const SymMat& A) {
  const double p1 = A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2);
  const double q = A.trace() / 3.0;
  const double p2 = std::pow(A(0, 0) - q, 2) + std::pow(A(1, 1) - q, 2) + std::pow(A(2, 2) - q, 2) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) return {q, q, q};
  const SymMat B = (1.0 / p) * (A - SymMat::identity(3, q));
  const double r = std::clamp(det(B) / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e3, 3.0 * q - e1 - e3, e1};
}

}  // namespace

TEST_CASE("eigs on the listed examples", "[symcore]") {
  auto v = eigenvalues(SymMat::identity(2));
  CHECK(v[0] == Approx(1.0));
  CHECK(v[1] == Approx(1.0));
  v = eigenvalues(SymMat::diag({3.0, -1.0}));
  CHECK(v[0] == Approx(-1.0));
  CHECK(v[1] == Approx(3.0));
  v = eigenvalues(mat({{0, 1}, {1, 0}}));
  CHECK_THAT(v[0], WithinAbs(-1.0, 1e-14));
  CHECK_THAT(v[1], WithinAbs(1.0, 1e-14));
}

TEST_CASE("eigs agrees with closed forms in 2 and 3 dimensions", "[symcore]") {
  auto g = rng(11);
  for (int t = 0; t < 500; ++t) {
    const SymMat A = random_symmat(g, 2, log_uniform(g, 1e-3, 1e3));
    const auto v = eigenvalues(A);
    const auto w = eig2(A);
    const double scale = 1.0 + A.frobenius();
    CHECK_THAT(v[0], WithinAbs(w[0], 1e-12 * scale));
    CHECK_THAT(v[1], WithinAbs(w[1], 1e-12 * scale));
  }
  for (int t = 0; t < 500; ++t) {
    const SymMat A = random_symmat(g, 3, 5.0);
    const auto v = eigenvalues(A);
    const auto w = eig3(A);
    for (int i = 0; i < 3; ++i) CHECK_THAT(v[i], WithinAbs(w[i], 1e-9 * (1.0 + A.frobenius())));
  }
}

TEST_CASE("eigs: sorted, trace preserving, orthonormal reconstruction", "[symcore]") {
  auto g = rng(12);
  for (int n = 1; n <= kMaxDim; ++n) {
    for (int t = 0; t < 200; ++t) {
      const SymMat A = random_symmat(g, n, log_uniform(g, 1e-2, 1e4));
      const EigDecomp e = eigs(A);
      const double tol = 1e-10 * (1.0 + opnorm(A));
      double sum = 0.0;
      SymMat R(n);
      for (int i = 0; i < n; ++i) {
        if (i > 0) CHECK(e.values[i - 1] <= e.values[i]);
        sum += e.values[i];
        R += e.values[i] * outer(e.frame[i], e.frame[i]);
        for (int j = 0; j < n; ++j) CHECK_THAT(e.frame[i].dot(e.frame[j]), WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
      }
      CHECK_THAT(sum, WithinAbs(A.trace(), tol));
      CHECK(opnorm(R - A) <= tol);
    }
  }
}

TEST_CASE("eigs is deterministic and rejects non-finite input", "[symcore]") {
  auto g = rng(13);
  const SymMat A = random_symmat(g, 4, 3.0);
  const EigDecomp a = eigs(A), b = eigs(A);
  for (int i = 0; i < 4; ++i) {
    CHECK(a.values[i] == b.values[i]);
    CHECK(a.frame[i] == b.frame[i]);
  }
  SymMat bad(2);
  bad.set(0, 1, std::nan(""));
  CHECK_THROWS_AS(eigs(bad), InvalidInput);
  CHECK_THROWS_AS(SymMat(kMaxDim + 1), DimensionMismatch);
  CHECK_THROWS_AS(SymMat(0), DimensionMismatch);
}

TEST_CASE("construction symmetrizes", "[symcore]") {
  const SymMat A = SymMat::from_rows({{1.0, 2.0}, {0.0, 3.0}});
  CHECK(A(0, 1) == 1.0);
  CHECK(A(1, 0) == 1.0);
  CHECK_THROWS_AS(SymMat::from_rows({{1.0, 2.0}, {0.0}}), DimensionMismatch);
}

TEST_CASE("opnorm examples and norm properties", "[symcore]") {
  CHECK(opnorm(SymMat::zero(2)) == 0.0);
  CHECK(opnorm(SymMat::diag({3.0, -5.0})) == Approx(5.0));
  CHECK(opnorm(mat({{0, 2}, {2, 0}})) == Approx(2.0));
  auto g = rng(14);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + t % kMaxDim;
    const SymMat A = random_symmat(g, n, 3.0), B = random_symmat(g, n, 3.0);
    const double c = uniform(g, -4.0, 4.0);
    CHECK(opnorm(A + B) <= opnorm(A) + opnorm(B) + 1e-12);
    CHECK_THAT(opnorm(c * A), WithinAbs(std::abs(c) * opnorm(A), 1e-12 * (1.0 + opnorm(A))));
  }
}

TEST_CASE("outer examples", "[symcore]") {
  CHECK(outer(Vec{1.0, 0.0}, Vec{1.0, 0.0}) == SymMat::diag({1.0, 0.0}));
  CHECK(outer(Vec{1.0, 0.0}, Vec{0.0, 1.0}) == mat({{0, 0.5}, {0.5, 0}}));
  const double s = 1.0 / std::sqrt(2.0);
  const SymMat P = outer(Vec{s, s}, Vec{s, s});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK_THAT(P(i, j), WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(outer(Vec{1.0, 0.0}, Vec{1.0, 0.0, 0.0}), DimensionMismatch);
}

TEST_CASE("Loewner order is a partial order on samples", "[symcore]") {
  auto g = rng(15);
  for (int t = 0; t < 300; ++t) {
    const SymMat A = random_symmat(g, 3, 2.0);
    const SymMat B = A + random_psd(g, 3, 1.0);
    const SymMat C = B + random_psd(g, 3, 1.0);
    CHECK(loewner_geq(A, A));
    CHECK(loewner_geq(B, A));
    CHECK(loewner_geq(C, B));
    CHECK(loewner_geq(C, A));
    if (loewner_geq(A, B)) CHECK(opnorm(A - B) <= 1e-8);
  }
}

TEST_CASE("det and trace parts", "[symcore]") {
  CHECK(det(mat({{2, 1}, {1, 3}})) == Approx(5.0));
  CHECK(det(SymMat::diag({2.0, 3.0, 4.0})) == Approx(24.0));
  const TraceParts p = trace_parts(SymMat::diag({2.0, -3.0, 0.5}));
  CHECK(p.positive == Approx(2.5));
  CHECK(p.negative == Approx(3.0));
}
