#include <numbers>

#include "ellbranch/branches.hpp"
#include "support.hpp"

using namespace ellb;
using namespace test;

namespace {

OperatorSpec make(OperatorSpec::Kind k, int n = 2) {
  OperatorSpec op;
  op.dim = n;
  op.kind = std::move(k);
  return op;
}

MatrixField diag_field(ScalarField a11, ScalarField a22) {
  return MatrixField::entries(2, {std::move(a11), ScalarField::constant(0.0), std::move(a22)});
}

const DomainSpec kBall = DomainSpec::ball(2);
const Sampler kSampler{400, 17, 10.0, 1e3};

}  // namespace

TEST_CASE("make_branch examples", "[branches]") {
  const BranchSpec MA = make_branch(make(OperatorSpec::MongeAmpere{ScalarField::constant(1.0)}), EllipticMapSpec::constant(kBall, psd(2)));
  const Vec x{0.1, 0.2};
  CHECK(contains(MA.theta.at(x), SymMat::identity(2, 2.0)));
  CHECK_FALSE(contains(MA.theta.at(x), SymMat::diag({2.0, 0.4})));

  const BranchSpec K = make_natural_branch(make(OperatorSpec::KthEigenvalue{2, ScalarField::constant(0.0)}), kBall);
  auto g = rng(31);
  for (int t = 0; t < 300; ++t) {
    const SymMat A = random_symmat(g, 2, 3.0);
    CHECK(contains(K.theta.at(x), A) == contains(dual_psd(2), A));
  }

  const double c = 0.5;
  const BranchSpec P =
      make_natural_branch(make(OperatorSpec::PerturbedMA{MatrixField::constant(SymMat::identity(2, c)), ScalarField::constant(0.0)}), kBall);
  CHECK(contains(P.theta.at(x), SymMat::identity(2, -c)));
  CHECK_FALSE(contains(P.theta.at(x), SymMat::identity(2, -c - 1e-3)));
}

TEST_CASE("evaluate examples", "[branches]") {
  const auto pucci = make(OperatorSpec::PucciMinus{1.0, 2.0, ScalarField::constant(0.0)});
  CHECK(evaluate(pucci, Vec{0.0, 0.0}, SymMat::diag({1.0, -1.0})) == Approx(-1.0));
  CHECK(pucci_minus_sampled(SymMat::diag({1.0, -1.0}), 1.0, 2.0, 100000, 3) == Approx(-1.0).margin(1e-2));

  const auto MA = make(OperatorSpec::MongeAmpere{ScalarField::constant(1.0)});
  CHECK(evaluate(MA, Vec{0.0, 0.0}, SymMat::identity(2)) == Approx(0.0).margin(1e-15));

  const auto M = MatrixField::entries(2, {ScalarField::norm(), ScalarField::constant(0.0), ScalarField::constant(0.0)});
  const auto pma = make(OperatorSpec::PerturbedMA{M, ScalarField::constant(0.0)});
  CHECK(evaluate(pma, Vec{0.1, 0.0}, SymMat::diag({0.0, 5.0})) == Approx(1.0 / std::numbers::sqrt2));
  CHECK_THROWS_AS(evaluate(pma, Vec{0.1, 0.0}, SymMat::diag({-1.0, 5.0})), AdmissibilityError);
  // eigenvalues of A + M within tol below zero are clamped
  CHECK(evaluate(pma, Vec{0.1, 0.0}, SymMat::diag({-0.1 - 1e-12, 5.0})) == Approx(0.0).margin(1e-9));
}

TEST_CASE("Pucci closed form matches the sampled infimum", "[branches]") {
  auto g = rng(32);
  for (int t = 0; t < 20; ++t) {
    const SymMat A = random_symmat(g, 2, 2.0);
    const double closed = pucci_minus(A, 0.5, 3.0);
    const double sampled = pucci_minus_sampled(A, 0.5, 3.0, 20000, 40 + t);
    CHECK(sampled >= closed - 1e-9);
    CHECK(sampled - closed <= 5e-2 * (1.0 + opnorm(A)));
  }
  // the sampled gap shrinks with the sample count
  const SymMat A = mat({{0.3, 1.1}, {1.1, -0.7}});
  const double coarse = pucci_minus_sampled(A, 0.5, 3.0, 100, 7) - pucci_minus(A, 0.5, 3.0);
  const double fine = pucci_minus_sampled(A, 0.5, 3.0, 100000, 7) - pucci_minus(A, 0.5, 3.0);
  CHECK(fine <= coarse + 1e-12);
}

TEST_CASE("bellman_MA_estimate examples", "[branches]") {
  const SymMat Z = SymMat::zero(2);
  const double e = bellman_MA_estimate(SymMat::identity(2), Z, 20000, 5);
  CHECK(e >= 1.0 - 1e-12);
  CHECK(e == Approx(1.0).margin(1e-2));
  CHECK(bellman_MA_estimate(Z, Z, 1000, 5) == Approx(0.0).margin(1e-12));
  CHECK(bellman_MA_estimate(SymMat::diag({3.0, 0.5}), SymMat::diag({1.0, 0.5}), 20000, 5) == Approx(2.0).margin(2e-2));
  CHECK_THROWS(bellman_MA_estimate(SymMat::diag({-1.0, 1.0}), Z, 100, 5));
}

TEST_CASE("degenerate ellipticity of every catalog operator", "[branches]") {
  auto a = diag_field(ScalarField::affine(1.5, {0.25, 0.0}), ScalarField::constant(1.2));
  const std::vector<OperatorSpec> ops = {
      make(OperatorSpec::MongeAmpere{ScalarField::norm()}),
      make(OperatorSpec::PerturbedMA{MatrixField::constant(SymMat::diag({0.5, 1.0})), ScalarField::constant(0.2)}),
      make(OperatorSpec::KthEigenvalue{1, ScalarField::constant(0.0)}),
      make(OperatorSpec::PucciMinus{0.5, 2.0, ScalarField::constant(0.0)}),
      make(OperatorSpec::LinearTrace{a, ScalarField::constant(0.0)}),
      truncated_linear(a, ScalarField::constant(0.3), 1.0, 2.0, 1.0, kBall),
      make(OperatorSpec::BellmanMA{MatrixField::constant(SymMat::identity(2)), ScalarField::constant(0.0)}),
  };
  auto g = rng(33);
  for (const auto& op : ops) {
    const EllipticMapSpec phi = natural_phi(op, kBall);
    for (int t = 0; t < 300; ++t) {
      const Vec x = kBall.sample_interior(g);
      SymMat A = random_symmat(g, 2, 3.0);
      if (!contains(phi.at(x), A)) {
        const auto b = boundary_shift(phi.at(x), A);
        REQUIRE(b);
        A = b->inside;
      }
      const SymMat P = random_psd(g, 2, 2.0);
      CHECK(evaluate(op, x, A + P) >= evaluate(op, x, A) - 1e-9);
    }
  }
}

TEST_CASE("MA non-total degeneracy", "[branches]") {
  auto g = rng(34);
  for (int n = 2; n <= 3; ++n) {
    for (int t = 0; t < 300; ++t) {
      const SymMat A = random_psd(g, n, 3.0);
      const double r = uniform(g, 1e-3, 2.0);
      CHECK(det(A.shifted(r)) >= det(A) + std::pow(r, n) - 1e-12);
    }
  }
}

TEST_CASE("kth eigenvalue branch is not convex", "[branches]") {
  const BranchSpec K = make_natural_branch(make(OperatorSpec::KthEigenvalue{2, ScalarField::constant(0.0)}), kBall);
  const EllipticSetSpec S = K.theta.at(Vec{0.0, 0.0});
  const SymMat A1 = SymMat::diag({-1.0, 0.0}), A2 = SymMat::diag({0.0, -1.0});
  CHECK(contains(S, A1));
  CHECK(contains(S, A2));
  CHECK_FALSE(contains(S, 0.5 * (A1 + A2)));
}

TEST_CASE("truncated linear examples", "[branches]") {
  const auto one = truncated_linear(MatrixField::constant(SymMat::identity(2)), ScalarField::constant(0.0), 1.0, 1.0, 1.0, kBall);
  const BranchSpec B = make_natural_branch(one, kBall);
  CHECK(contains(B.theta.at(Vec{0.3, 0.0}), SymMat::zero(2)));

  const auto a = diag_field(ScalarField::affine(1.0, {0.5, 0.0}), ScalarField::constant(1.0));
  const DomainSpec unit(DomainSpec::Box{Vec{0.0, 0.0}, Vec{1.0, 1.0}});
  const auto op = truncated_linear(a, ScalarField::constant(0.0), 1.0, 2.0, 5.0, unit);
  const BranchSpec T = make_natural_branch(op, unit);
  CHECK(uusc_check(T.theta, 0.1, 0.1, Sampler{1000, 12, 10.0, 1e3}).verdict != Verdict::Fail);
  const auto bound = truncated_norm_bound_check(op, unit, 0.1, Sampler{2000, 13, 10.0, 1e3});
  CHECK(bound.verdict != Verdict::Fail);
  CHECK(bound.samples_used > 0);
  // on [-1, 1]^2 the entry 1 + x1/2 drops below lambda = 1
  CHECK_THROWS_AS(truncated_linear(a, ScalarField::constant(0.0), 1.0, 2.0, 5.0, DomainSpec::unit_box(2)), SpectrumViolation);
}

TEST_CASE("branch condition examples", "[branches]") {
  const auto ma = [](double f) { return make(OperatorSpec::MongeAmpere{ScalarField::constant(f)}); };
  CHECK(branch_condition_check(make_natural_branch(ma(1.0), kBall), kSampler).verdict != Verdict::Fail);
  CHECK(branch_condition_check(make_natural_branch(ma(0.0), kBall), kSampler).verdict != Verdict::Fail);
  const BranchSpec K = make_natural_branch(make(OperatorSpec::KthEigenvalue{1, ScalarField::norm(2.0, -0.5)}), kBall);
  CHECK(branch_condition_check(K, kSampler).verdict != Verdict::Fail);

  const auto bad = branch_condition_check(make_natural_branch(ma(-1.0), kBall), kSampler);
  REQUIRE(bad.verdict == Verdict::Fail);
  REQUIRE(bad.witness);
  CHECK(evaluate(*make_natural_branch(ma(-1.0), kBall).op, *bad.witness->x, *bad.witness->A) > 0.5);
}

TEST_CASE("non-degeneracy examples", "[branches]") {
  CHECK(nondegeneracy_check(make_natural_branch(make(OperatorSpec::MongeAmpere{ScalarField::norm()}), kBall), kSampler).verdict != Verdict::Fail);
  CHECK(nondegeneracy_check(make_natural_branch(make(OperatorSpec::KthEigenvalue{2, ScalarField::constant(1.0)}), kBall), kSampler).verdict !=
        Verdict::Fail);
  const auto a = MatrixField::constant(SymMat::diag({1.0, 1.5}));
  const auto op = truncated_linear(a, ScalarField::constant(0.5), 1.0, 2.0, 1.0, kBall);
  CHECK(nondegeneracy_check(make_natural_branch(op, kBall), kSampler).verdict != Verdict::Fail);
}

TEST_CASE("branch theta keeps positivity and properness at sampled points", "[branches]") {
  const BranchSpec B = make_natural_branch(make(OperatorSpec::MongeAmpere{ScalarField::norm(1.0, 0.1)}), kBall);
  auto g = rng(35);
  for (int t = 0; t < 30; ++t) {
    const Vec x = kBall.sample_interior(g);
    const EllipticSetSpec S = certify_set(B.theta.at(x));
    REQUIRE(S.t_nonempty);
    REQUIRE(S.t_proper);
    CHECK(contains(S, SymMat::identity(2, *S.t_nonempty)));
    CHECK_FALSE(contains(S, SymMat::identity(2, -*S.t_proper)));
    const SymMat A = SymMat::identity(2, *S.t_nonempty) + random_symmat(g, 2, 0.5);
    if (contains(S, A)) CHECK(contains(S, A + random_psd(g, 2, 1.0)));
  }
}
