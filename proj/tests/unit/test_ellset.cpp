#include "ellbranch/branches.hpp"
#include "support.hpp"

using namespace ellb;
using namespace test;

namespace {

OperatorSpec ma(ScalarField f, int n = 2) {
  OperatorSpec op;
  op.dim = n;
  op.kind = OperatorSpec::MongeAmpere{std::move(f)};
  return op;
}

OperatorSpec kth(int k, double f, int n = 2) {
  OperatorSpec op;
  op.dim = n;
  op.kind = OperatorSpec::KthEigenvalue{k, ScalarField::constant(f)};
  return op;
}

MatrixField diag_field(ScalarField a11, ScalarField a22) {
  return MatrixField::entries(2, {std::move(a11), ScalarField::constant(0.0), std::move(a22)});
}

}  // namespace

TEST_CASE("contains examples", "[ellset]") {
  CHECK(contains(psd(2), SymMat::identity(2)));
  CHECK(contains(dual_psd(2), SymMat::diag({1.0, -1.0})));
  CHECK_FALSE(contains(psd(2), SymMat::diag({1.0, -1.0})));
  CHECK_THROWS_AS(contains(psd(2), SymMat::identity(3)), DimensionMismatch);
}

TEST_CASE("interior_contains examples", "[ellset]") {
  CHECK(interior_contains(psd(2), SymMat::identity(2), 0.5));
  CHECK_FALSE(interior_contains(psd(2), SymMat::diag({1.0, 0.0}), 0.5));
  CHECK(interior_contains(dual_psd(2), SymMat::diag({-5.0, 1.0}), 0.5));
  CHECK_THROWS(interior_contains(psd(2), SymMat::identity(2), 0.0));
}

TEST_CASE("dual_contains examples", "[ellset]") {
  CHECK(dual_contains(psd(2), SymMat::diag({1.0, -1.0}), 1e-6));
  CHECK_FALSE(dual_contains(psd(2), -SymMat::identity(2), 1e-6));
  CHECK_THROWS(dual_contains(psd(2), SymMat::identity(2), -1.0));
}

TEST_CASE("enlarge_contains examples", "[ellset]") {
  CHECK(enlarge_contains(psd(2), -0.5 * SymMat::identity(2), 1.0));
  CHECK_FALSE(enlarge_contains(psd(2), -2.0 * SymMat::identity(2), 1.0));
  CHECK(enlarge_contains(dual_psd(2), SymMat::diag({-1.0, -0.5}), 0.6));
}

TEST_CASE("dual of Pk(k) is Pk(N-k+1) on random matrices", "[ellset]") {
  auto g = rng(21);
  for (int n = 2; n <= 4; ++n) {
    for (int k = 1; k <= n; ++k) {
      const EllipticSetSpec S = pk(n, k);
      const auto cf = closed_form_dual(S);
      REQUIRE(cf);
      for (int t = 0; t < 300; ++t) {
        const SymMat A = random_symmat(g, n, 3.0);
        const double l = lambda(A, n - k + 1);
        if (std::abs(l) < 1e-4) continue;
        CHECK(dual_contains(S, A, 1e-6) == (l >= 0.0));
        CHECK(contains(*cf, A) == (l >= 0.0));
      }
    }
  }
}

TEST_CASE("catalog double duals are exact", "[ellset]") {
  auto g = rng(22);
  for (int k = 1; k <= 3; ++k) {
    const EllipticSetSpec S = pk(3, k);
    const EllipticSetSpec dd = *closed_form_dual(*closed_form_dual(S));
    for (int t = 0; t < 200; ++t) {
      const SymMat A = random_symmat(g, 3, 2.0);
      CHECK(contains(dd, A) == contains(S, A));
    }
  }
  CHECK(closed_form_dual(psd(2))->kind_name() == dual_psd(2).kind_name());
}

TEST_CASE("double dual agrees outside the 2 eps shell for sublevel sets", "[ellset]") {
  const double eps = 1e-3;
  const EllipticSetSpec S = make_natural_branch(ma(ScalarField::constant(1.0)), DomainSpec::ball(2)).theta.at(Vec{0.0, 0.0});
  const EllipticSetSpec dd = dual(dual(S, eps), eps);
  auto g = rng(23);
  int tested = 0;
  for (int t = 0; t < 2000; ++t) {
    const SymMat A = random_symmat(g, 2, 3.0);
    if (distance_to(A, S) > 0.0 && distance_to(A, S) < 2 * eps) continue;
    if (interior_contains(S, A, 2 * eps) || !contains(S, A)) {
      CHECK(contains(dd, A) == contains(S, A));
      ++tested;
    }
  }
  CHECK(tested > 1000);
}

TEST_CASE("dual of a translate is the translated dual", "[ellset]") {
  auto g = rng(24);
  const SymMat M = random_symmat(g, 2, 1.0);
  const EllipticSetSpec T = translate(pk(2, 1), M);
  const EllipticSetSpec expect = translate(dual_psd(2), -M);
  for (int t = 0; t < 500; ++t) {
    const SymMat A = random_symmat(g, 2, 3.0);
    if (std::abs(lambda_max(A - M)) < 1e-4) continue;
    CHECK(dual_contains(T, A, 1e-6) == contains(expect, A));
  }
}

TEST_CASE("positivity, non-emptiness and properness witnesses", "[ellset]") {
  auto g = rng(25);
  const DomainSpec ball = DomainSpec::ball(2);
  const std::vector<EllipticSetSpec> sets = {
      psd(2), dual_psd(2), pk(3, 2), half_space(SymMat::diag({1.0, 2.0}), 0.5),
      truncated(psd(2), translate(dual_psd(2), SymMat::identity(2))),
      certify_set(make_natural_branch(ma(ScalarField::constant(1.0)), ball).theta.at(Vec{0.2, 0.1})),
      certify_set(make_natural_branch(kth(1, 0.5), ball).theta.at(Vec{0.0, 0.0})),
  };
  for (const auto& S : sets) {
    REQUIRE(S.t_nonempty);
    REQUIRE(S.t_proper);
    for (double t : {*S.t_nonempty, *S.t_nonempty + 1.0, *S.t_nonempty * 10.0 + 5.0}) CHECK(contains(S, SymMat::identity(S.dim, t)));
    for (double t : {*S.t_proper, *S.t_proper + 1.0, *S.t_proper * 10.0 + 5.0}) CHECK_FALSE(contains(S, SymMat::identity(S.dim, -t)));
    for (int i = 0; i < 200; ++i) {
      const SymMat A = random_symmat(g, S.dim, 4.0);
      if (contains(S, A)) CHECK(contains(S, A + random_psd(g, S.dim, 2.0)));
    }
  }
}

TEST_CASE("sum of duals lies in the dual of PSD", "[ellset]") {
  auto g = rng(26);
  const std::vector<EllipticSetSpec> sets = {psd(2), pk(3, 2), dual_psd(2), half_space(SymMat::diag({1.0, 3.0}), -1.0)};
  const double eps = 1e-6;
  for (const auto& S : sets) {
    int pairs = 0;
    for (int t = 0; t < 3000 && pairs < 300; ++t) {
      const SymMat A = random_symmat(g, S.dim, 3.0), B = random_symmat(g, S.dim, 3.0);
      if (!contains(S, A) || !dual_contains(S, B, eps)) continue;
      CHECK(lambda_max(A + B) >= -S.dim * eps);
      ++pairs;
    }
    CHECK(pairs > 50);
  }
}

TEST_CASE("distance_to is exact for PSD and its translates", "[ellset]") {
  auto g = rng(27);
  for (int t = 0; t < 300; ++t) {
    const SymMat A = random_symmat(g, 3, 5.0);
    CHECK_THAT(distance_to(A, psd(3)), WithinAbs(std::max(0.0, -lambda_min(A)), 1e-9));
    CHECK_THAT(distance_to(A, translate(psd(3), SymMat::identity(3, 0.7))), WithinAbs(std::max(0.0, 0.7 - lambda_min(A)), 1e-9));
  }
}

TEST_CASE("boundary_shift lands on the boundary", "[ellset]") {
  const EllipticSetSpec S = make_natural_branch(ma(ScalarField::constant(1.0)), DomainSpec::ball(2)).theta.at(Vec{0.0, 0.0});
  const auto b = boundary_shift(S, SymMat::diag({4.0, 0.0}));
  REQUIRE(b);
  // det(diag(4 + t, t)) = 1 at t = -2 + sqrt(5)
  CHECK_THAT(b->t, WithinAbs(std::sqrt(5.0) - 2.0, 1e-9));
}

TEST_CASE("hausdorff estimate examples", "[ellset]") {
  const Sampler s{10000, 3, 10.0, 1e3};
  CHECK(hausdorff_estimate(psd(2), psd(2), s) == 0.0);
  const double d = hausdorff_estimate(psd(2), translate(psd(2), SymMat::identity(2, 0.7)), s);
  CHECK(d <= 0.7 + 1e-9);
  CHECK(d >= 0.65);
  CHECK(std::isinf(hausdorff_estimate(psd(2), dual_psd(2), s)));
  CHECK_THROWS(hausdorff_estimate(psd(2), psd(2), Sampler{0, 1, 10.0, 1e3}));
}

TEST_CASE("hausdorff estimate is nondecreasing in the sample count", "[ellset]") {
  const EllipticSetSpec a = psd(2), b = translate(pk(2, 1), SymMat::diag({0.3, 0.9}));
  double prev = 0.0;
  for (std::size_t n : {10u, 100u, 1000u, 5000u}) {
    const double d = hausdorff_estimate(a, b, Sampler{n, 9, 10.0, 1e3});
    CHECK(d >= prev - 1e-12);
    prev = d;
  }
}

TEST_CASE("cone_contains examples", "[ellset]") {
  const DomainSpec ball = DomainSpec::ball(2);
  const EllipticSetSpec MA = make_natural_branch(ma(ScalarField::constant(1.0)), ball).theta.at(Vec{0.0, 0.0});
  CHECK(cone_contains(MA, SymMat::identity(2)));
  CHECK_FALSE(cone_contains(MA, SymMat::diag({1.0, 0.0})));
  const EllipticSetSpec K = make_natural_branch(kth(1, 5.0), ball).theta.at(Vec{0.0, 0.0});
  CHECK(cone_contains(K, SymMat::diag({0.5, 2.0})));
  const EllipticSetSpec K2 = make_natural_branch(kth(2, 5.0), ball).theta.at(Vec{0.0, 0.0});
  CHECK(cone_contains(K2, SymMat::diag({-3.0, 0.5})));
  CHECK_FALSE(cone_contains(K2, SymMat::diag({-3.0, -0.5})));
  CHECK_THROWS(cone_test(MA, SymMat::identity(2), {}));
}

TEST_CASE("uusc: constant map passes, MA with |x| passes, linear map fails", "[ellset]") {
  const Sampler s{2000, 4, 10.0, 1e3};
  const auto c = uusc_check(EllipticMapSpec::constant(DomainSpec::unit_box(2), psd(2)), 0.3, 0.5, s);
  CHECK(c.verdict != Verdict::Fail);

  const auto MA = make_natural_branch(ma(ScalarField::norm()), DomainSpec::unit_box(2)).theta;
  const auto r = uusc_check(MA, 0.5, 0.2, s);
  CHECK(r.verdict == Verdict::PassUpToCap);

  OperatorSpec lin;
  lin.dim = 2;
  lin.kind = OperatorSpec::LinearTrace{diag_field(ScalarField::affine(1.0, {1.0, 0.0}), ScalarField::constant(1.0)), ScalarField::constant(0.0)};
  const auto L = make_natural_branch(lin, DomainSpec(DomainSpec::Box{Vec{0.0, 0.0}, Vec{1.0, 1.0}})).theta;
  const auto f = uusc_check(L, 0.1, 0.2, s);
  REQUIRE(f.verdict == Verdict::Fail);
  REQUIRE(f.witness);
  CHECK(opnorm(*f.witness->A) > 10.0);
  CHECK(replay_uusc(L, 0.1, *f.witness));
}

TEST_CASE("uusc verdicts are seed deterministic", "[ellset]") {
  const auto MA = make_natural_branch(ma(ScalarField::norm()), DomainSpec::unit_box(2)).theta;
  const auto a = to_json(uusc_check(MA, 0.5, 0.2, Sampler{500, 8, 10.0, 1e3}));
  const auto b = to_json(uusc_check(MA, 0.5, 0.2, Sampler{500, 8, 10.0, 1e3}));
  CHECK(a.dump() == b.dump());
}

TEST_CASE("uusc implies Hausdorff continuity on samples", "[ellset]") {
  const auto MA = make_natural_branch(ma(ScalarField::norm()), DomainSpec::unit_box(2)).theta;
  const double eps = 0.5, delta = 0.2;
  REQUIRE(uusc_check(MA, eps, delta, Sampler{2000, 4, 10.0, 1e3}).verdict != Verdict::Fail);
  auto g = rng(28);
  const DomainSpec box = DomainSpec::unit_box(2);
  for (int t = 0; t < 10; ++t) {
    const Vec x = box.sample_interior(g);
    Vec y = x + (0.9 * delta) * random_unit(g, 2);
    if (!box.contains(y)) continue;
    CHECK(hausdorff_estimate(MA.at(x), MA.at(y), Sampler{500, 5, 10.0, 1e3}) <= eps + 1e-6);
  }
}

TEST_CASE("associated cone is constant across the domain", "[ellset]") {
  const auto MA = make_natural_branch(ma(ScalarField::norm()), DomainSpec::unit_box(2)).theta;
  auto g = rng(29);
  for (int t = 0; t < 40; ++t) {
    const Vec x = DomainSpec::unit_box(2).sample_interior(g), y = DomainSpec::unit_box(2).sample_interior(g);
    const SymMat A = random_symmat(g, 2, 2.0);
    if (std::abs(lambda_min(A)) < 0.2) continue;
    CHECK(cone_contains(MA.at(x), A) == cone_contains(MA.at(y), A));
  }
}

TEST_CASE("extend_to_closure examples", "[ellset]") {
  const DomainSpec ball = DomainSpec::ball(2);
  const Vec x0{1.0, 0.0};
  OperatorSpec op = ma(ScalarField::constant(1.0));
  CHECK(extend_to_closure(make_natural_branch(op, ball).theta, x0, SymMat::identity(2, 2.0), 0.1, 0.05));
  CHECK_FALSE(extend_to_closure(EllipticMapSpec::constant(ball, psd(2)), x0, -SymMat::identity(2), 0.1, 0.05));
  CHECK(extend_to_closure(make_natural_branch(kth(1, 0.0), ball).theta, x0, SymMat::diag({0.0, 3.0}), 0.1, 0.05));
}

TEST_CASE("delta grid is geometric in the domain width", "[ellset]") {
  const auto d = delta_grid(DomainSpec::unit_box(2), 5);
  REQUIRE(d.size() == 5);
  CHECK(d[0] == Approx(0.5 * DomainSpec::unit_box(2).width()));
  for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] == Approx(0.5 * d[i - 1]));
}
