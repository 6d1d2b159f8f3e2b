#include <numbers>

#include "ellbranch/conditions.hpp"
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

const DomainSpec kBox = DomainSpec::unit_box(2);
const DomainSpec kUnit(DomainSpec::Box{Vec{0.0, 0.0}, Vec{1.0, 1.0}});

}  // namespace

TEST_CASE("ucf for Monge-Ampere with f = |x|", "[conditions]") {
  const auto op = make(OperatorSpec::MongeAmpere{ScalarField::norm()});
  const auto phi = natural_phi(op, kBox);
  const auto r = ucf_check(op, phi, 0.5, Sampler{2000, 41, 10.0, 1e3}, 1.0);
  CHECK(r.verdict != Verdict::Fail);
  CHECK(r.details.at("certified_delta").get<double>() >= 0.25);
  CHECK_THROWS(ucf_check(op, phi, 2.0, Sampler{10, 41, 10.0, 1e3}, 1.0));
}

TEST_CASE("ucf with constant f passes at every delta", "[conditions]") {
  const auto op = make(OperatorSpec::MongeAmpere{ScalarField::constant(0.7)});
  const auto phi = natural_phi(op, kBox);
  const auto grid = delta_grid(kBox);
  for (double delta : {grid.front(), grid[5], grid.back()}) CHECK(ucf_check_at(op, phi, 0.1, delta, Sampler{500, 42, 10.0, 1e3}).verdict != Verdict::Fail);
  const auto r = ucf_check(op, phi, 0.1, Sampler{500, 42, 10.0, 1e3});
  CHECK(r.details.at("certified_delta").get<double>() == Approx(grid.front()));
}

TEST_CASE("ucf fails for a non-constant linear operator and the witness replays", "[conditions]") {
  const auto a = MatrixField::entries(2, {ScalarField::affine(1.0, {1.0, 0.0}), ScalarField::constant(0.0), ScalarField::constant(1.0)});
  const auto op = make(OperatorSpec::LinearTrace{a, ScalarField::constant(0.0)});
  const auto r = ucf_check(op, natural_phi(op, kUnit), 0.1, Sampler{2000, 43, 10.0, 1e3});
  REQUIRE(r.verdict == Verdict::Fail);
  REQUIRE(r.witness);
  CHECK(opnorm(*r.witness->A) > 10.0);
  CHECK(replay_ucf(op, 0.1, *r.witness));
}

TEST_CASE("ucf certified delta is monotone in eps", "[conditions]") {
  const auto op = make(OperatorSpec::MongeAmpere{ScalarField::norm()});
  const auto phi = natural_phi(op, kBox);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.8, 0.5, 0.3, 0.1}) {
    const auto r = ucf_check(op, phi, eps, Sampler{1000, 44, 10.0, 1e3}, 1.0);
    REQUIRE(r.verdict != Verdict::Fail);
    const double d = r.details.at("certified_delta").get<double>();
    CHECK(d <= prev);
    prev = d;
  }
}

TEST_CASE("gntd estimate examples", "[conditions]") {
  const Sampler s{2000, 45, 10.0, 1e3};
  CHECK(gntd_estimate({GKind::Det, 1}, psd(2), 0.5, s) >= 0.25 - 1e-9);
  CHECK(gntd_estimate({GKind::LambdaK, 1}, whole_space(2), 0.3, s) == Approx(0.3).margin(1e-9));
  CHECK(gntd_estimate({GKind::LambdaK, 2}, whole_space(3), 0.3, s) == Approx(0.3).margin(1e-9));
  CHECK(gntd_estimate({GKind::Trace, 1}, whole_space(2), 0.5, s) == Approx(1.0).margin(1e-9));
}

TEST_CASE("caba2 examples", "[conditions]") {
  const SymMat Z = SymMat::zero(2);
  CHECK(caba2_admissible(Z, Z, 0.1));
  CHECK(caba2_admissible(SymMat::diag({0.0, 5.0}), SymMat::diag({0.0, 10.0}), 10.0 / 3.0));
  CHECK_FALSE(caba2_admissible(SymMat::identity(2), -SymMat::identity(2), 0.01));
  CHECK_THROWS(caba2_admissible(Z, SymMat::zero(3), 0.1));
}

TEST_CASE("caba2 agrees with a direct block-matrix eigenvalue oracle", "[conditions]") {
  // For 1x1 blocks the two 2x2 inequalities reduce to closed forms.
  auto g = rng(46);
  for (int t = 0; t < 500; ++t) {
    const double a = uniform(g, -3, 3), b = uniform(g, -3, 3), alpha = uniform(g, 0.05, 2.0);
    const bool first = a >= -3 * alpha && -b >= -3 * alpha;
    const SymMat K = mat({{3 * alpha - a, -3 * alpha}, {-3 * alpha, 3 * alpha + b}});
    const double margin = std::min({a + 3 * alpha, 3 * alpha - b, std::abs(eig_min2(K))});
    if (margin < 1e-6) continue;
    const bool expect = first && eig_min2(K) >= 0.0;
    CHECK(caba2_admissible(SymMat::diag({a}), SymMat::diag({b}), alpha) == expect);
  }
}

TEST_CASE("classical falsifier reproduces the constant gap", "[conditions]") {
  const auto op = classical_counterexample_operator();
  const auto r = classical_falsify(op, {0.1});
  CHECK_THAT(r.details.at("gap_trace")[0].at("gap").get<double>(), WithinAbs(1.0 / std::numbers::sqrt2, 1e-12));

  const auto small = classical_falsify(op, {1e-6});
  const auto& row = small.details.at("gap_trace")[0];
  CHECK_THAT(row.at("gap").get<double>(), WithinAbs(1.0 / std::numbers::sqrt2, 1e-9));
  CHECK_THAT(row.at("modulus_argument").get<double>(), WithinAbs(4e-6 / 3.0, 1e-15));

  const auto full = classical_falsify(op, default_falsify_radii());
  CHECK(full.verdict == Verdict::Fail);
  for (const auto& e : full.details.at("gap_trace")) CHECK(std::abs(e.at("gap").get<double>() - 1.0 / std::numbers::sqrt2) <= 1e-9);
  REQUIRE(full.witness);
  const Witness& w = *full.witness;
  CHECK(caba2_admissible(*w.A, *w.B, *w.alpha));
  CHECK(evaluate(op, *w.x, *w.A) - evaluate(op, *w.y, *w.B) >= 1.0 / std::numbers::sqrt2 - 1e-9);
}

TEST_CASE("classical falsifier: f only shifts the gap by its modulus", "[conditions]") {
  const auto zero = classical_falsify(classical_counterexample_operator(), {1e-2, 1e-4, 1e-6});
  const auto norm = classical_falsify(classical_counterexample_operator(ScalarField::norm()), {1e-2, 1e-4, 1e-6});
  for (int i = 0; i < 3; ++i) {
    const double r = zero.details.at("gap_trace")[i].at("x_norm").get<double>();
    const double d = norm.details.at("gap_trace")[i].at("gap").get<double>() - zero.details.at("gap_trace")[i].at("gap").get<double>();
    CHECK(std::abs(d) <= r + 1e-15);
  }
  CHECK_THROWS(classical_falsify(make(OperatorSpec::MongeAmpere{ScalarField::constant(0.0)}), {0.1}));
}

TEST_CASE("sum of duals examples", "[conditions]") {
  CHECK(lambda_max(SymMat::zero(2) + SymMat::diag({-5.0, 1.0})) == Approx(1.0));
  CHECK(sum_duals_check(EllipticMapSpec::constant(kBox, psd(2)), Sampler{1000, 47, 10.0, 1e3}).verdict != Verdict::Fail);
  const auto MA = make_natural_branch(make(OperatorSpec::MongeAmpere{ScalarField::constant(1.0)}), kBox).theta;
  CHECK(sum_duals_check(MA, Sampler{1000, 48, 10.0, 1e3}).verdict != Verdict::Fail);
}

TEST_CASE("condition reports serialize with a stable field order", "[conditions]") {
  const auto r = classical_falsify(classical_counterexample_operator(), {0.1, 0.01});
  const ojson j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"check", "verdict", "witness", "samples_used", "parameters", "details"});
  CHECK(j.at("verdict") == "fail");
}
