#include <cmath>
#include <sstream>

#include "ellbranch/weaksol.hpp"
#include "support.hpp"

using namespace ellb;
using namespace test;

namespace {

const DomainSpec kBox = DomainSpec::unit_box(2);

std::size_t center(const GridFunction& u) { return *u.nearest(Vec{0.0, 0.0}); }

GridFunction quadratic(const DomainSpec& d, double h, const SymMat& A, double c = 0.0) {
  return GridFunction::sample(d, h, [&](const Vec& x) { return 0.5 * A.quad(x) + c; });
}

// Node box of u without its outermost layer, which is Outside on box domains.
NodeBox inner_box(const GridFunction& u) {
  NodeBox b = full_box(u);
  for (int i = 0; i < u.dim(); ++i) {
    ++b.lo[i];
    --b.hi[i];
  }
  return b;
}

bool all_interior_pass(const GridFunction& u, const EllipticMapSpec& M) {
  for (std::size_t k : testable_nodes(u))
    if (!theta_subharmonic_test(u, M, k).pass) return false;
  return true;
}

}  // namespace

TEST_CASE("stencil_hessian is exact on quadratics", "[weaksol]") {
  const double h = 0.1;
  const auto half = GridFunction::sample(kBox, h, [](const Vec& x) { return 0.5 * x.dot(x); });
  const auto affine = GridFunction::sample(kBox, h, [](const Vec& x) { return 0.3 - 2.0 * x[0] + 0.7 * x[1]; });
  const auto cross = GridFunction::sample(kBox, h, [](const Vec& x) { return x[0] * x[1]; });
  for (std::size_t k : testable_nodes(half)) {
    CHECK(opnorm(stencil_hessian(half, k) - SymMat::identity(2)) <= 1e-12);
    CHECK(opnorm(stencil_hessian(affine, k)) <= 1e-12);
    CHECK(opnorm(stencil_hessian(cross, k) - mat({{0, 1}, {1, 0}})) <= 1e-12);
  }
  std::size_t boundary = half.nodes(NodeTag::Boundary).front();
  CHECK_THROWS_AS(stencil_hessian(half, boundary), InvalidInput);
}

TEST_CASE("grid construction rejects coarse spacing", "[weaksol]") {
  CHECK_THROWS_AS(GridFunction::on_domain(kBox, 1.5), InvalidInput);
  CHECK_THROWS_AS(GridFunction(2, 0.0, {}, {3, 3}), InvalidInput);
}

TEST_CASE("subaffine examples", "[weaksol]") {
  const double h = 0.125;
  const auto maxaff = GridFunction::sample(kBox, h, [](const Vec& x) { return std::max(0.5 * x[0] - x[1], -x[0] + 0.2); });
  CHECK(subaffine_check(maxaff, inner_box(maxaff)).pass);

  const auto saddle = GridFunction::sample(kBox, h, [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; });
  CHECK(subaffine_check(saddle, inner_box(saddle)).pass);

  const auto cap = GridFunction::sample(kBox, h, [](const Vec& x) { return -x.dot(x); });
  const auto r = subaffine_check(cap, inner_box(cap));
  REQUIRE_FALSE(r.pass);
  REQUIRE(r.triple);
  CHECK(r.triple->node == center(cap));
  CHECK(r.triple->slope.norm() <= 1e-12);
  CHECK(r.triple->eps > 0.0);
  CHECK(replay_contact(cap, *r.triple));

  NodeBox thin = inner_box(cap);
  thin.hi[0] = thin.lo[0] + 1;
  CHECK_THROWS_AS(subaffine_check(cap, thin), InvalidInput);
}

TEST_CASE("subaffine verdict is invariant under adding affine functions", "[weaksol]") {
  const double h = 0.125;
  auto g = rng(51);
  const std::vector<std::function<double(const Vec&)>> fns = {
      [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; },
      [](const Vec& x) { return -x.dot(x); },
      [](const Vec& x) { return std::abs(x[0] + 0.3 * x[1]); },
  };
  for (const auto& fn : fns) {
    const auto u = GridFunction::sample(kBox, h, fn);
    const bool base = subaffine_check(u, inner_box(u)).pass;
    for (int t = 0; t < 5; ++t) {
      const double c = uniform(g, -2, 2), a0 = uniform(g, -2, 2), a1 = uniform(g, -2, 2);
      const auto v = u.transformed([&](const Vec& x, double val) { return val + c + a0 * x[0] + a1 * x[1]; });
      CHECK(subaffine_check(v, inner_box(v)).pass == base);
    }
  }
}

TEST_CASE("theta_subharmonic_test examples", "[weaksol]") {
  const double h = 0.1;
  const auto P = EllipticMapSpec::constant(kBox, psd(2));
  const auto inside = quadratic(kBox, h, SymMat::diag({1.0, 0.5}));
  CHECK(theta_subharmonic_test(inside, P, center(inside)).pass);

  const auto concave = quadratic(kBox, h, SymMat::identity(2, -1.0));
  const auto bad = theta_subharmonic_test(concave, P, center(concave));
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.witness);
  CHECK_FALSE(contains(psd(2), *bad.witness));

  const auto kink = GridFunction::sample(kBox, h, [](const Vec& x) { return std::abs(x[0]); });
  const auto D = EllipticMapSpec::constant(kBox, dual_psd(2));
  std::size_t contacts = 0;
  for (std::size_t k : testable_nodes(kink)) {
    const auto r = theta_subharmonic_test(kink, D, k);
    CHECK(r.pass);
    contacts += r.contacts;
  }
  CHECK(contacts > 0);
  CHECK_THROWS_AS(theta_subharmonic_test(inside, P, center(inside), std::vector<SymMat>{}), InvalidInput);
}

TEST_CASE("theta test is coherent with the stencil Hessian", "[weaksol]") {
  const double h = 0.1;
  auto g = rng(52);
  const std::vector<EllipticSetSpec> sets = {psd(2), dual_psd(2), pk(2, 1)};
  for (const auto& S : sets) {
    const auto M = EllipticMapSpec::constant(kBox, S);
    for (int t = 0; t < 40; ++t) {
      const SymMat A = random_symmat(g, 2, 2.0);
      const double d = distance_to(A, S);
      const bool in = contains(S, A);
      if (!in && d < 0.05) continue;
      if (in && !interior_contains(S, A, 0.05)) continue;
      const auto u = quadratic(kBox, h, A);
      CHECK(theta_subharmonic_test(u, M, center(u)).pass == in);
    }
  }
}

TEST_CASE("theta subharmonicity is stable under max and decreasing limits", "[weaksol]") {
  const double h = 0.1;
  const auto P = EllipticMapSpec::constant(kBox, psd(2));
  const auto u = GridFunction::sample(kBox, h, [](const Vec& x) { return 0.5 * ((x[0] - 0.3) * (x[0] - 0.3) + x[1] * x[1]); });
  const auto v = GridFunction::sample(kBox, h, [](const Vec& x) { return x[0] * x[0] + 0.25 * x[1] * x[1] + 0.05; });
  REQUIRE(all_interior_pass(u, P));
  REQUIRE(all_interior_pass(v, P));
  const auto m = u.transformed([&](const Vec& x, double val) { return std::max(val, v.value(*v.nearest(x))); });
  CHECK(all_interior_pass(m, P));

  for (int n = 1; n <= 4; ++n) {
    const auto un = u.transformed([n](const Vec&, double val) { return val + 1.0 / n; });
    REQUIRE(all_interior_pass(un, P));
  }
  CHECK(all_interior_pass(u, P));
}

TEST_CASE("weak translation property for a constant map", "[weaksol]") {
  const double h = 0.1, eps = 0.2;
  const auto P = EllipticMapSpec::constant(kBox, psd(2));
  auto g = rng(53);
  for (int t = 0; t < 3; ++t) {
    const Vec y{uniform(g, -0.2, 0.2), uniform(g, -0.2, 0.2)};
    const auto u = GridFunction::sample(kBox, h, [&](const Vec& x) {
      const Vec z = x + y;
      return std::max(0.5 * z.dot(z), z[0]) + 0.5 * eps * x.dot(x);
    });
    for (std::size_t k : testable_nodes(u)) {
      const Vec x = u.point(k);
      if (std::abs(x[0]) > 0.7 || std::abs(x[1]) > 0.7) continue;
      CHECK(theta_subharmonic_test(u, P, k).pass);
    }
  }
}

TEST_CASE("sup_convolution examples", "[weaksol]") {
  const double h = 0.05;
  const auto c = GridFunction::sample(kBox, 0.1, [](const Vec&) { return 1.7; });
  const auto cc = sup_convolution(c, 0.3);
  for (std::size_t k : cc.nodes(NodeTag::Interior)) CHECK(cc.value(k) == 1.7);

  // maximizer z = -eps a / 2 = (-0.1, 0.05) lies on the lattice
  const DomainSpec big(DomainSpec::Box{Vec{-2.0, -2.0}, Vec{2.0, 2.0}});
  const Vec a{2.0, -1.0};
  const double eps = 0.1;
  const auto u = GridFunction::sample(big, h, [&](const Vec& x) { return a.dot(x); });
  const auto ue = sup_convolution(u, eps);
  std::size_t checked = 0;
  for (std::size_t k : ue.nodes(NodeTag::Interior)) {
    const Vec x = ue.point(k);
    if (std::abs(x[0]) > 1.5 || std::abs(x[1]) > 1.5) continue;
    CHECK_THAT(ue.value(k), WithinAbs(a.dot(x) + eps * a.dot(a) / 4.0, 1e-6));
    ++checked;
  }
  CHECK(checked > 100);
  CHECK_THROWS_AS(sup_convolution(u, 0.0), InvalidInput);
}

TEST_CASE("sup_convolution ladder is monotone and semiconvex", "[weaksol]") {
  const double h = 0.1;
  const auto u = GridFunction::sample(kBox, h, [](const Vec& x) { return std::cos(3.0 * x[0]) * x[1] - std::abs(x[0] - 0.2); });
  const std::vector<double> ladder{0.4, 0.2, 0.1, 0.05};
  std::vector<GridFunction> conv;
  for (double e : ladder) conv.push_back(sup_convolution(u, e));
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u.tag(k) == NodeTag::Outside) continue;
    for (std::size_t j = 0; j + 1 < conv.size(); ++j) CHECK(conv[j].value(k) >= conv[j + 1].value(k));
    CHECK(conv.back().value(k) >= u.value(k));
  }
  // u^eps + |x|^2 / eps is a maximum of affine functions of x
  const std::vector<Index> lines{{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}};
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    const double e = ladder[j];
    const auto v = conv[j].transformed([e](const Vec& x, double val) { return val + x.dot(x) / e; });
    for (std::size_t k : v.nodes(NodeTag::Interior)) {
      for (const Index& d : lines) {
        const auto p = v.neighbor(k, d);
        const auto m = v.neighbor(k, Index{-d[0], -d[1]});
        if (!p || !m) continue;
        CHECK(v.value(*p) - 2.0 * v.value(k) + v.value(*m) >= -1e-9);
      }
    }
  }
}

TEST_CASE("slodkowski_K examples", "[weaksol]") {
  const double h = 0.05;
  const DomainSpec ball = DomainSpec::ball(2);
  const std::vector<double> ladder{8 * h, 4 * h, 2 * h, h};

  // eigenvectors along lattice directions: exact
  const SymMat A = SymMat::diag({-1.5, 0.7});
  auto u = quadratic(ball, h, A);
  CHECK_THAT(slodkowski_K(u, center(u), ladder), WithinAbs(0.7, 1e-9));
  const SymMat R = mat({{0.2, 1.0}, {1.0, 0.2}});
  u = quadratic(ball, h, R);
  CHECK_THAT(slodkowski_K(u, center(u), ladder), WithinAbs(1.2, 1e-9));

  // general quadratics: never above lambda_N, below it by at most the angular resolution
  auto g = rng(54);
  for (int t = 0; t < 30; ++t) {
    const SymMat B = random_symmat(g, 2, 2.0);
    const auto w = quadratic(ball, h, B);
    const double K = slodkowski_K(w, center(w), ladder);
    const auto e = eig2(B);
    CHECK(K <= e[1] + 1e-9);
    CHECK(K >= e[1] - 0.06 * (e[1] - e[0]) - 1e-9);
  }

  const auto aff = GridFunction::sample(ball, h, [](const Vec& x) { return 1.0 + 0.4 * x[0] - 2.0 * x[1]; });
  CHECK_THAT(slodkowski_K(aff, center(aff), ladder), WithinAbs(0.0, 1e-9));

  const auto quartic = GridFunction::sample(ball, h, [](const Vec& x) { return 0.25 * x.dot(x) * x.dot(x); });
  const double K4 = slodkowski_K(quartic, center(quartic), ladder);
  CHECK(K4 >= 0.0);
  CHECK(K4 <= 0.5 * (2 * h) * (2 * h) * 1.3);
  CHECK_THROWS_AS(slodkowski_K(quartic, center(quartic), {}), InvalidInput);
}

TEST_CASE("comparison harness examples", "[weaksol]") {
  const double h = 0.1;
  const auto P = EllipticMapSpec::constant(kBox, psd(2));
  const auto u = quadratic(kBox, h, SymMat::identity(2));
  const auto w = GridFunction::sample(kBox, h, [](const Vec& x) { return 1.0 + 0.5 * x[0] * x[0]; });
  const auto ok = comparison_harness(u, w, P);
  CHECK(ok.status == ComparisonResult::Status::Pass);
  CHECK(ok.nodes_tested == testable_nodes(u).size());

  // -w = -1/2 |x|^2 - 1 has Hessian -I, outside the dual of PSD
  const auto w2 = quadratic(kBox, h, SymMat::identity(2), 1.0);
  const auto pre = comparison_harness(u, w2, P);
  CHECK(pre.status == ComparisonResult::Status::PreconditionFailed);
  CHECK(pre.reason.find("dual") != std::string::npos);

  const auto high = quadratic(kBox, h, SymMat::identity(2), 3.0);
  const auto order = comparison_harness(high, w, P);
  CHECK(order.status == ComparisonResult::Status::PreconditionFailed);
  CHECK(order.reason.find("boundary") != std::string::npos);
  CHECK(to_string(order.status) == "precondition-failed");
}

TEST_CASE("grid CSV round trip is bit exact", "[weaksol]") {
  const auto u = GridFunction::sample(DomainSpec::ball(2), 0.1, [](const Vec& x) { return std::exp(x[0]) / 3.0 + std::sqrt(2.0) * x[1]; },
                                      GridFunction::BoundaryValues::AtProjection);
  std::stringstream ss;
  u.write_csv(ss);
  const std::string text = ss.str();
  CHECK(text.rfind("x1,x2,mask,value\n", 0) == 0);
  const auto v = GridFunction::read_csv(ss);
  REQUIRE(v.same_lattice(u));
  for (std::size_t k = 0; k < u.size(); ++k) {
    CHECK(v.tag(k) == u.tag(k));
    if (u.tag(k) != NodeTag::Outside) CHECK(v.value(k) == u.value(k));
  }
  std::stringstream again;
  v.write_csv(again);
  CHECK(again.str() == text);

  std::stringstream broken("x1,x2,mask,value\n0,0,Q,1\n");
  CHECK_THROWS(GridFunction::read_csv(broken));
}
