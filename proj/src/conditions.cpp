#include "ellbranch/conditions.hpp"

#include <numbers>

#include "internal.hpp"

namespace ellb {

using detail::is_all;
using detail::phi_boundary;
using detail::probe_matrices;
using detail::probe_points;
using detail::safe_eval;

ConditionReport ucf_check_at(const OperatorSpec& op, const EllipticMapSpec& phi, double eps, double delta, const Sampler& sampler) {
  if (!(eps > 0.0 && delta > 0.0)) throw InvalidInput("ucf_check: eps and delta must be positive");
  if (op.dim != phi.dim()) throw DimensionMismatch("ucf_check: operator and constraint dimensions differ");
  const DomainSpec& D = phi.domain();
  const int n = op.dim, dn = D.dim();
  ConditionReport rep;
  rep.check = "ucf";
  rep.parameters = {{"eps", eps}, {"delta", delta}, {"cap", sampler.cap}, {"samples", sampler.samples}, {"seed", sampler.seed}};

  auto violation = [&](const Vec& x, const Vec& y, const SymMat& A) -> std::optional<Witness> {
    const double fx = evaluate(op, x, A);
    const double fy = safe_eval(op, y, A.shifted(eps));
    if (fy >= fx - op.tol * (1.0 + std::abs(fx))) return std::nullopt;
    Witness w;
    w.x = x;
    w.y = y;
    w.A = A;
    w.values = {{"eps", eps}, {"F_x_A", fx}, {"F_y_A_plus_epsI", fy}, {"norm_A", opnorm(A)}};
    return w;
  };
  auto admissible = [&](const Vec& x, const SymMat& B) {
    const EllipticSetSpec P = phi.at(x);
    return is_all(P) ? B : phi_boundary(P, B);
  };
  auto test = [&](const Vec& x, const Vec& y, const SymMat& Ax, const SymMat& Ay) -> std::optional<Witness> {
    ++rep.samples_used;
    if (auto w = violation(x, y, Ax)) return w;
    return violation(y, x, Ay);
  };
  auto fail = [&](Witness w) {
    rep.verdict = Verdict::Fail;
    rep.witness = std::move(w);
    return rep;
  };

  const auto Bs = probe_matrices(n, sampler.cap);
  for (const Vec& x : probe_points(D)) {
    for (int i = 0; i < dn; ++i) {
      for (double sgn : {1.0, -1.0}) {
        const Vec y = x + (sgn * delta * (1.0 - 1e-6)) * Vec::unit(dn, i);
        if (!D.contains(y)) continue;
        for (const SymMat& B : Bs)
          if (auto w = test(x, y, admissible(x, B), admissible(y, B))) return fail(*w);
      }
    }
  }
  Rng rng(sampler.seed);
  for (std::size_t s = 0; s < sampler.samples; ++s) {
    const Vec x = D.sample_interior(rng);
    std::optional<Vec> y;
    for (int attempt = 0; attempt < 64 && !y; ++attempt) {
      const Vec cand = x + (delta * uniform(rng, 0.0, 1.0)) * random_unit(rng, dn);
      if (D.contains(cand)) y = cand;
    }
    const SymMat B = random_symmat(rng, n, log_uniform(rng, 1e-3, sampler.cap));
    const SymMat P = uniform(rng, 0.0, 1.0) < 0.5 ? SymMat(n) : random_psd(rng, n, log_uniform(rng, 1e-3, sampler.cap));
    if (!y) continue;
    if (auto w = test(x, *y, admissible(x, B) + P, admissible(*y, B) + P)) return fail(*w);
  }
  rep.verdict = Verdict::PassUpToCap;
  return rep;
}

ConditionReport ucf_check(const OperatorSpec& op, const EllipticMapSpec& phi, double eps, const Sampler& sampler, double eps_star,
                          int levels) {
  if (!(eps > 0.0 && eps <= eps_star)) throw InvalidInput("ucf_check: eps must lie in (0, eps_star]");
  const auto grid = delta_grid(phi.domain(), levels);
  struct Run {
    std::optional<std::size_t> level;
    std::vector<ConditionReport> failures;
    std::size_t samples = 0;
  };
  auto run = [&](double cap) {
    Run r;
    Sampler s = sampler;
    s.cap = cap;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      ConditionReport rep = ucf_check_at(op, phi, eps, grid[j], s);
      r.samples += rep.samples_used;
      if (!rep.failed()) {
        r.level = j;
        break;
      }
      r.failures.push_back(std::move(rep));
    }
    return r;
  };
  const Run hi = run(sampler.cap);
  const Run lo = run(sampler.cap / 10.0);

  ConditionReport rep;
  rep.check = "ucf";
  rep.samples_used = hi.samples + lo.samples;
  rep.parameters = {{"eps", eps}, {"eps_star", std::isfinite(eps_star) ? ojson(eps_star) : ojson("inf")},
                    {"cap", sampler.cap}, {"samples", sampler.samples}, {"seed", sampler.seed}, {"delta_levels", levels},
                    {"domain_width", phi.domain().width()}};
  rep.details["certified_delta"] = hi.level ? ojson(grid[*hi.level]) : ojson(nullptr);
  rep.details["certified_delta_cap_over_10"] = lo.level ? ojson(grid[*lo.level]) : ojson(nullptr);
  if (!hi.level) {
    rep.verdict = Verdict::Fail;
    rep.witness = hi.failures.back().witness;
    rep.details["reason"] = "no delta on the grid passes";
  } else if (lo.level && *hi.level > *lo.level) {
    rep.verdict = Verdict::Fail;
    rep.witness = hi.failures[*lo.level].witness;
    rep.details["reason"] = "certified delta shrinks as the matrix cap grows";
  } else {
    rep.verdict = Verdict::PassUpToCap;
  }
  return rep;
}

bool replay_ucf(const OperatorSpec& op, double eps, const Witness& w) {
  if (!w.x || !w.y || !w.A) throw InvalidInput("replay_ucf: witness needs x, y and A");
  const double fx = evaluate(op, *w.x, *w.A);
  const double fy = safe_eval(op, *w.y, w.A->shifted(eps));
  return fy < fx - op.tol * (1.0 + std::abs(fx));
}

double g_value(const GDescriptor& g, const SymMat& A) {
  switch (g.kind) {
    case GKind::Det:
      return det(A);
    case GKind::LambdaK:
      return lambda(A, g.k);
    case GKind::Trace:
      return A.trace();
  }
  throw InvalidInput("g_value: unknown kind");
}

double gntd_estimate(const GDescriptor& g, const EllipticSetSpec& phi, double r, const Sampler& sampler, double r_star) {
  if (!(r > 0.0 && r <= r_star)) throw InvalidInput("gntd_estimate: r must lie in (0, r_star]");
  const int n = phi.dim;
  auto admissible = [&](const SymMat& B) { return is_all(phi) ? B : phi_boundary(phi, B); };
  double best = std::numeric_limits<double>::infinity();
  auto probe = [&](const SymMat& A) { best = std::min(best, g_value(g, A.shifted(r)) - g_value(g, A)); };
  for (const SymMat& B : probe_matrices(n, sampler.cap)) probe(admissible(B));
  Rng rng(sampler.seed);
  for (std::size_t s = 0; s < sampler.samples; ++s) {
    const SymMat B = random_symmat(rng, n, log_uniform(rng, 1e-3, sampler.cap));
    const SymMat P = random_psd(rng, n, log_uniform(rng, 1e-3, sampler.cap));
    probe(admissible(B));
    probe(admissible(B) + P);
  }
  return best;
}

bool caba2_admissible(const SymMat& A, const SymMat& B, double alpha, double tol) {
  if (!(alpha > 0.0)) throw InvalidInput("caba2_admissible: alpha must be positive");
  if (A.dim() != B.dim()) throw DimensionMismatch("caba2_admissible: A and B dimensions differ");
  const int n = A.dim();
  BlockSymMat X(2 * n), U(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      X.set(i, j, A(i, j));
      X.set(n + i, n + j, -B(i, j));
    }
    U.set(i, i, 3.0 * alpha);
    U.set(n + i, n + i, 3.0 * alpha);
    U.set(i, n + i, -3.0 * alpha);
  }
  const double shell = tol * (1.0 + 3.0 * alpha);
  const bool lower = lambda_min(X.shifted(3.0 * alpha)) >= -shell;
  const bool upper = lambda_min(U - X) >= -shell;
  return lower && upper;
}

OperatorSpec classical_counterexample_operator(const ScalarField& f) {
  OperatorSpec op;
  op.dim = 2;
  std::vector<ScalarField> upper{ScalarField::norm(1.0, 0.0, {0.0, 0.0}), ScalarField::constant(0.0), ScalarField::constant(0.0)};
  op.kind = OperatorSpec::PerturbedMA{MatrixField::entries(2, std::move(upper)), f};
  return op;
}

std::vector<double> default_falsify_radii() {
  std::vector<double> r;
  for (int e = 1; e <= 8; ++e) r.push_back(std::pow(10.0, -e));
  return r;
}

ConditionReport classical_falsify(const OperatorSpec& op, const std::vector<double>& radii) {
  const auto* pm = std::get_if<OperatorSpec::PerturbedMA>(&op.kind);
  if (!pm || op.dim != 2) throw InvalidInput("classical_falsify: needs a 2-D PerturbedMA operator");
  if (radii.empty()) throw InvalidInput("classical_falsify: empty sequence");
  const double target = 1.0 / std::numbers::sqrt2;
  const Vec origin{0.0, 0.0};

  ConditionReport rep;
  rep.check = "classical_structure";
  rep.parameters = {{"radii", radii}, {"gap_threshold", target - 1e-9}};
  ojson trace = ojson::array();
  bool falsified = true;
  double prev_modulus = std::numeric_limits<double>::infinity();
  Witness last;
  for (double r : radii) {
    if (!(r > 0.0)) throw InvalidInput("classical_falsify: radii must be positive");
    const Vec x{r, 0.0};
    for (const Vec& p : {x, origin}) {
      const SymMat expect = SymMat::diag({p.norm(), 0.0});
      if ((pm->M(p) - expect).frobenius() > 1e-12 * (1.0 + p.norm()))
        throw InvalidInput("classical_falsify: M(x) must equal diag(|x|, 0)");
    }
    const SymMat A = SymMat::diag({0.0, 1.0 / (2.0 * r)});
    const SymMat B = SymMat::diag({0.0, 1.0 / r});
    const double alpha = 1.0 / (3.0 * r);
    if (!caba2_admissible(A, B, alpha)) throw std::logic_error("classical_falsify: constructed pair is not admissible");
    const double raw = evaluate(op, x, A) - evaluate(op, origin, B);
    const double gap = raw + pm->f(x) - pm->f(origin);
    const double modulus = alpha * r * r + r;
    trace.push_back({{"x_norm", r}, {"gap", gap}, {"raw_diff", raw}, {"modulus_argument", modulus}, {"alpha", alpha}, {"admissible", true}});
    if (gap < target - 1e-9 || !(modulus < prev_modulus)) falsified = false;
    prev_modulus = modulus;
    ++rep.samples_used;
    last.x = x;
    last.y = origin;
    last.A = A;
    last.B = B;
    last.alpha = alpha;
    last.values = {{"gap", gap}, {"modulus_argument", modulus}};
  }
  rep.details["gap_trace"] = trace;
  rep.details["expected_gap"] = target;
  if (falsified) {
    rep.verdict = Verdict::Fail;
    rep.witness = last;
    rep.details["conclusion"] = "classical structure condition falsified";
  } else {
    rep.verdict = Verdict::Pass;
    rep.details["conclusion"] = "gap did not persist";
  }
  return rep;
}

ConditionReport sum_duals_check(const EllipticMapSpec& M, const Sampler& sampler, double eps, double tol) {
  const DomainSpec& D = M.domain();
  const int n = M.dim();
  ConditionReport rep;
  rep.check = "sum_duals";
  rep.parameters = {{"samples", sampler.samples}, {"seed", sampler.seed}, {"cap", sampler.cap}, {"eps", eps}, {"tol", tol}};
  Rng rng(sampler.seed);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t dual_samples = 0;
  for (std::size_t s = 0; s < sampler.samples; ++s) {
    const Vec x = D.sample_interior(rng);
    const SymMat B1 = random_symmat(rng, n, log_uniform(rng, 1e-3, sampler.cap));
    const SymMat B2 = random_symmat(rng, n, log_uniform(rng, 1e-3, sampler.cap));
    const SymMat P = random_psd(rng, n, log_uniform(rng, 1e-3, 1.0));
    const bool via_dual_set = uniform(rng, 0.0, 1.0) < 0.5;
    ++rep.samples_used;
    const EllipticSetSpec T = M.at(x);
    auto a = boundary_shift(T, B1);
    if (!a) throw std::logic_error("sum_duals_check: could not sample Theta(x)");
    const SymMat A = a->inside;
    SymMat Bd(n);
    if (via_dual_set) {
      auto b = boundary_shift(dual(T, eps), B2);
      if (!b) throw std::logic_error("sum_duals_check: could not sample the dual set");
      Bd = b->inside;
    } else {
      auto b = boundary_shift(T, B2);
      if (!b) throw std::logic_error("sum_duals_check: could not sample Theta(x)");
      Bd = -b->inside;
    }
    Bd += P;
    if (!dual_contains(T, Bd, eps)) continue;
    ++dual_samples;
    const double l = lambda_max(A + Bd);
    worst = std::min(worst, l);
    if (l < -tol) {
      rep.verdict = Verdict::Fail;
      Witness w;
      w.x = x;
      w.A = A;
      w.B = Bd;
      w.values = {{"lambda_max", l}};
      rep.witness = w;
      return rep;
    }
  }
  rep.details["dual_samples"] = dual_samples;
  rep.details["min_lambda_max"] = worst;
  rep.verdict = Verdict::Pass;
  return rep;
}

}  // namespace ellb
