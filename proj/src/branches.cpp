#include "ellbranch/branches.hpp"

#include "internal.hpp"

namespace ellb {
namespace {

using detail::overloaded;
using detail::is_all;
using detail::phi_boundary;
using detail::safe_eval;
using detail::sample_points;

RulePtr rule(MapRule::Kind k) { return std::make_shared<const MapRule>(MapRule{std::move(k)}); }

double sup_abs_on(const ScalarField& f, const DomainSpec& D) {
  double r = 0.0;
  for (int i = 0; i < D.dim(); ++i) r = std::max({r, std::abs(D.lo()[i]), std::abs(D.hi()[i])});
  return f.sup_abs(D.dim(), r);
}

}  // namespace

RulePtr natural_phi_rule(const OperatorSpec& op) {
  const int n = op.dim;
  return std::visit(overloaded{
                        [&](const OperatorSpec::MongeAmpere&) { return rule(MapRule::Constant{psd(n, op.tol)}); },
                        [&](const OperatorSpec::PerturbedMA& k) {
                          return rule(MapRule::Translate{rule(MapRule::Constant{psd(n, op.tol)}), k.M, -1.0});
                        },
                        [&](const OperatorSpec::BellmanMA& k) {
                          return rule(MapRule::Translate{rule(MapRule::Constant{psd(n, op.tol)}), k.M, -1.0});
                        },
                        [&](const auto&) { return rule(MapRule::Constant{whole_space(n)}); },
                    },
                    op.kind);
}

EllipticMapSpec natural_phi(const OperatorSpec& op, const DomainSpec& domain) {
  return EllipticMapSpec(domain, natural_phi_rule(op), op.dim);
}

BranchSpec make_branch(const OperatorSpec& op, const EllipticMapSpec& phi, const Sampler& sampler) {
  if (op.dim != phi.dim()) throw DimensionMismatch("make_branch: operator and constraint dimensions differ");
  auto opp = std::make_shared<const OperatorSpec>(op);
  EllipticMapSpec theta(phi.domain(), rule(MapRule::Branch{opp, phi.rule()}), op.dim);

  Rng rng(sampler.seed);
  bool zero_locus = true;
  ojson zero_locus_witness = nullptr;
  const auto pts = sample_points(phi.domain(), rng, sampler.samples);
  for (const Vec& x : pts) {
    try {
      certify_set(theta.at(x));
    } catch (const InvalidInput& e) {
      throw EmptyBranch(std::string("make_branch: Theta(x) is empty or improper: ") + e.what(), x);
    }
    const EllipticSetSpec P = phi.at(x);
    for (int k = 0; k < 4; ++k) {
      SymMat A = random_symmat(rng, op.dim, log_uniform(rng, 1e-2, 10.0));
      if (!is_all(P)) A = phi_boundary(P, A) + random_psd(rng, op.dim, 1.0);
      const SymMat Pm = random_psd(rng, op.dim, log_uniform(rng, 1e-2, 10.0));
      const double f0 = evaluate(op, x, A), f1 = evaluate(op, x, A + Pm);
      if (f1 < f0 - op.tol * (1.0 + std::abs(f0)))
        throw InvalidInput("make_branch: F is not degenerate elliptic on Phi at x = " + to_json(x).dump());
    }
    const bool meets = is_all(P) ? evaluate(op, x, SymMat::identity(op.dim, -1e6)) <= op.tol
                                 : evaluate(op, x, phi_boundary(P, SymMat(op.dim))) <= op.tol;
    if (!meets && zero_locus) {
      zero_locus = false;
      zero_locus_witness = to_json(x);
    }
  }
  BranchSpec b{opp, phi, theta, ojson::object()};
  b.flags["sampled_points"] = pts.size();
  b.flags["zero_locus_meets_phi"] = zero_locus;
  if (!zero_locus) b.flags["zero_locus_witness"] = zero_locus_witness;
  return b;
}

BranchSpec make_natural_branch(const OperatorSpec& op, const DomainSpec& domain) {
  return make_branch(op, natural_phi(op, domain));
}

ConditionReport branch_condition_check(const BranchSpec& B, const Sampler& sampler) {
  const OperatorSpec& op = *B.op;
  const DomainSpec& D = B.theta.domain();
  ConditionReport rep;
  rep.check = "branch_condition";
  rep.parameters = {{"samples", sampler.samples}, {"seed", sampler.seed}, {"cap", sampler.cap}, {"step_tol", kShiftStepTol}};
  Rng rng(sampler.seed);
  const double slope_step = 100.0 * kShiftStepTol;
  const auto pts = sample_points(D, rng, 0);
  for (std::size_t s = 0; s < sampler.samples + pts.size(); ++s) {
    const Vec x = s < pts.size() ? pts[s] : D.sample_interior(rng);
    const SymMat Bm = s < pts.size() ? SymMat(op.dim) : random_symmat(rng, op.dim, log_uniform(rng, 1e-3, sampler.cap));
    ++rep.samples_used;
    const EllipticSetSpec T = B.theta.at(x), P = B.constraint.at(x);
    auto sh = boundary_shift(T, Bm);
    if (!sh) throw std::logic_error("branch_condition_check: bisection failed to bracket the boundary");
    if (contains(P, sh->outside) && safe_eval(op, x, sh->outside) < 0.0) continue;
    // boundary point lies on the boundary of Phi
    const SymMat Ab = is_all(P) ? sh->inside : phi_boundary(P, sh->inside);
    const double F = evaluate(op, x, Ab);
    const double slack = std::abs(evaluate(op, x, Ab.shifted(slope_step)) - F);
    if (F <= op.tol + slack) continue;
    rep.verdict = Verdict::Fail;
    Witness w;
    w.x = x;
    w.A = Ab;
    w.values = {{"F", F}, {"tolerance", op.tol + slack}};
    rep.witness = w;
    return rep;
  }
  rep.verdict = Verdict::Pass;
  return rep;
}

ConditionReport nondegeneracy_check(const BranchSpec& B, const Sampler& sampler) {
  const OperatorSpec& op = *B.op;
  const DomainSpec& D = B.theta.domain();
  ConditionReport rep;
  rep.check = "nondegeneracy";
  rep.parameters = {{"samples", sampler.samples}, {"seed", sampler.seed}, {"cap", sampler.cap}};
  Rng rng(sampler.seed);
  const auto pts = sample_points(D, rng, 0);
  for (std::size_t s = 0; s < sampler.samples + pts.size(); ++s) {
    const Vec x = s < pts.size() ? pts[s] : D.sample_interior(rng);
    const SymMat Bm = s < pts.size() ? SymMat(op.dim) : random_symmat(rng, op.dim, log_uniform(rng, 1e-3, sampler.cap));
    const double eps = s < pts.size() ? 1e-3 : log_uniform(rng, 1e-4, 1.0);
    ++rep.samples_used;
    const EllipticSetSpec T = B.theta.at(x);
    auto sh = boundary_shift(T, Bm);
    if (!sh) throw std::logic_error("nondegeneracy_check: bisection failed to bracket the boundary");
    const SymMat A = sh->inside.shifted(eps);
    if (!interior_contains(T, A, eps)) throw std::logic_error("nondegeneracy_check: interior sample left Theta(x)");
    const double F = evaluate(op, x, A);
    if (F > 0.0) continue;
    rep.verdict = Verdict::Fail;
    Witness w;
    w.x = x;
    w.A = A;
    w.values = {{"F", F}, {"eps", eps}};
    rep.witness = w;
    return rep;
  }
  rep.verdict = Verdict::Pass;
  return rep;
}

double bellman_MA_estimate(const SymMat& A, const SymMat& M, std::size_t samples, std::uint64_t seed) {
  const SymMat S = A + M;
  const int n = S.dim();
  if (lambda_min(S) < -kDefaultTol) throw AdmissibilityError("bellman_MA_estimate: A + M is not positive semidefinite");
  const double target_log = -n * std::log(static_cast<double>(n));  // log det(beta)
  double best = S.trace() / n;                                      // beta = I / N
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const Frame Q = random_rotation(rng, n);
    Vec d(n);
    double logsum = 0.0;
    for (int i = 0; i < n; ++i) {
      d[i] = log_uniform(rng, 1e-2, 1e2);
      logsum += std::log(d[i]);
    }
    d *= std::exp((target_log - logsum) / n);
    best = std::min(best, conjugate(Q, d).inner(S));
  }
  return best;
}

double pucci_minus_sampled(const SymMat& A, double lambda, double Lambda, std::size_t samples, std::uint64_t seed) {
  if (!(lambda > 0 && Lambda >= lambda)) throw InvalidInput("pucci: need 0 < lambda <= Lambda");
  const int n = A.dim();
  double best = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const Frame Q = random_rotation(rng, n);
    Vec d(n);
    for (int i = 0; i < n; ++i) {
      const double u = uniform(rng, 0.0, 1.0);
      d[i] = u < 0.4 ? lambda : u < 0.8 ? Lambda : uniform(rng, lambda, Lambda);
    }
    best = std::min(best, conjugate(Q, d).inner(A));
  }
  return best;
}

OperatorSpec truncated_linear(const MatrixField& a, const ScalarField& f, double lambda, double Lambda, double h,
                              const DomainSpec& domain, const Sampler& sampler) {
  if (!(lambda > 0 && Lambda >= lambda)) throw InvalidInput("truncated_linear: need 0 < lambda <= Lambda");
  if (a.dim() != domain.dim()) throw DimensionMismatch("truncated_linear: coefficient and domain dimensions differ");
  Rng rng(sampler.seed);
  const auto pts = sample_points(domain, rng, sampler.samples);
  for (const Vec& x : pts) {
    const SymMat ax = a(x);
    const auto ev = eigenvalues(ax);
    if (ev[0] < lambda - kDefaultTol || ev[ax.dim() - 1] > Lambda + kDefaultTol)
      throw SpectrumViolation("truncated_linear: spectrum of a(x) leaves [lambda, Lambda]", x, ax);
  }
  OperatorSpec op;
  op.dim = a.dim();
  op.kind = OperatorSpec::TruncatedLinear{a, f, lambda, Lambda, h};
  return op;
}

ConditionReport truncated_norm_bound_check(const OperatorSpec& op, const DomainSpec& domain, double eps, const Sampler& sampler) {
  const auto* k = std::get_if<OperatorSpec::TruncatedLinear>(&op.kind);
  if (!k) throw InvalidInput("truncated_norm_bound_check: operator is not TruncatedLinear");
  const BranchSpec B = make_natural_branch(op, domain);
  const double fnorm = sup_abs_on(k->f, domain);
  const double neg_bound = (1.0 + 2.0 * k->h + fnorm) / k->Lambda;
  const double pos_bound = (2.0 + 2.0 * k->h + 2.0 * fnorm) / k->lambda;

  ConditionReport rep;
  rep.check = "truncated_norm_bound";
  rep.parameters = {{"eps", eps}, {"samples", sampler.samples}, {"seed", sampler.seed}, {"radius", sampler.radius}};
  rep.details = {{"f_sup", fnorm}, {"neg_trace_bound", neg_bound}, {"pos_trace_bound", pos_bound}};
  Rng rng(sampler.seed);
  std::size_t kept = 0;
  double worst_neg = 0.0, worst_pos = 0.0;
  for (std::size_t s = 0; s < sampler.samples; ++s) {
    const Vec x = domain.sample_interior(rng), y = domain.sample_interior(rng);
    const SymMat Bm = random_symmat(rng, op.dim, uniform(rng, 0.0, sampler.radius));
    const SymMat extra = random_psd(rng, op.dim, uniform(rng, 0.0, 1.0));
    ++rep.samples_used;
    auto sh = boundary_shift(B.theta.at(x), Bm);
    if (!sh) throw std::logic_error("truncated_norm_bound_check: bisection failed");
    const SymMat Bs = (sh->inside + extra).shifted(eps);
    if (k->a(y).inner(Bs) - k->f(y) > 1.0) continue;
    ++kept;
    const TraceParts tp = trace_parts(Bs);
    worst_neg = std::max(worst_neg, tp.negative);
    worst_pos = std::max(worst_pos, tp.positive);
    if (tp.negative > neg_bound + kDefaultTol || tp.positive > pos_bound + kDefaultTol) {
      rep.verdict = Verdict::Fail;
      Witness w;
      w.x = x;
      w.y = y;
      w.B = Bs;
      w.values = {{"neg_trace", tp.negative}, {"pos_trace", tp.positive}};
      rep.witness = w;
      return rep;
    }
  }
  rep.details["kept_samples"] = kept;
  rep.details["max_neg_trace"] = worst_neg;
  rep.details["max_pos_trace"] = worst_pos;
  rep.verdict = Verdict::Pass;
  return rep;
}

}  // namespace ellb
