#include "ellbranch/ellset.hpp"

#include <limits>

#include "internal.hpp"

namespace ellb {
namespace {

using detail::overloaded;
using detail::probe_matrices;
using detail::probe_points;

constexpr double kBracketLimit = 1e15;

SetPtr share(const EllipticSetSpec& s) { return std::make_shared<const EllipticSetSpec>(s); }

void require_dim(const EllipticSetSpec& S, const SymMat& A) {
  if (S.dim != A.dim()) throw DimensionMismatch("set dimension " + std::to_string(S.dim) + " vs matrix " + std::to_string(A.dim()));
}

void require_eps(double eps) {
  if (!(eps > 0.0)) throw InvalidInput("margin eps must be positive");
}

EllipticSetSpec raw(int n, EllipticSetSpec::Kind k, double tol) {
  if (n < 1 || n > kMaxDim) throw DimensionMismatch("set dimension out of range");
  EllipticSetSpec s;
  s.dim = n;
  s.kind = std::move(k);
  s.tol = tol;
  return s;
}

}  // namespace

std::string EllipticSetSpec::kind_name() const {
  return std::visit(overloaded{[](const PSD&) { return "PSD"; }, [](const DualPSD&) { return "DualPSD"; },
                               [](const Pk&) { return "Pk"; }, [](const SublevelBranch&) { return "SublevelBranch"; },
                               [](const HalfSpaceLinear&) { return "HalfSpaceLinear"; },
                               [](const Truncated&) { return "Truncated"; }, [](const Translate&) { return "Translate"; },
                               [](const Union&) { return "Union"; }, [](const Dual&) { return "Dual"; },
                               [](const All&) { return "All"; }},
                    kind);
}

bool contains(const EllipticSetSpec& S, const SymMat& A) {
  require_dim(S, A);
  return std::visit(
      overloaded{
          [&](const EllipticSetSpec::PSD&) { return lambda_min(A) >= -S.tol; },
          [&](const EllipticSetSpec::DualPSD&) { return lambda_max(A) >= -S.tol; },
          [&](const EllipticSetSpec::Pk& p) { return lambda(A, p.k) >= -S.tol; },
          [&](const EllipticSetSpec::SublevelBranch& b) {
            if (!contains(*b.phi, A)) return false;
            try {
              return evaluate(*b.op, b.x, A) >= -S.tol;
            } catch (const AdmissibilityError&) {
              return false;
            }
          },
          [&](const EllipticSetSpec::HalfSpaceLinear& h) { return h.a.inner(A) >= h.c - S.tol; },
          [&](const EllipticSetSpec::Truncated& t) { return contains(*t.first, A) && contains(*t.second, A); },
          [&](const EllipticSetSpec::Translate& t) { return contains(*t.base, A - t.offset); },
          [&](const EllipticSetSpec::Union& u) { return contains(*u.first, A) || contains(*u.second, A); },
          [&](const EllipticSetSpec::Dual& d) { return !contains(*d.base, (-A).shifted(-d.eps)); },
          [&](const EllipticSetSpec::All&) { return true; },
      },
      S.kind);
}

bool interior_contains(const EllipticSetSpec& S, const SymMat& A, double eps) {
  require_eps(eps);
  return contains(S, A.shifted(-eps));
}

bool dual_contains(const EllipticSetSpec& S, const SymMat& A, double eps) { return !interior_contains(S, -A, eps); }

bool enlarge_contains(const EllipticSetSpec& S, const SymMat& A, double eps) {
  require_eps(eps);
  return contains(S, A.shifted(eps));
}

std::optional<BoundaryShift> boundary_shift(const EllipticSetSpec& S, const SymMat& B, double step_tol) {
  auto in = [&](double t) { return contains(S, B.shifted(t)); };
  double lo = 0.0, hi = 0.0;
  if (in(0.0)) {
    double d = 1.0;
    while (in(-d)) {
      d *= 2.0;
      if (d > kBracketLimit) return std::nullopt;
    }
    lo = -d;
    hi = d == 1.0 ? 0.0 : -0.5 * d;
  } else {
    double d = 1.0;
    while (!in(d)) {
      d *= 2.0;
      if (d > kBracketLimit) return std::nullopt;
    }
    hi = d;
    lo = d == 1.0 ? 0.0 : 0.5 * d;
  }
  while (hi - lo > step_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (in(mid) ? hi : lo) = mid;
  }
  return BoundaryShift{hi, B.shifted(hi), B.shifted(lo)};
}

EllipticSetSpec certify_set(EllipticSetSpec s) {
  if (std::holds_alternative<EllipticSetSpec::All>(s.kind)) return s;
  auto in = [&](double t) { return contains(s, SymMat::identity(s.dim, t)); };
  double hi = 1.0;
  while (!in(hi)) {
    hi *= 2.0;
    if (hi > kBracketLimit) throw InvalidInput(s.kind_name() + " set is empty along the identity ray");
  }
  double lo = -1.0;
  while (in(lo)) {
    lo *= 2.0;
    if (lo < -kBracketLimit) throw InvalidInput(s.kind_name() + " set is not proper (contains -tI for all t)");
  }
  s.t_nonempty = hi;
  s.t_proper = std::max(0.0, -lo);
  return s;
}

EllipticSetSpec psd(int n, double tol) { return certify_set(raw(n, EllipticSetSpec::PSD{}, tol)); }
EllipticSetSpec dual_psd(int n, double tol) { return certify_set(raw(n, EllipticSetSpec::DualPSD{}, tol)); }
EllipticSetSpec pk(int n, int k, double tol) {
  if (k < 1 || k > n) throw InvalidInput("Pk: k must lie in [1, N]");
  return certify_set(raw(n, EllipticSetSpec::Pk{k}, tol));
}
EllipticSetSpec half_space(const SymMat& a, double c, double tol) {
  if (lambda_min(a) < -tol || opnorm(a) == 0.0) throw InvalidInput("half space normal must be nonzero and positive semidefinite");
  return certify_set(raw(a.dim(), EllipticSetSpec::HalfSpaceLinear{a, c}, tol));
}
EllipticSetSpec truncated(const EllipticSetSpec& a, const EllipticSetSpec& b) {
  if (a.dim != b.dim) throw DimensionMismatch("truncated: dimensions differ");
  return certify_set(raw(a.dim, EllipticSetSpec::Truncated{share(a), share(b)}, std::max(a.tol, b.tol)));
}
EllipticSetSpec set_union(const EllipticSetSpec& a, const EllipticSetSpec& b) {
  if (a.dim != b.dim) throw DimensionMismatch("union: dimensions differ");
  return certify_set(raw(a.dim, EllipticSetSpec::Union{share(a), share(b)}, std::max(a.tol, b.tol)));
}
EllipticSetSpec translate(const EllipticSetSpec& base, const SymMat& offset) {
  if (base.dim != offset.dim()) throw DimensionMismatch("translate: dimensions differ");
  EllipticSetSpec s = raw(base.dim, EllipticSetSpec::Translate{share(base), offset}, base.tol);
  return std::holds_alternative<EllipticSetSpec::All>(base.kind) ? s : certify_set(s);
}
EllipticSetSpec sublevel(OpPtr op, const Vec& x, const EllipticSetSpec& phi) {
  if (!op) throw InvalidInput("sublevel: missing operator");
  if (op->dim != phi.dim) throw DimensionMismatch("sublevel: operator and constraint dimensions differ");
  const double tol = op->tol;
  return certify_set(raw(phi.dim, EllipticSetSpec::SublevelBranch{std::move(op), x, share(phi)}, tol));
}
EllipticSetSpec whole_space(int n) { return raw(n, EllipticSetSpec::All{}, kDefaultTol); }

std::optional<EllipticSetSpec> closed_form_dual(const EllipticSetSpec& S) {
  using R = std::optional<EllipticSetSpec>;
  return std::visit(
      overloaded{
          [&](const EllipticSetSpec::PSD&) -> R { return dual_psd(S.dim, S.tol); },
          [&](const EllipticSetSpec::DualPSD&) -> R { return psd(S.dim, S.tol); },
          [&](const EllipticSetSpec::Pk& p) -> R { return pk(S.dim, S.dim - p.k + 1, S.tol); },
          [&](const EllipticSetSpec::HalfSpaceLinear& h) -> R { return half_space(h.a, -h.c, S.tol); },
          [&](const EllipticSetSpec::Translate& t) -> R {
            auto d = closed_form_dual(*t.base);
            if (!d) return std::nullopt;
            return translate(*d, -t.offset);
          },
          [&](const EllipticSetSpec::Truncated& t) -> R {
            auto a = closed_form_dual(*t.first), b = closed_form_dual(*t.second);
            if (!a || !b) return std::nullopt;
            return set_union(*a, *b);
          },
          [&](const EllipticSetSpec::Union& u) -> R {
            auto a = closed_form_dual(*u.first), b = closed_form_dual(*u.second);
            if (!a || !b) return std::nullopt;
            return truncated(*a, *b);
          },
          [&](const EllipticSetSpec::Dual& d) -> R { return *d.base; },
          [&](const auto&) -> R { return std::nullopt; },
      },
      S.kind);
}

EllipticSetSpec dual(const EllipticSetSpec& S, double eps) {
  require_eps(eps);
  if (std::holds_alternative<EllipticSetSpec::All>(S.kind)) throw InvalidInput("dual of all of S(N) is empty");
  if (auto d = closed_form_dual(S)) return *d;
  return certify_set(raw(S.dim, EllipticSetSpec::Dual{share(S), eps}, S.tol));
}

double distance_to(const SymMat& A, const EllipticSetSpec& S) {
  if (contains(S, A)) return 0.0;
  auto sh = boundary_shift(S, A);
  if (!sh) return std::numeric_limits<double>::infinity();
  return sh->t;
}

double hausdorff_estimate(const EllipticSetSpec& S1, const EllipticSetSpec& S2, const Sampler& sampler) {
  if (sampler.samples == 0) throw InvalidInput("hausdorff_estimate: zero samples");
  if (S1.dim != S2.dim) throw DimensionMismatch("hausdorff_estimate: dimensions differ");
  const int n = S1.dim;
  const double R = sampler.radius;
  double best = 0.0;

  auto probe = [&](const EllipticSetSpec& from, const EllipticSetSpec& to, const SymMat& B) {
    auto sh = boundary_shift(from, B);
    if (!sh || opnorm(sh->inside) > R) return;
    best = std::max(best, distance_to(sh->inside, to));
  };

  // deterministic probes along coordinate rank-one directions
  for (int i = 0; i < n; ++i) {
    for (double frac : {0.0, 0.25, 0.5, 0.75, 0.95}) {
      SymMat E(n);
      E.set(i, i, frac * R);
      for (const SymMat& B : {E, SymMat(-E)}) {
        probe(S1, S2, B);
        probe(S2, S1, B);
      }
    }
  }
  Rng rng(sampler.seed);
  for (std::size_t s = 0; s < sampler.samples; ++s) {
    const SymMat B = random_symmat(rng, n, uniform(rng, 0.0, R));
    probe(S1, S2, B);
    probe(S2, S1, B);
  }
  return best > 0.5 * R ? std::numeric_limits<double>::infinity() : best;
}

std::vector<double> default_eps_grid() { return {1e-1, 1e-2, 1e-3, 1e-4}; }

ConeResult cone_test(const EllipticSetSpec& S, const SymMat& A, const std::vector<double>& eps_grid, double C_max) {
  if (eps_grid.empty()) throw InvalidInput("cone_test: empty eps grid");
  if (!(C_max > 1.0)) throw InvalidInput("cone_test: C_max must exceed 1");
  std::vector<double> Cs;
  for (double C = 1.0; C < C_max; C *= 2.0) Cs.push_back(C);
  Cs.push_back(C_max);
  for (double eps : eps_grid) {
    require_eps(eps);
    const SymMat base = A.shifted(-eps);
    int start = static_cast<int>(Cs.size());
    while (start > 0 && contains(S, Cs[start - 1] * base)) --start;
    if (start < static_cast<int>(Cs.size())) return {true, eps, Cs[start]};
  }
  return {};
}

bool cone_contains(const EllipticSetSpec& S, const SymMat& A, const std::vector<double>& eps_grid, double C_max) {
  return cone_test(S, A, eps_grid, C_max).inside;
}

// ---------------------------------------------------------------------------

EllipticSetSpec evaluate_rule(const MapRule& rule, const Vec& x, int dim) {
  return std::visit(
      overloaded{
          [&](const MapRule::Constant& c) {
            if (c.set.dim != dim) throw DimensionMismatch("map rule: constant set dimension differs");
            return c.set;
          },
          [&](const MapRule::Branch& b) {
            EllipticSetSpec phi = evaluate_rule(*b.phi, x, dim);
            const bool free = std::holds_alternative<EllipticSetSpec::All>(phi.kind);
            if (free) {
              if (const auto* k = std::get_if<OperatorSpec::KthEigenvalue>(&b.op->kind))
                return raw(dim,
                           EllipticSetSpec::Translate{share(raw(dim, EllipticSetSpec::Pk{k->k}, b.op->tol)),
                                                      SymMat::identity(dim, k->f(x))},
                           b.op->tol);
              if (const auto* l = std::get_if<OperatorSpec::LinearTrace>(&b.op->kind))
                return raw(dim, EllipticSetSpec::HalfSpaceLinear{l->a(x), l->f(x)}, b.op->tol);
            }
            return raw(dim, EllipticSetSpec::SublevelBranch{b.op, x, share(phi)}, b.op->tol);
          },
          [&](const MapRule::Translate& t) {
            EllipticSetSpec base = evaluate_rule(*t.base, x, dim);
            const double tol = base.tol;
            return raw(dim, EllipticSetSpec::Translate{share(base), t.sign * t.offset(x)}, tol);
          },
          [&](const MapRule::HalfSpace& h) {
            return raw(dim, EllipticSetSpec::HalfSpaceLinear{h.a(x), h.c(x)}, kDefaultTol);
          },
          [&](const MapRule::Intersect& i) {
            EllipticSetSpec a = evaluate_rule(*i.first, x, dim), b = evaluate_rule(*i.second, x, dim);
            const double tol = std::max(a.tol, b.tol);
            return raw(dim, EllipticSetSpec::Truncated{share(a), share(b)}, tol);
          },
          [&](const MapRule::Dual& d) {
            EllipticSetSpec base = evaluate_rule(*d.base, x, dim);
            if (auto c = closed_form_dual(base)) return *c;
            const double tol = base.tol;
            return raw(dim, EllipticSetSpec::Dual{share(base), d.eps}, tol);
          },
      },
      rule.kind);
}

EllipticMapSpec::EllipticMapSpec(DomainSpec domain, RulePtr rule, int dim)
    : domain_(std::move(domain)), rule_(std::move(rule)), dim_(dim) {
  if (!rule_) throw InvalidInput("elliptic map: missing rule");
  if (dim_ < 1 || dim_ > kMaxDim) throw DimensionMismatch("elliptic map dimension out of range");
}

EllipticMapSpec EllipticMapSpec::constant(DomainSpec domain, const EllipticSetSpec& set) {
  return EllipticMapSpec(std::move(domain), std::make_shared<const MapRule>(MapRule{MapRule::Constant{set}}), set.dim);
}

EllipticSetSpec EllipticMapSpec::at(const Vec& x) const {
  if (x.size() != domain_.dim()) throw DimensionMismatch("elliptic map: point dimension differs from domain");
  return evaluate_rule(*rule_, x, dim_);
}

EllipticMapSpec EllipticMapSpec::dual(double eps) const {
  require_eps(eps);
  return EllipticMapSpec(domain_, std::make_shared<const MapRule>(MapRule{MapRule::Dual{rule_, eps}}), dim_);
}

std::vector<double> delta_grid(const DomainSpec& d, int levels) {
  std::vector<double> g;
  double s = d.width();
  for (int j = 1; j <= levels; ++j) g.push_back(s * std::ldexp(1.0, -j));
  return g;
}

ConditionReport uusc_check(const EllipticMapSpec& M, double eps, double delta, const Sampler& sampler) {
  require_eps(eps);
  if (!(delta > 0.0)) throw InvalidInput("uusc_check: delta must be positive");
  const DomainSpec& D = M.domain();
  const int n = M.dim(), dn = D.dim();

  ConditionReport rep;
  rep.check = "uusc";
  rep.parameters = {{"eps", eps}, {"delta", delta}, {"cap", sampler.cap}, {"samples", sampler.samples}, {"seed", sampler.seed}};

  auto violation = [&](const Vec& x, const Vec& y, const SymMat& B) -> std::optional<Witness> {
    const EllipticSetSpec Sx = M.at(x);
    auto sh = boundary_shift(Sx, B);
    if (!sh) throw InvalidInput("uusc_check: sampler produced no admissible A in Theta(x)");
    const SymMat& A = sh->inside;
    if (contains(M.at(y), A.shifted(eps))) return std::nullopt;
    Witness w;
    w.x = x;
    w.y = y;
    w.A = A;
    w.values = {{"eps", eps}, {"norm_A", opnorm(A)}, {"distance_xy", (x - y).norm()}};
    return w;
  };
  auto test = [&](const Vec& x, const Vec& y, const SymMat& B) {
    ++rep.samples_used;
    if (auto w = violation(x, y, B)) return w;
    return violation(y, x, B);
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
          if (auto w = test(x, y, B)) return fail(*w);
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
    const double norm = log_uniform(rng, 1e-3, sampler.cap);
    const SymMat B = random_symmat(rng, n, norm);
    if (!y) continue;
    if (auto w = test(x, *y, B)) return fail(*w);
  }
  rep.verdict = Verdict::PassUpToCap;
  return rep;
}

ConditionReport uusc_certify(const EllipticMapSpec& M, double eps, const Sampler& sampler, int levels) {
  const auto grid = delta_grid(M.domain(), levels);
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
      ConditionReport rep = uusc_check(M, eps, grid[j], s);
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
  rep.check = "uusc_certify";
  rep.samples_used = hi.samples + lo.samples;
  rep.parameters = {{"eps", eps}, {"cap", sampler.cap}, {"samples", sampler.samples}, {"seed", sampler.seed},
                    {"delta_levels", levels}, {"domain_width", M.domain().width()}};
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

bool replay_uusc(const EllipticMapSpec& M, double eps, const Witness& w) {
  if (!w.x || !w.y || !w.A) throw InvalidInput("replay_uusc: witness needs x, y and A");
  if (!contains(M.at(*w.x), *w.A)) return false;
  return !contains(M.at(*w.y), w.A->shifted(eps));
}

bool extend_to_closure(const EllipticMapSpec& M, const Vec& x0, const SymMat& A, double eps, double delta) {
  require_eps(eps);
  if (!(delta > 0.0)) throw InvalidInput("extend_to_closure: delta must be positive");
  const DomainSpec& D = M.domain();
  Vec g = D.grad_rho(x0);
  const double gn = g.norm();
  if (gn == 0.0) throw InvalidInput("extend_to_closure: degenerate normal at x0");
  g *= 1.0 / gn;
  for (double s = 0.5 * delta; s > 1e-3 * delta; s *= 0.5) {
    const Vec xi = x0 - s * g;
    if (D.contains(xi)) return contains(M.at(xi), A.shifted(eps));
  }
  throw InvalidInput("extend_to_closure: no interior sample within delta of x0");
}

}  // namespace ellb
