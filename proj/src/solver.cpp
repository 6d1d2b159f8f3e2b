#include "ellbranch/solver.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <thread>

#include "internal.hpp"

namespace ellb {
namespace {

using detail::offsets;
using detail::overloaded;
using detail::primitive_directions;

constexpr int kNoDir = -1;

// Lawson-Hanson non-negative least squares for min |E w - a|, w >= 0. E is m x k, column-major.
std::vector<double> nnls(const std::vector<std::vector<double>>& cols, const std::vector<double>& a) {
  const std::size_t k = cols.size(), m = a.size();
  std::vector<double> w(k, 0.0);
  std::vector<bool> passive(k, false);
  auto residual = [&](const std::vector<double>& x) {
    std::vector<double> r = a;
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < m; ++i) r[i] -= cols[j][i] * x[j];
    return r;
  };
  auto solve_passive = [&]() {
    std::vector<std::size_t> P;
    for (std::size_t j = 0; j < k; ++j)
      if (passive[j]) P.push_back(j);
    const std::size_t p = P.size();
    std::vector<double> G(p * p, 0.0), b(p, 0.0);
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t i = 0; i < m; ++i) b[r] += cols[P[r]][i] * a[i];
      for (std::size_t c = 0; c < p; ++c)
        for (std::size_t i = 0; i < m; ++i) G[r * p + c] += cols[P[r]][i] * cols[P[c]][i];
      G[r * p + r] += 1e-14;
    }
    std::vector<double> z(k, 0.0);
    if (p == 0) return z;
    auto sol = detail::solve_dense(G, b);
    for (std::size_t r = 0; r < p; ++r) z[P[r]] = sol[r];
    return z;
  };
  for (std::size_t outer = 0; outer < 3 * k + 3; ++outer) {
    const auto r = residual(w);
    double best = 1e-13;
    std::size_t pick = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (passive[j]) continue;
      double g = 0.0;
      for (std::size_t i = 0; i < m; ++i) g += cols[j][i] * r[i];
      if (g > best) {
        best = g;
        pick = j;
      }
    }
    if (pick == k) break;
    passive[pick] = true;
    for (std::size_t inner = 0; inner < 3 * k + 3; ++inner) {
      auto z = solve_passive();
      bool feasible = true;
      for (std::size_t j = 0; j < k; ++j)
        if (passive[j] && z[j] <= 0.0) feasible = false;
      if (feasible) {
        w = z;
        break;
      }
      double alpha = 1.0;
      for (std::size_t j = 0; j < k; ++j)
        if (passive[j] && z[j] <= 0.0) alpha = std::min(alpha, w[j] / (w[j] - z[j]));
      for (std::size_t j = 0; j < k; ++j) {
        w[j] += alpha * (z[j] - w[j]);
        if (passive[j] && w[j] <= 1e-15) {
          passive[j] = false;
          w[j] = 0.0;
        }
      }
    }
  }
  return w;
}

std::vector<double> upper_entries(const SymMat& A) {
  std::vector<double> v;
  for (int i = 0; i < A.dim(); ++i)
    for (int j = i; j < A.dim(); ++j) v.push_back(i == j ? A(i, j) : std::sqrt(2.0) * A(i, j));
  return v;
}

/// Arms and cached coefficients for one interior node.
struct NodePlan {
  std::size_t node = 0;
  Vec x;
  std::vector<int> dirs;                            // available stencil directions
  std::vector<std::pair<std::size_t, std::size_t>> arms;  // (plus, minus) neighbours per available direction
  std::vector<double> inv_len2;                     // 1 / (|d|^2 h^2)
  std::vector<int> slot;                            // stencil dir -> position in dirs, or kNoDir
  std::vector<std::vector<int>> frames;             // available frames, as positions
  std::vector<std::vector<int>> k_sets;             // lambda_k direction sets, as positions
  std::vector<double> m_proj;                       // e^T M e per available direction
  std::vector<double> weights;                      // linear-trace weights per available direction
  double f = 0.0;
};


std::optional<MatrixField> shift_field(const OperatorSpec& op) {
  if (auto* k = std::get_if<OperatorSpec::PerturbedMA>(&op.kind)) return k->M;
  if (auto* k = std::get_if<OperatorSpec::BellmanMA>(&op.kind)) return k->M;
  return std::nullopt;
}

std::optional<MatrixField> trace_field(const OperatorSpec& op) {
  if (auto* k = std::get_if<OperatorSpec::LinearTrace>(&op.kind)) return k->a;
  if (auto* k = std::get_if<OperatorSpec::TruncatedLinear>(&op.kind)) return k->a;
  return std::nullopt;
}

NodePlan make_plan(const OperatorSpec& op, const GridFunction& u, std::size_t node, const Stencil& st) {
  const int n = u.dim();
  NodePlan p;
  p.node = node;
  p.x = u.point(node);
  p.slot.assign(st.dirs.size(), kNoDir);
  for (std::size_t d = 0; d < st.dirs.size(); ++d) {
    Index minus{};
    for (int i = 0; i < n; ++i) minus[i] = -st.dirs[d][i];
    auto a = u.neighbor(node, st.dirs[d]);
    auto b = u.neighbor(node, minus);
    if (!a || !b) continue;
    double len2 = 0.0;
    for (int i = 0; i < n; ++i) len2 += static_cast<double>(st.dirs[d][i]) * st.dirs[d][i];
    p.slot[d] = static_cast<int>(p.dirs.size());
    p.dirs.push_back(static_cast<int>(d));
    p.arms.emplace_back(*a, *b);
    p.inv_len2.push_back(1.0 / (len2 * u.h() * u.h()));
  }
  if (p.dirs.empty()) throw InvalidInput("discrete_operator: every stencil arm exits the mask");
  for (const auto& fr : st.frames) {
    std::vector<int> pos;
    for (int d : fr)
      if (p.slot[d] != kNoDir) pos.push_back(p.slot[d]);
    if (pos.size() == fr.size()) p.frames.push_back(pos);
  }
  if (p.frames.empty()) throw InvalidInput("discrete_operator: no complete orthogonal frame at node");

  if (auto* k = std::get_if<OperatorSpec::KthEigenvalue>(&op.kind)) {
    if (k->k < 1 || k->k > n) throw InvalidInput("discrete_operator: k out of range");
    for (const auto& set : st.spans[k->k - 1]) {
      std::vector<int> pos;
      for (int d : set)
        if (p.slot[d] != kNoDir) pos.push_back(p.slot[d]);
      if (!pos.empty()) p.k_sets.push_back(pos);
    }
  }
  p.f = op.f()(p.x);
  if (auto M = shift_field(op)) {
    const SymMat Mx = (*M)(p.x);
    for (int d : p.dirs) p.m_proj.push_back(Mx.quad(st.units[d]));
  }
  if (auto a = trace_field(op)) {
    const SymMat ax = (*a)(p.x);
    std::vector<std::vector<double>> cols;
    for (int d : p.dirs) cols.push_back(upper_entries(outer(st.units[d], st.units[d])));
    const auto target = upper_entries(ax);
    p.weights = nnls(cols, target);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      double r = target[i];
      for (std::size_t j = 0; j < cols.size(); ++j) r -= cols[j][i] * p.weights[j];
      err = std::max(err, std::abs(r));
      scale = std::max(scale, std::abs(target[i]));
    }
    if (err > 1e-9 * (1.0 + scale))
      throw InvalidInput("discrete_operator: coefficient a(x) is not a nonnegative combination of stencil directions at x = " +
                         to_json(p.x).dump());
  }
  return p;
}

double pucci_frames(const NodePlan& p, const double* D, double lo, double hi) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& fr : p.frames) {
    double s = 0.0;
    for (int q : fr) s += D[q] > 0.0 ? lo * D[q] : hi * D[q];
    best = std::min(best, s);
  }
  return best;
}

/// G_h from the second differences D (indexed by position in p.dirs).
double scheme_value(const OperatorSpec& op, const NodePlan& p, const double* D) {
  const int n = op.dim;
  const std::size_t nd = p.dirs.size();
  auto constraint = [&](bool shifted) {
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < nd; ++q) c = std::min(c, D[q] + (shifted ? p.m_proj[q] : 0.0));
    return c;
  };
  auto frame_product = [&](bool shifted, bool root) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& fr : p.frames) {
      double prod = 1.0;
      for (int q : fr) prod *= std::max(D[q] + (shifted ? p.m_proj[q] : 0.0), 0.0);
      best = std::min(best, prod);
    }
    if (!root || n == 1) return best;
    return n == 2 ? std::sqrt(best) : n == 3 ? std::cbrt(best) : std::pow(best, 1.0 / n);
  };
  auto linear = [&]() {
    double s = 0.0;
    for (std::size_t q = 0; q < nd; ++q) s += p.weights[q] * D[q];
    return s;
  };
  return std::visit(overloaded{
                        [&](const OperatorSpec::MongeAmpere&) { return std::min(frame_product(false, false) - p.f, constraint(false)); },
                        [&](const OperatorSpec::PerturbedMA&) { return std::min(frame_product(true, true) - p.f, constraint(true)); },
                        [&](const OperatorSpec::BellmanMA&) { return std::min(frame_product(true, true) - p.f, constraint(true)); },
                        [&](const OperatorSpec::KthEigenvalue&) {
                          double best = std::numeric_limits<double>::infinity();
                          for (const auto& set : p.k_sets) {
                            double mx = -std::numeric_limits<double>::infinity();
                            for (int q : set) mx = std::max(mx, D[q]);
                            best = std::min(best, mx);
                          }
                          return best - p.f;
                        },
                        [&](const OperatorSpec::PucciMinus& k) { return pucci_frames(p, D, k.lambda, k.Lambda) - p.f; },
                        [&](const OperatorSpec::LinearTrace&) { return linear() - p.f; },
                        [&](const OperatorSpec::TruncatedLinear& k) {
                          return std::min(linear() - p.f, pucci_frames(p, D, 0.5 * k.lambda, k.Lambda) + k.h);
                        },
                    },
                    op.kind);
}

/// G_h at the node when its value is replaced by u0.
double node_value(const OperatorSpec& op, const NodePlan& p, const std::vector<double>& vals, double u0) {
  double D[64];
  for (std::size_t q = 0; q < p.dirs.size(); ++q)
    D[q] = (vals[p.arms[q].first] + vals[p.arms[q].second] - 2.0 * u0) * p.inv_len2[q];
  return scheme_value(op, p, D);
}

/// Largest u0 with G_h >= 0, by a bracketed Illinois iteration that falls back to bisection.
double solve_node(const OperatorSpec& op, const NodePlan& p, const std::vector<double>& vals) {
  double nmin = std::numeric_limits<double>::infinity(), nmax = -nmin;
  for (const auto& [a, b] : p.arms) {
    nmin = std::min({nmin, vals[a], vals[b]});
    nmax = std::max({nmax, vals[a], vals[b]});
  }
  double lo = nmin - 10.0, hi = nmax + 10.0;
  double glo = node_value(op, p, vals, lo), ghi = node_value(op, p, vals, hi);
  for (int i = 0; i < 60 && glo < 0.0; ++i) {
    lo -= (hi - lo);
    glo = node_value(op, p, vals, lo);
  }
  for (int i = 0; i < 60 && ghi >= 0.0; ++i) {
    hi += (hi - lo);
    ghi = node_value(op, p, vals, hi);
  }
  if (glo < 0.0 || ghi >= 0.0) throw std::runtime_error("perron_solve: scalar equation has no sign change at a node");

  // shrink the bracket around the current value, which is close to the root after the first sweeps
  const double c = vals[p.node];
  if (c > lo && c < hi) {
    const double gc = node_value(op, p, vals, c);
    const double dir = gc >= 0.0 ? 1.0 : -1.0;
    (gc >= 0.0 ? lo : hi) = c;
    (gc >= 0.0 ? glo : ghi) = gc;
    for (double d = 1e-9 * (1.0 + std::abs(c)); d < hi - lo; d *= 8.0) {
      const double x = c + dir * d;
      if (!(x > lo && x < hi)) break;
      const double g = node_value(op, p, vals, x);
      if (g >= 0.0) {
        lo = x;
        glo = g;
      } else {
        hi = x;
        ghi = g;
      }
      if ((g >= 0.0) != (dir > 0.0)) break;
    }
  }

  const double tol = 1e-12;
  int side = 0;
  for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::abs(lo)); ++it) {
    double x;
    if (it % 4 == 3) {
      x = 0.5 * (lo + hi);
    } else {
      const double wl = side == -1 ? 0.5 : 1.0, wh = side == 1 ? 0.5 : 1.0;
      x = (lo * (-ghi) * wh + hi * glo * wl) / (glo * wl - ghi * wh);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    }
    const double g = node_value(op, p, vals, x);
    if (g >= 0.0) {
      lo = x;
      glo = g;
      side = -1;
    } else {
      hi = x;
      ghi = g;
      side = 1;
    }
  }
  return lo;
}

struct Plans {
  std::vector<NodePlan> nodes;
  std::vector<std::vector<std::size_t>> colors;  // positions into nodes
};

Plans build_plans(const OperatorSpec& op, const GridFunction& u, const Stencil& st) {
  Plans P;
  const int base = st.radius + 1;
  int ncolors = 1;
  for (int i = 0; i < u.dim(); ++i) ncolors *= base;
  P.colors.resize(static_cast<std::size_t>(ncolors));
  for (std::size_t k : u.nodes(NodeTag::Interior)) {
    const Index idx = u.index(k);
    int c = 0;
    for (int i = u.dim() - 1; i >= 0; --i) c = c * base + ((idx[i] % base) + base) % base;
    P.colors[static_cast<std::size_t>(c)].push_back(P.nodes.size());
    P.nodes.push_back(make_plan(op, u, k, st));
  }
  return P;
}

double max_residual(const OperatorSpec& op, const Plans& P, const std::vector<double>& vals) {
  double r = 0.0;
  for (const NodePlan& p : P.nodes) r = std::max(r, std::abs(node_value(op, p, vals, vals[p.node])));
  return r;
}

double min_scheme(const OperatorSpec& op, const Plans& P, const std::vector<double>& vals) {
  double r = std::numeric_limits<double>::infinity();
  for (const NodePlan& p : P.nodes) r = std::min(r, node_value(op, p, vals, vals[p.node]));
  return r;
}

double max_scheme(const OperatorSpec& op, const Plans& P, const std::vector<double>& vals) {
  double r = -std::numeric_limits<double>::infinity();
  for (const NodePlan& p : P.nodes) r = std::max(r, node_value(op, p, vals, vals[p.node]));
  return r;
}

/// Lower (sign = +1) or upper (sign = -1) envelope of boundary barriers phi(x0) + sign (B(x) - delta),
/// with C doubled until the envelope is a discrete sub- (super-) solution.
struct Envelope {
  std::vector<double> values;
  double C = 0.0;
  bool ok = false;
};

Envelope barrier_envelope(const DirichletProblem& pb, const OperatorSpec& op, const GridFunction& grid, const Plans& P,
                          double sign) {
  const DomainSpec& D = pb.domain;
  const auto x0s = D.boundary_points(pb.params.barrier_points);
  const auto bnodes = grid.nodes(NodeTag::Boundary);
  Envelope env;
  double C = 1.0;
  for (int attempt = 0; attempt < 48; ++attempt, C *= 2.0) {
    std::vector<double> vals = grid.values();
    std::vector<double> best(grid.size(), sign > 0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity());
    for (const Vec& x0 : x0s) {
      const Barrier b(D, x0, C, pb.params.barrier_eps);
      const double phi0 = pb.boundary(x0);
      double delta = 0.0;
      for (std::size_t k : bnodes) delta = std::max(delta, sign * (phi0 + sign * b(grid.point(k)) - grid.value(k)));
      delta += 1e-12 * (1.0 + std::abs(phi0));
      for (const NodePlan& p : P.nodes) {
        const double v = phi0 + sign * (b(p.x) - delta);
        best[p.node] = sign > 0 ? std::max(best[p.node], v) : std::min(best[p.node], v);
      }
    }
    for (const NodePlan& p : P.nodes) vals[p.node] = best[p.node];
    const bool ok = sign > 0 ? min_scheme(op, P, vals) >= 0.0 : max_scheme(op, P, vals) < 0.0;
    if (ok) {
      env.values = std::move(vals);
      env.C = C;
      env.ok = true;
      return env;
    }
  }
  return env;
}

void run_parallel(std::size_t count, int threads, const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads <= 1 || count < 64) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t t = static_cast<std::size_t>(threads);
  const std::size_t chunk = (count + t - 1) / t;
  for (std::size_t s = 0; s < count; s += chunk) pool.emplace_back(body, s, std::min(count, s + chunk));
  for (auto& th : pool) th.join();
}

}  // namespace

// ---------------------------------------------------------------------------

Stencil make_stencil(int n, int radius) {
  if (radius < 1) throw InvalidInput("stencil radius must be at least 1");
  Stencil st;
  st.dim = n;
  st.radius = radius;
  st.dirs = primitive_directions(n, radius);
  for (const Index& d : st.dirs) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = d[i];
    st.units.push_back((1.0 / v.norm()) * v);
  }
  auto dot = [&](int a, int b) {
    long s = 0;
    for (int i = 0; i < n; ++i) s += static_cast<long>(st.dirs[a][i]) * st.dirs[b][i];
    return s;
  };
  const int m = static_cast<int>(st.dirs.size());
  std::vector<int> cur;
  std::function<void(int)> grow = [&](int from) {
    if (static_cast<int>(cur.size()) == n) {
      st.frames.push_back(cur);
      return;
    }
    for (int d = from; d < m; ++d) {
      bool orth = true;
      for (int c : cur) orth = orth && dot(c, d) == 0;
      if (!orth) continue;
      cur.push_back(d);
      grow(d + 1);
      cur.pop_back();
    }
  };
  grow(0);

  st.spans.resize(static_cast<std::size_t>(n));
  for (const auto& fr : st.frames) {
    for (int mask = 1; mask < (1 << n); ++mask) {
      std::vector<int> sub;
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) sub.push_back(fr[i]);
      std::vector<int> members;
      for (int d = 0; d < m; ++d) {
        // d lies in span(sub) iff its projection onto the orthogonal frame vectors outside sub vanishes
        bool inside = true;
        for (int i = 0; i < n; ++i)
          if (!(mask >> i & 1) && dot(d, fr[i]) != 0) inside = false;
        if (inside) members.push_back(d);
      }
      st.spans[sub.size() - 1].push_back(members);
    }
  }
  return st;
}

double discrete_operator(const BranchSpec& branch, const GridFunction& u, std::size_t node, const Stencil& stencil) {
  if (u.tag(node) != NodeTag::Interior) throw InvalidInput("discrete_operator: node is not interior");
  if (stencil.dim != u.dim() || branch.op->dim != u.dim()) throw DimensionMismatch("discrete_operator: dimensions differ");
  const NodePlan p = make_plan(*branch.op, u, node, stencil);
  return node_value(*branch.op, p, u.values(), u.value(node));
}

// ---------------------------------------------------------------------------

std::vector<double> default_alpha_grid() { return {0.0, 1.0, 10.0, 100.0, 1e3, 1e4}; }

ConditionReport convexity_check(const DomainSpec& domain, const EllipticMapSpec& theta, int samples,
                                const std::vector<double>& alpha_grid) {
  if (alpha_grid.empty()) throw InvalidInput("convexity_check: empty alpha grid");
  ConditionReport rep;
  rep.check = "boundary_convexity";
  rep.parameters = {{"samples", samples}, {"alpha_grid", alpha_grid}};
  double worst_R = 0.0;
  for (const Vec& x : domain.boundary_points(samples)) {
    ++rep.samples_used;
    const SymMat H = domain.hess_rho(x);
    const Vec g = domain.grad_rho(x);
    const EllipticSetSpec T = theta.at(x);
    bool ok = false;
    for (double a : alpha_grid) {
      const ConeResult c = cone_test(T, H + a * outer(g, g));
      if (c.inside) {
        ok = true;
        worst_R = std::max(worst_R, c.R);
        break;
      }
    }
    if (ok) continue;
    rep.verdict = Verdict::Fail;
    Witness w;
    w.x = x;
    w.A = H;
    w.values = {{"grad_rho", to_json(g)}};
    rep.witness = w;
    return rep;
  }
  rep.details["cone_radius"] = worst_R;
  rep.verdict = Verdict::Pass;
  return rep;
}

Barrier::Barrier(const DomainSpec& domain, Vec x0, double C, double eps) : x0_(std::move(x0)), C_(C), eps_(eps) {
  if (std::holds_alternative<DomainSpec::Ball>(domain.shape()) || std::holds_alternative<DomainSpec::Ellipsoid>(domain.shape())) {
    q_ = domain;
  } else {
    Vec c(domain.dim());
    double r2 = 0.0;
    for (int i = 0; i < domain.dim(); ++i) {
      c[i] = 0.5 * (domain.lo()[i] + domain.hi()[i]);
      r2 += 0.25 * (domain.hi()[i] - domain.lo()[i]) * (domain.hi()[i] - domain.lo()[i]);
    }
    q_ = DomainSpec(DomainSpec::Ball{c, std::sqrt(r2)});
  }
}

double Barrier::operator()(const Vec& x) const {
  const Vec d = x - x0_;
  return C_ * (q_.rho(x) - eps_ * d.dot(d));
}

SymMat Barrier::hessian(const Vec& x) const { return C_ * q_.hess_rho(x).shifted(-2.0 * eps_); }

Barrier barrier(const DomainSpec& domain, const Vec& x0, double C, double eps, double R_certified) {
  if (!(eps > 0.0)) throw InvalidInput("barrier: eps must be positive");
  if (!(C >= R_certified) || !(C > 0.0)) throw InvalidInput("barrier: C is below the certified cone radius");
  return Barrier(domain, x0, C, eps);
}

bool barrier_valid(const Barrier& b, const EllipticMapSpec& theta, const std::vector<Vec>& samples) {
  for (const Vec& x : samples)
    if (!contains(theta.at(x), b.hessian(x))) return false;
  return true;
}

// ---------------------------------------------------------------------------

bool certify(DirichletProblem& p, const Sampler& sampler) {
  const BranchSpec& B = p.branch;
  ojson flags = ojson::object();
  Sampler s = sampler;
  const ConditionReport uusc = uusc_certify(B.theta, 0.25, s, 12);
  flags["uusc"] = to_string(uusc.verdict);
  flags["uusc_delta"] = uusc.details.value("certified_delta", ojson(nullptr));
  flags["branch_condition"] = to_string(branch_condition_check(B, s).verdict);
  flags["nondegeneracy"] = to_string(nondegeneracy_check(B, s).verdict);
  const ConditionReport conv = convexity_check(p.domain, B.theta);
  flags["boundary_convexity"] = to_string(conv.verdict);
  if (conv.verdict != Verdict::Pass) flags["warning"] = "boundary convexity not certified; solving anyway";
  for (const auto& [k, v] : B.flags.items()) flags["branch_" + k] = v;
  p.flags = flags;
  return flags["uusc"] != "fail" && flags["branch_condition"] != "fail" && flags["nondegeneracy"] != "fail";
}

ojson to_json(const SolveReport& r) {
  ojson j;
  j["converged"] = r.converged;
  j["sweeps"] = r.sweeps;
  j["final_update"] = r.final_update;
  j["residual"] = r.residual;
  j["max_error"] = r.max_error ? ojson(*r.max_error) : ojson(nullptr);
  j["interior_nodes"] = r.interior_nodes;
  j["barrier_C"] = r.barrier_C;
  j["lower_barrier_ok"] = r.lower_barrier_ok;
  j["upper_barrier_ok"] = r.upper_barrier_ok;
  j["comparison"] = r.comparison;
  j["flags"] = r.flags;
  // keep the history short: first entries plus every 100th
  ojson h = ojson::array();
  for (std::size_t i = 0; i < r.history.size(); ++i)
    if (i < 10 || (i + 1) % 100 == 0 || i + 1 == r.history.size()) h.push_back({{"sweep", i + 1}, {"update", r.history[i]}});
  j["history"] = h;
  return j;
}

SolveResult perron_solve(const DirichletProblem& problem) {
  DirichletProblem p = problem;
  const OperatorSpec& op = *p.branch.op;
  if (op.dim != p.domain.dim()) throw DimensionMismatch("perron_solve: operator and domain dimensions differ");
  if (!(p.params.h > 0.0) || !(p.params.tol > 0.0)) throw InvalidInput("perron_solve: h and tol must be positive");
  if (p.flags.empty()) certify(p);
  if (p.params.require_certificates) {
    for (const char* key : {"uusc", "branch_condition", "nondegeneracy"})
      if (!p.flags.contains(key) || p.flags[key] == "fail")
        throw PreconditionError(std::string("perron_solve: required check failed or missing: ") + key, p.flags);
  }

  GridFunction grid = GridFunction::on_domain(p.domain, p.params.h);
  for (std::size_t k : grid.nodes(NodeTag::Boundary)) grid.set_value(k, p.boundary(p.domain.project(grid.point(k))));
  const Stencil st = make_stencil(op.dim, p.params.stencil_radius);
  const Plans P = build_plans(op, grid, st);

  SolveReport rep;
  rep.flags = p.flags;
  rep.interior_nodes = P.nodes.size();

  const Envelope lower = barrier_envelope(p, op, grid, P, 1.0);
  if (!lower.ok) throw std::runtime_error("perron_solve: no barrier subsolution found");
  rep.barrier_C = lower.C;
  GridFunction init = grid;
  for (const NodePlan& n : P.nodes) init.set_value(n.node, lower.values[n.node]);

  std::vector<double> vals = lower.values;
  std::vector<double> change(P.nodes.size(), 0.0);
  for (int sweep = 0; sweep < p.params.max_sweeps; ++sweep) {
    for (const auto& color : P.colors) {
      run_parallel(color.size(), p.params.threads, [&](std::size_t s, std::size_t e) {
        for (std::size_t i = s; i < e; ++i) {
          const NodePlan& np = P.nodes[color[i]];
          const double v = solve_node(op, np, vals);
          change[color[i]] = std::abs(v - vals[np.node]);
          vals[np.node] = v;
        }
      });
    }
    const double upd = *std::max_element(change.begin(), change.end());
    rep.history.push_back(upd);
    rep.sweeps = sweep + 1;
    rep.final_update = upd;
    if (upd < p.params.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.residual = max_residual(op, P, vals);
  if (!rep.converged) throw SolveFailure("perron_solve: no convergence within max_sweeps", rep);

  GridFunction u = grid;
  for (const NodePlan& n : P.nodes) u.set_value(n.node, vals[n.node]);

  rep.lower_barrier_ok = true;
  for (const NodePlan& n : P.nodes)
    if (vals[n.node] < lower.values[n.node] - 1e-8) rep.lower_barrier_ok = false;
  const Envelope upper = barrier_envelope(p, op, grid, P, -1.0);
  rep.upper_barrier_ok = upper.ok;
  if (upper.ok)
    for (const NodePlan& n : P.nodes)
      if (vals[n.node] > upper.values[n.node] + 1e-8) rep.upper_barrier_ok = false;

  if (p.reference) {
    double err = 0.0;
    for (const NodePlan& n : P.nodes) err = std::max(err, std::abs(vals[n.node] - (*p.reference)(n.x)));
    rep.max_error = err;
  }
  Dictionary dict;
  dict.shell = std::max(10.0 * p.params.h, dict.shift);
  rep.comparison = to_string(comparison_harness(init, u, p.branch.theta, dict, 1e-8).status);
  return {std::move(u), std::move(init), std::move(rep)};
}

std::vector<ConvergenceRow> convergence_study(DirichletProblem p, const std::vector<double>& h_ladder) {
  if (h_ladder.empty()) throw InvalidInput("convergence_study: empty h ladder");
  std::vector<double> hs = h_ladder;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  if (p.flags.empty()) certify(p);
  std::vector<SolveResult> sols;
  for (double h : hs) {
    p.params.h = h;
    sols.push_back(perron_solve(p));
  }
  std::vector<ConvergenceRow> rows;
  const GridFunction& fine = sols.back().u;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    ConvergenceRow r{hs[i], 0.0, sols[i].report.sweeps, sols[i].report.residual};
    if (p.reference) {
      r.max_error = *sols[i].report.max_error;
    } else {
      const GridFunction& u = sols[i].u;
      for (std::size_t k : u.nodes(NodeTag::Interior)) {
        const Vec x = u.point(k);
        auto f = fine.nearest(x);
        if (!f || fine.tag(*f) != NodeTag::Interior || (fine.point(*f) - x).norm() > 1e-9 * hs[i]) continue;
        r.max_error = std::max(r.max_error, std::abs(u.value(k) - fine.value(*f)));
      }
    }
    rows.push_back(r);
  }
  return rows;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "h,max_error,sweeps,residual\n";
  os.precision(17);
  for (const auto& r : rows) os << r.h << ',' << r.max_error << ',' << r.sweeps << ',' << r.residual << '\n';
}

}  // namespace ellb
