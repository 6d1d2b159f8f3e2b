#include "ellbranch/weaksol.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "internal.hpp"

namespace ellb {
namespace {

using detail::offsets;
using detail::primitive_directions;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidInput("grid csv: bad number '" + s + "'");
  return v;
}

Index add(const Index& a, const Index& b, int n) {
  Index r{};
  for (int i = 0; i < n; ++i) r[i] = a[i] + b[i];
  return r;
}

Index axis(int i, int s) {
  Index d{};
  d[i] = s;
  return d;
}

double sq_norm(const Index& d, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += static_cast<double>(d[i]) * d[i];
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(int n, double h, Index lo, Index shape) : n_(n), h_(h), lo_(lo), shape_(shape) {
  if (n < 1 || n > kMaxDim) throw DimensionMismatch("grid dimension out of range");
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("grid spacing must be positive");
  std::size_t total = 1;
  for (int i = n - 1; i >= 0; --i) {
    if (shape[i] < 1) throw InvalidInput("grid shape must be positive");
    stride_[i] = static_cast<int>(total);
    total *= static_cast<std::size_t>(shape[i]);
  }
  tags_.assign(total, NodeTag::Outside);
  values_.assign(total, kMinusInf);
}

GridFunction GridFunction::on_domain(const DomainSpec& d, double h) {
  const int n = d.dim();
  Index lo{}, shape{};
  for (int i = 0; i < n; ++i) {
    lo[i] = static_cast<int>(std::floor(d.lo()[i] / h)) - 1;
    const int hi = static_cast<int>(std::ceil(d.hi()[i] / h)) + 1;
    shape[i] = hi - lo[i] + 1;
  }
  GridFunction g(n, h, lo, shape);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (d.contains(g.point(k))) g.set_tag(k, NodeTag::Interior);
  const auto ring = offsets(n, 1);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.tag(k) == NodeTag::Interior) continue;
    const Index idx = g.index(k);
    for (const Index& o : ring) {
      auto nb = g.find(add(idx, o, n));
      if (nb && g.tag(*nb) == NodeTag::Interior) {
        g.set_tag(k, NodeTag::Boundary);
        break;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> seen;
    for (std::size_t k : g.nodes(NodeTag::Interior)) seen.push_back(g.index(k)[i]);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    if (seen.size() < 3) throw InvalidInput("grid: fewer than 3 interior nodes along an axis; decrease h");
  }
  return g;
}

GridFunction GridFunction::sample(const DomainSpec& d, double h, const std::function<double(const Vec&)>& fn, BoundaryValues mode) {
  GridFunction g = on_domain(d, h);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const NodeTag t = g.tag(k);
    if (t == NodeTag::Outside) continue;
    const Vec x = g.point(k);
    g.values_[k] = (t == NodeTag::Boundary && mode == BoundaryValues::AtProjection) ? fn(d.project(x)) : fn(x);
  }
  return g;
}

Index GridFunction::index(std::size_t node) const {
  Index idx{};
  auto rem = static_cast<long long>(node);
  for (int i = 0; i < n_; ++i) {
    idx[i] = lo_[i] + static_cast<int>(rem / stride_[i]);
    rem %= stride_[i];
  }
  return idx;
}

std::optional<std::size_t> GridFunction::find(const Index& idx) const {
  std::size_t k = 0;
  for (int i = 0; i < n_; ++i) {
    const int r = idx[i] - lo_[i];
    if (r < 0 || r >= shape_[i]) return std::nullopt;
    k += static_cast<std::size_t>(r) * static_cast<std::size_t>(stride_[i]);
  }
  return k;
}

std::optional<std::size_t> GridFunction::neighbor(std::size_t node, const Index& offset) const {
  auto k = find(add(index(node), offset, n_));
  if (!k || tags_[*k] == NodeTag::Outside) return std::nullopt;
  return k;
}

std::optional<std::size_t> GridFunction::nearest(const Vec& x) const {
  if (x.size() != n_) throw DimensionMismatch("grid: point dimension differs");
  Index idx{};
  for (int i = 0; i < n_; ++i) idx[i] = static_cast<int>(std::lround(x[i] / h_));
  return find(idx);
}

Vec GridFunction::point(std::size_t node) const {
  const Index idx = index(node);
  Vec x(n_);
  for (int i = 0; i < n_; ++i) x[i] = idx[i] * h_;
  return x;
}

void GridFunction::set_tag(std::size_t node, NodeTag t) {
  tags_[node] = t;
  if (t == NodeTag::Outside) values_[node] = kMinusInf;
  else if (values_[node] <= kMinusInf) values_[node] = 0.0;
}

void GridFunction::set_value(std::size_t node, double v) {
  if (tags_[node] == NodeTag::Outside) return;
  if (tags_[node] == NodeTag::Boundary && !std::isfinite(v)) throw InvalidInput("grid: boundary values must be finite");
  values_[node] = saturate(v);
}

std::vector<std::size_t> GridFunction::nodes(NodeTag t) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < tags_.size(); ++k)
    if (tags_[k] == t) out.push_back(k);
  return out;
}

bool GridFunction::same_lattice(const GridFunction& o) const {
  if (n_ != o.n_ || h_ != o.h_ || tags_ != o.tags_) return false;
  for (int i = 0; i < n_; ++i)
    if (lo_[i] != o.lo_[i] || shape_[i] != o.shape_[i]) return false;
  return true;
}

GridFunction GridFunction::transformed(const std::function<double(const Vec&, double)>& fn) const {
  GridFunction g = *this;
  for (std::size_t k = 0; k < size(); ++k)
    if (tags_[k] != NodeTag::Outside) g.values_[k] = saturate(fn(point(k), values_[k]));
  return g;
}

GridFunction GridFunction::operator-() const {
  return transformed([](const Vec&, double v) { return -v; });
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (!a.same_lattice(b)) throw DimensionMismatch("grid functions live on different lattices");
  GridFunction g = a;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.tags_[k] != NodeTag::Outside) g.values_[k] = saturate(a.values_[k] - b.values_[k]);
  return g;
}

void GridFunction::write_csv(std::ostream& os) const {
  for (int i = 0; i < n_; ++i) os << 'x' << (i + 1) << ',';
  os << "mask,value\n";
  for (std::size_t k = 0; k < size(); ++k) {
    const Vec x = point(k);
    for (int i = 0; i < n_; ++i) os << format_double(x[i]) << ',';
    os << static_cast<char>(tags_[k]) << ',' << format_double(values_[k]) << '\n';
  }
}

GridFunction GridFunction::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("grid csv: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const int n = static_cast<int>(header.size()) - 2;
  if (n < 1 || n > kMaxDim || header[n] != "mask" || header[n + 1] != "value")
    throw InvalidInput("grid csv: header must be x1,...,xN,mask,value");
  for (int i = 0; i < n; ++i)
    if (header[i] != "x" + std::to_string(i + 1)) throw InvalidInput("grid csv: header must be x1,...,xN,mask,value");

  struct Row {
    Vec x;
    NodeTag t;
    double v;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Row r{Vec(n), NodeTag::Outside, 0.0};
    for (int i = 0; i < n; ++i) {
      if (!std::getline(ss, cell, ',')) throw InvalidInput("grid csv: short row");
      r.x[i] = parse_double(cell);
    }
    if (!std::getline(ss, cell, ',') || cell.size() != 1 || std::string("IBO").find(cell[0]) == std::string::npos)
      throw InvalidInput("grid csv: mask must be one of I, B, O");
    r.t = static_cast<NodeTag>(cell[0]);
    if (!std::getline(ss, cell, ',')) throw InvalidInput("grid csv: short row");
    r.v = parse_double(cell);
    rows.push_back(r);
  }
  if (rows.empty()) throw InvalidInput("grid csv: no nodes");

  Vec lo = rows[0].x, hi = rows[0].x;
  for (const Row& r : rows)
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], r.x[i]);
      hi[i] = std::max(hi[i], r.x[i]);
    }
  std::vector<std::vector<double>> coords(n);
  for (const Row& r : rows)
    for (int i = 0; i < n; ++i) coords[i].push_back(r.x[i]);
  double h = 0.0;
  Index shape{};
  for (int i = 0; i < n; ++i) {
    auto& c = coords[i];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    shape[i] = static_cast<int>(c.size());
    if (h == 0.0 && c.size() > 1) h = (hi[i] - lo[i]) / static_cast<double>(c.size() - 1);
  }
  if (!(h > 0.0)) throw InvalidInput("grid csv: cannot infer spacing");
  Index lidx{};
  for (int i = 0; i < n; ++i) lidx[i] = static_cast<int>(std::lround(lo[i] / h));
  GridFunction g(n, h, lidx, shape);
  if (rows.size() != g.size()) throw InvalidInput("grid csv: nodes do not form a full box");
  for (const Row& r : rows) {
    auto k = g.nearest(r.x);
    if (!k) throw InvalidInput("grid csv: node off the lattice");
    g.tags_[*k] = r.t;
    g.values_[*k] = r.t == NodeTag::Outside ? kMinusInf : r.v;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Stencils

SymMat stencil_hessian(const GridFunction& u, std::size_t node) {
  if (u.tag(node) != NodeTag::Interior) throw InvalidInput("stencil_hessian: node is not interior");
  const int n = u.dim();
  const double h2 = u.h() * u.h();
  auto val = [&](const Index& o) {
    auto k = u.neighbor(node, o);
    if (!k) throw InvalidInput("stencil_hessian: stencil leaves the domain");
    return u.value(*k);
  };
  const double c = u.value(node);
  SymMat H(n);
  for (int i = 0; i < n; ++i) {
    H.set(i, i, (val(axis(i, 1)) - 2.0 * c + val(axis(i, -1))) / h2);
    for (int j = i + 1; j < n; ++j) {
      Index pp{}, pm{}, mp{}, mm{};
      pp[i] = 1, pp[j] = 1;
      pm[i] = 1, pm[j] = -1;
      mp[i] = -1, mp[j] = 1;
      mm[i] = -1, mm[j] = -1;
      H.set(i, j, (val(pp) - val(pm) - val(mp) + val(mm)) / (4.0 * h2));
    }
  }
  return H;
}

Vec stencil_gradient(const GridFunction& u, std::size_t node) {
  const int n = u.dim();
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    auto p = u.neighbor(node, axis(i, 1));
    auto m = u.neighbor(node, axis(i, -1));
    if (!p || !m) throw InvalidInput("stencil_gradient: stencil leaves the domain");
    g[i] = (u.value(*p) - u.value(*m)) / (2.0 * u.h());
  }
  return g;
}

// ---------------------------------------------------------------------------
// Subaffinity

bool replay_contact(const GridFunction& u, const ContactTriple& t, double tol) {
  const double scale = 1.0 + std::abs(u.value(t.node));
  if (std::abs(u.value(t.node) - t.affine(t.x0)) > tol * scale) return false;
  const int n = u.dim();
  const int rad = static_cast<int>(std::ceil(t.r / u.h()));
  for (const Index& o : offsets(n, rad)) {
    auto k = u.neighbor(t.node, o);
    if (!k) continue;
    const Vec x = u.point(*k);
    const double d2 = (x - t.x0).dot(x - t.x0);
    if (d2 > t.r * t.r) continue;
    if (u.value(*k) - t.affine(x) > -t.eps * d2 + tol * scale) return false;
  }
  return true;
}

NodeBox full_box(const GridFunction& u) {
  NodeBox b;
  for (int i = 0; i < u.dim(); ++i) {
    b.lo[i] = u.lo()[i];
    b.hi[i] = u.lo()[i] + u.shape()[i] - 1;
  }
  return b;
}

namespace {

struct Affine {
  Vec slope;
  double intercept = 0.0;
  double operator()(const Vec& x) const { return slope.dot(x) + intercept; }
};

std::optional<Affine> fit_affine(const std::vector<Vec>& xs, const std::vector<double>& us, int n) {
  const std::size_t m = static_cast<std::size_t>(n) + 1;
  std::vector<double> A(m * m, 0.0), b(m, 0.0);
  for (std::size_t p = 0; p < xs.size(); ++p) {
    double row[kMaxDim + 1];
    for (int i = 0; i < n; ++i) row[i] = xs[p][i];
    row[n] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      b[i] += row[i] * us[p];
      for (std::size_t j = 0; j < m; ++j) A[i * m + j] += row[i] * row[j];
    }
  }
  try {
    auto c = detail::solve_dense(A, b);
    Affine a{Vec(n), c[static_cast<std::size_t>(n)]};
    for (int i = 0; i < n; ++i) a.slope[i] = c[static_cast<std::size_t>(i)];
    return a;
  } catch (const InvalidInput&) {
    return std::nullopt;
  }
}

template <class Fn>
void for_each_in_box(const NodeBox& b, int n, Fn&& fn) {
  Index idx = b.lo;
  while (true) {
    fn(idx);
    int i = n - 1;
    while (i >= 0 && idx[i] == b.hi[i]) {
      idx[i] = b.lo[i];
      --i;
    }
    if (i < 0) return;
    ++idx[i];
  }
}

std::vector<std::pair<int, int>> dyadic_pieces(int a, int b, int level) {
  const int parts = 1 << level;
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < parts; ++j) {
    const int s = a + static_cast<int>(std::lround(static_cast<double>(j) * (b - a) / parts));
    const int e = a + static_cast<int>(std::lround(static_cast<double>(j + 1) * (b - a) / parts));
    if (e - s < 2) return {};
    out.emplace_back(s, e);
  }
  return out;
}

}  // namespace

SubaffineResult subaffine_check(const GridFunction& u, const NodeBox& region, double tol) {
  const int n = u.dim();
  for (int i = 0; i < n; ++i)
    if (region.hi[i] - region.lo[i] < 2) throw InvalidInput("subaffine_check: region needs at least 3 nodes per axis");
  for_each_in_box(region, n, [&](const Index& idx) {
    auto k = u.find(idx);
    if (!k || u.tag(*k) == NodeTag::Outside) throw InvalidInput("subaffine_check: region leaves the mask");
  });

  SubaffineResult res;
  for (int level = 0;; ++level) {
    std::vector<std::vector<std::pair<int, int>>> pieces(n);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      pieces[i] = dyadic_pieces(region.lo[i], region.hi[i], level);
      ok = !pieces[i].empty();
    }
    if (!ok) break;

    std::vector<int> pick(n, 0);
    while (true) {
      NodeBox K;
      for (int i = 0; i < n; ++i) {
        K.lo[i] = pieces[i][pick[i]].first;
        K.hi[i] = pieces[i][pick[i]].second;
      }
      ++res.boxes;

      std::vector<std::size_t> inner, outer;
      for_each_in_box(K, n, [&](const Index& idx) {
        bool on_face = false;
        for (int i = 0; i < n; ++i) on_face = on_face || idx[i] == K.lo[i] || idx[i] == K.hi[i];
        (on_face ? outer : inner).push_back(*u.find(idx));
      });

      std::vector<Vec> bx;
      std::vector<double> bu;
      double scale = 1.0;
      for (std::size_t k : outer) {
        bx.push_back(u.point(k));
        bu.push_back(u.value(k));
      }
      for (std::size_t k : inner) scale = std::max(scale, std::abs(u.value(k)));
      for (double v : bu) scale = std::max(scale, std::abs(v));

      std::vector<Affine> dict{Affine{Vec(n), 0.0}};
      if (auto a = fit_affine(bx, bu, n)) dict.push_back(*a);
      for (int corner = 0; corner < (1 << n); ++corner) {
        std::vector<Vec> xs;
        std::vector<double> vs;
        Index c{};
        for (int i = 0; i < n; ++i) c[i] = (corner >> i & 1) ? K.hi[i] : K.lo[i];
        xs.push_back(u.point(*u.find(c)));
        vs.push_back(u.value(*u.find(c)));
        for (int i = 0; i < n; ++i) {
          Index f = c;
          f[i] = (corner >> i & 1) ? K.lo[i] : K.hi[i];
          xs.push_back(u.point(*u.find(f)));
          vs.push_back(u.value(*u.find(f)));
        }
        if (auto a = fit_affine(xs, vs, n)) dict.push_back(*a);
      }

      for (const Affine& a : dict) {
        ++res.affines;
        double m_out = -std::numeric_limits<double>::infinity(), m_in = m_out;
        for (std::size_t k : outer) m_out = std::max(m_out, u.value(k) - a(u.point(k)));
        for (std::size_t k : inner) m_in = std::max(m_in, u.value(k) - a(u.point(k)));
        const double gap = m_in - m_out;
        if (gap <= tol * scale) continue;

        Vec c(n);
        for (int i = 0; i < n; ++i) c[i] = 0.5 * (K.lo[i] + K.hi[i]) * u.h();
        double d2max = 0.0;
        for (std::size_t k : outer) d2max = std::max(d2max, (u.point(k) - c).dot(u.point(k) - c));
        const double eps = gap / (4.0 * d2max);
        std::size_t best = inner.front();
        double psi_best = -std::numeric_limits<double>::infinity();
        for (std::size_t k : inner) {
          const Vec x = u.point(k);
          const double psi = u.value(k) - a(x) + eps * (x - c).dot(x - c);
          if (psi > psi_best) {
            psi_best = psi;
            best = k;
          }
        }
        ContactTriple t;
        t.node = best;
        t.x0 = u.point(best);
        t.eps = eps;
        const Vec shift = t.x0 - c;
        t.slope = a.slope - (2.0 * eps) * shift;
        t.intercept = a.intercept + psi_best - eps * shift.dot(shift) + 2.0 * eps * shift.dot(t.x0);
        t.r = std::numeric_limits<double>::infinity();
        const Index bi = u.index(best);
        for (int i = 0; i < n; ++i) t.r = std::min({t.r, (bi[i] - K.lo[i]) * u.h(), (K.hi[i] - bi[i]) * u.h()});
        t.hessian = SymMat::identity(n, -2.0 * eps);
        res.pass = false;
        res.triple = t;
        return res;
      }

      int i = n - 1;
      while (i >= 0 && pick[i] + 1 == static_cast<int>(pieces[i].size())) pick[i--] = 0;
      if (i < 0) break;
      ++pick[i];
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Pointwise subharmonicity

std::vector<SymMat> build_dictionary(const SymMat& center, const Dictionary& dict) {
  const int n = center.dim();
  std::vector<SymMat> out;
  for (int k = -dict.multiples; k <= dict.multiples; ++k) out.push_back(center.shifted(k * dict.shift));
  Rng rng(dict.seed);
  for (int r = 0; r < dict.rotations; ++r) {
    const Frame q = random_rotation(rng, n);
    Vec d(n);
    for (int i = 0; i < n; ++i) d[i] = uniform(rng, 0.0, 1.0);
    const SymMat P = dict.shift * conjugate(q, d);
    out.push_back(center + P);
    out.push_back(center - P);
  }
  return out;
}

PointTest theta_subharmonic_test(const GridFunction& u, const EllipticMapSpec& M, std::size_t node, const Dictionary& dict) {
  return theta_subharmonic_test(u, M, node, build_dictionary(stencil_hessian(u, node), dict), dict);
}

PointTest theta_subharmonic_test(const GridFunction& u, const EllipticMapSpec& M, std::size_t node,
                                 const std::vector<SymMat>& hessians, const Dictionary& dict) {
  if (hessians.empty()) throw InvalidInput("theta_subharmonic_test: empty dictionary");
  if (u.tag(node) != NodeTag::Interior) throw InvalidInput("theta_subharmonic_test: node is not interior");
  if (M.dim() != u.dim()) throw DimensionMismatch("theta_subharmonic_test: map and grid dimensions differ");
  const int n = u.dim();
  const Vec x0 = u.point(node);
  const double u0 = u.value(node);
  const Vec g = stencil_gradient(u, node);
  const EllipticSetSpec theta = M.at(x0);

  struct BallNode {
    Vec dx;
    double v;
  };
  std::vector<BallNode> ball;
  double scale = 1.0 + std::abs(u0);
  const double r2 = static_cast<double>(dict.ball_radius) * dict.ball_radius;
  for (const Index& o : offsets(n, dict.ball_radius)) {
    if (sq_norm(o, n) > r2 || sq_norm(o, n) == 0.0) continue;
    auto k = u.neighbor(node, o);
    if (!k) continue;
    ball.push_back({u.point(*k) - x0, u.value(*k)});
    scale = std::max(scale, 1.0 + std::abs(u.value(*k)));
  }

  PointTest res;
  for (const SymMat& P : hessians) {
    bool touches = true;
    for (const BallNode& b : ball) {
      const double phi = u0 + g.dot(b.dx) + 0.5 * P.quad(b.dx);
      if (phi < b.v - 1e-10 * scale) {
        touches = false;
        break;
      }
    }
    if (!touches) continue;
    ++res.contacts;
    const bool ok = dict.shell > 0.0 ? enlarge_contains(theta, P, dict.shell) : contains(theta, P);
    if (!ok) {
      res.pass = false;
      res.witness = P;
      return res;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sup-convolution and Slodkowski's K

GridFunction sup_convolution(const GridFunction& u, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("sup_convolution: eps must be positive");
  std::vector<std::size_t> live;
  std::vector<Vec> pts;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u.tag(k) == NodeTag::Outside) continue;
    if (!std::isfinite(u.value(k)) || u.value(k) <= kMinusInf) throw InvalidInput("sup_convolution: u must be bounded");
    live.push_back(k);
    pts.push_back(u.point(k));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k : live) {
    lo = std::min(lo, u.value(k));
    hi = std::max(hi, u.value(k));
  }
  const double reach = eps * (hi - lo);
  GridFunction out = u;
  for (std::size_t a = 0; a < live.size(); ++a) {
    double best = u.value(live[a]);
    for (std::size_t b = 0; b < live.size(); ++b) {
      const Vec d = pts[a] - pts[b];
      const double d2 = d.dot(d);
      if (d2 > reach) continue;
      best = std::max(best, u.value(live[b]) - d2 / eps);
    }
    out.set_value(live[a], best);
  }
  return out;
}

double slodkowski_K(const GridFunction& u, std::size_t node, const std::vector<double>& eps_ladder, int stencil_radius) {
  if (eps_ladder.empty()) throw InvalidInput("slodkowski_K: empty eps ladder");
  const int n = u.dim();
  const Vec Du = stencil_gradient(u, node);
  const double u0 = u.value(node);
  std::vector<double> ladder = eps_ladder;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  const std::size_t tail = ladder.size() / 2;
  const auto dirs = primitive_directions(n, stencil_radius);

  double K = -std::numeric_limits<double>::infinity();
  for (std::size_t j = tail; j < ladder.size(); ++j) {
    const double eps = ladder[j];
    if (!(eps > 0.0)) throw InvalidInput("slodkowski_K: ladder entries must be positive");
    for (const Index& d : dirs) {
      const double len = std::sqrt(sq_norm(d, n));
      const long m = std::lround(eps / (u.h() * len));
      if (m < 1) continue;
      for (int s : {1, -1}) {
        Index o{};
        Vec y(n);
        for (int i = 0; i < n; ++i) {
          o[i] = static_cast<int>(s * m * d[i]);
          y[i] = s * d[i] / len;
        }
        auto k = u.neighbor(node, o);
        if (!k) continue;
        const double e = static_cast<double>(m) * u.h() * len;
        K = std::max(K, 2.0 / (e * e) * (u.value(*k) - u0 - e * Du.dot(y)));
      }
    }
  }
  if (!std::isfinite(K)) throw InvalidInput("slodkowski_K: no ladder step stays on the grid");
  return K;
}

// ---------------------------------------------------------------------------
// Comparison harness

std::string to_string(ComparisonResult::Status s) {
  switch (s) {
    case ComparisonResult::Status::Pass:
      return "pass";
    case ComparisonResult::Status::Violation:
      return "violation";
    case ComparisonResult::Status::PreconditionFailed:
      return "precondition-failed";
  }
  return "unknown";
}

std::vector<std::size_t> testable_nodes(const GridFunction& u) {
  const auto ring = offsets(u.dim(), 1);
  std::vector<std::size_t> out;
  for (std::size_t k : u.nodes(NodeTag::Interior)) {
    bool ok = true;
    for (const Index& o : ring) {
      auto nb = u.neighbor(k, o);
      if (!nb || u.tag(*nb) != NodeTag::Interior) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(k);
  }
  return out;
}

ComparisonResult comparison_harness(const GridFunction& u, const GridFunction& w, const EllipticMapSpec& M, const Dictionary& dict,
                                    double tol) {
  if (!u.same_lattice(w)) throw DimensionMismatch("comparison_harness: u and w live on different lattices");
  ComparisonResult res;
  auto precondition = [&](std::string why, std::size_t k) {
    res.status = ComparisonResult::Status::PreconditionFailed;
    res.reason = std::move(why);
    res.node = k;
    return res;
  };
  for (std::size_t k : u.nodes(NodeTag::Boundary))
    if (u.value(k) > w.value(k) + tol) return precondition("u > w at a boundary node", k);

  const EllipticMapSpec Md = M.dual();
  const GridFunction mw = -w;
  for (std::size_t k : testable_nodes(u)) {
    if (!theta_subharmonic_test(u, M, k, dict).pass) return precondition("u is not subharmonic at a node", k);
    if (!theta_subharmonic_test(mw, Md, k, dict).pass) return precondition("-w is not dual-subharmonic at a node", k);
    ++res.nodes_tested;
  }

  for (std::size_t k : u.nodes(NodeTag::Interior)) {
    if (u.value(k) <= w.value(k) + tol) continue;
    res.status = ComparisonResult::Status::Violation;
    res.reason = "u > w at an interior node";
    res.node = k;
    const GridFunction diff = u - w;
    const int n = u.dim();
    NodeBox box;
    const Index c = u.index(k);
    for (int rad = 1;; ++rad) {
      NodeBox cand;
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        cand.lo[i] = c[i] - rad;
        cand.hi[i] = c[i] + rad;
      }
      for (const Index& o : offsets(n, rad)) {
        if (!u.neighbor(k, o)) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
      box = cand;
    }
    if (box.hi[0] - box.lo[0] >= 2) {
      auto sa = subaffine_check(diff, box, tol);
      res.triple = sa.triple;
    }
    return res;
  }
  return res;
}

}  // namespace ellb
