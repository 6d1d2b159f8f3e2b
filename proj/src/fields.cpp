#include "ellbranch/fields.hpp"

#include <numeric>

namespace ellb {
namespace {

double coord(const std::vector<double>& v, int i) { return i < static_cast<int>(v.size()) ? v[i] : 0.0; }

double poly_value(const ScalarField::Polynomial& p, const Vec& x) {
  double s = 0.0;
  for (const auto& t : p.terms) {
    double m = t.coeff;
    for (int i = 0; i < static_cast<int>(t.powers.size()); ++i) {
      if (i >= x.size()) {
        if (t.powers[i] != 0) throw DimensionMismatch("polynomial: exponent beyond point dimension");
        continue;
      }
      m *= std::pow(x[i], t.powers[i]);
    }
    s += m;
  }
  return s;
}

double table_value(const ScalarField::Table& t, const Vec& x) {
  const int n = static_cast<int>(t.shape.size());
  if (x.size() != n) throw DimensionMismatch("table: point dimension differs from table");
  std::vector<int> base(n);
  std::vector<double> frac(n);
  for (int i = 0; i < n; ++i) {
    const int cells = t.shape[i] - 1;
    double s = cells > 0 ? (x[i] - t.lo[i]) / (t.hi[i] - t.lo[i]) * cells : 0.0;
    s = std::clamp(s, 0.0, static_cast<double>(cells));
    base[i] = std::min(static_cast<int>(std::floor(s)), std::max(cells - 1, 0));
    frac[i] = s - base[i];
  }
  double out = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int i = 0; i < n; ++i) {
      const int bit = (corner >> i) & 1;
      const int idx = std::min(base[i] + bit, t.shape[i] - 1);
      w *= bit ? frac[i] : 1.0 - frac[i];
      flat = flat * static_cast<std::size_t>(t.shape[i]) + static_cast<std::size_t>(idx);
    }
    if (w != 0.0) out += w * t.values[flat];
  }
  return out;
}

void validate(const ScalarField::Kind& k) {
  if (const auto* t = std::get_if<ScalarField::Table>(&k)) {
    const std::size_t n = t->shape.size();
    if (n == 0 || t->lo.size() != n || t->hi.size() != n) throw InvalidInput("table: lo/hi/shape lengths differ");
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (t->shape[i] < 1) throw InvalidInput("table: shape entries must be positive");
      if (!(t->hi[i] > t->lo[i])) throw InvalidInput("table: hi must exceed lo");
      total *= static_cast<std::size_t>(t->shape[i]);
    }
    if (total != t->values.size()) throw InvalidInput("table: value count does not match shape");
  }
  if (const auto* q = std::get_if<ScalarField::Quadratic>(&k)) {
    for (const auto& r : q->q)
      if (r.size() != q->q.size()) throw InvalidInput("quadratic: q must be square");
  }
}

Modulus default_modulus(const ScalarField::Kind& k) {
  struct V {
    Modulus operator()(const ScalarField::Constant&) const { return {0.0, 1.0}; }
    Modulus operator()(const ScalarField::Affine& a) const {
      double s = 0.0;
      for (double g : a.gradient) s += g * g;
      return {std::sqrt(s), 1.0};
    }
    Modulus operator()(const ScalarField::Norm& n) const { return {std::abs(n.scale), 1.0}; }
    Modulus operator()(const ScalarField::Polynomial& p) const {
      // |d/dx_i m| <= |c| p_i R^(deg-1) on the box; Euclidean gradient bound via the l1 sum
      double L = 0.0;
      for (const auto& t : p.terms) {
        const int deg = std::accumulate(t.powers.begin(), t.powers.end(), 0);
        if (deg == 0) continue;
        L += std::abs(t.coeff) * deg * std::pow(p.radius, deg - 1);
      }
      return {L, 1.0};
    }
    Modulus operator()(const ScalarField::Table& t) const {
      const int n = static_cast<int>(t.shape.size());
      double L2 = 0.0;
      std::vector<std::size_t> stride(n, 1);
      for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<std::size_t>(t.shape[i + 1]);
      for (int ax = 0; ax < n; ++ax) {
        if (t.shape[ax] < 2) continue;
        const double cell = (t.hi[ax] - t.lo[ax]) / (t.shape[ax] - 1);
        double worst = 0.0;
        for (std::size_t f = 0; f < t.values.size(); ++f) {
          const std::size_t i = (f / stride[ax]) % static_cast<std::size_t>(t.shape[ax]);
          if (i + 1 >= static_cast<std::size_t>(t.shape[ax])) continue;
          worst = std::max(worst, std::abs(t.values[f + stride[ax]] - t.values[f]) / cell);
        }
        L2 += worst * worst;
      }
      return {std::sqrt(L2), 1.0};
    }
    Modulus operator()(const ScalarField::Quadratic& q) const {
      double fro = 0.0, b = 0.0;
      for (const auto& r : q.q)
        for (double v : r) fro += v * v;
      for (double v : q.b) b += v * v;
      const double radius = std::sqrt(static_cast<double>(std::max<std::size_t>(q.q.size(), 1)));
      return {std::sqrt(fro) * radius + std::sqrt(b), 1.0};
    }
  };
  return std::visit(V{}, k);
}

}  // namespace

ScalarField::ScalarField(Kind k, std::optional<Modulus> declared) : kind_(std::move(k)) {
  validate(kind_);
  declared_ = declared.has_value();
  modulus_ = declared ? *declared : default_modulus(kind_);
}

ScalarField ScalarField::quadratic(const SymMat& Q, std::vector<double> b, double c) {
  return ScalarField(Quadratic{Q.rows(), std::move(b), c});
}

double ScalarField::operator()(const Vec& x) const {
  struct V {
    const Vec& x;
    double operator()(const Constant& c) const { return c.value; }
    double operator()(const Affine& a) const {
      double s = a.offset;
      for (int i = 0; i < x.size(); ++i) s += coord(a.gradient, i) * x[i];
      return s;
    }
    double operator()(const Norm& n) const {
      double s = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        const double d = x[i] - coord(n.center, i);
        s += d * d;
      }
      return n.scale * std::sqrt(s) + n.offset;
    }
    double operator()(const Polynomial& p) const { return poly_value(p, x); }
    double operator()(const Table& t) const { return table_value(t, x); }
    double operator()(const Quadratic& q) const {
      const int n = static_cast<int>(q.q.size());
      if (n != 0 && n != x.size()) throw DimensionMismatch("quadratic: point dimension differs");
      double s = q.c;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += 0.5 * q.q[i][j] * x[i] * x[j];
      for (int i = 0; i < x.size(); ++i) s += coord(q.b, i) * x[i];
      return s;
    }
  };
  return std::visit(V{x}, kind_);
}

double ScalarField::sup_abs(int n, double radius) const {
  struct V {
    int n;
    double r;
    double operator()(const Constant& c) const { return std::abs(c.value); }
    double operator()(const Affine& a) const {
      double s = std::abs(a.offset);
      for (int i = 0; i < n; ++i) s += std::abs(coord(a.gradient, i)) * r;
      return s;
    }
    double operator()(const Norm& nm) const {
      double c2 = 0.0;
      for (int i = 0; i < n; ++i) c2 += coord(nm.center, i) * coord(nm.center, i);
      const double far = std::sqrt(c2) + r * std::sqrt(static_cast<double>(n));
      return std::abs(nm.offset) + std::abs(nm.scale) * far;
    }
    double operator()(const Polynomial& p) const {
      double s = 0.0;
      for (const auto& t : p.terms) {
        const int deg = std::accumulate(t.powers.begin(), t.powers.end(), 0);
        s += std::abs(t.coeff) * std::pow(r, deg);
      }
      return s;
    }
    double operator()(const Table& t) const {
      double s = 0.0;
      for (double v : t.values) s = std::max(s, std::abs(v));
      return s;
    }
    double operator()(const Quadratic& q) const {
      double s = std::abs(q.c);
      for (const auto& row : q.q)
        for (double v : row) s += 0.5 * std::abs(v) * r * r;
      for (double v : q.b) s += std::abs(v) * r;
      return s;
    }
  };
  return std::visit(V{n, radius}, kind_);
}

MatrixField MatrixField::entries(int dim, std::vector<ScalarField> upper) {
  if (dim < 1 || dim > kMaxDim) throw DimensionMismatch("matrix field dimension out of range");
  if (static_cast<int>(upper.size()) != dim * (dim + 1) / 2)
    throw InvalidInput("matrix field needs N(N+1)/2 upper-triangle entries");
  return MatrixField(Entries{dim, std::move(upper)});
}

int MatrixField::dim() const {
  if (const auto* c = std::get_if<Constant>(&kind_)) return c->value.dim();
  return std::get<Entries>(kind_).dim;
}

SymMat MatrixField::operator()(const Vec& x) const {
  if (const auto* c = std::get_if<Constant>(&kind_)) return c->value;
  const auto& e = std::get<Entries>(kind_);
  SymMat m(e.dim);
  std::size_t k = 0;
  for (int i = 0; i < e.dim; ++i)
    for (int j = i; j < e.dim; ++j) m.set(i, j, e.upper[k++](x));
  return m;
}

Modulus MatrixField::modulus() const {
  if (std::holds_alternative<Constant>(kind_)) return {0.0, 1.0};
  const auto& e = std::get<Entries>(kind_);
  double L = 0.0, alpha = 1.0;
  std::size_t k = 0;
  for (int i = 0; i < e.dim; ++i)
    for (int j = i; j < e.dim; ++j) {
      const Modulus m = e.upper[k++].modulus();
      L += (i == j ? 1.0 : 2.0) * m.lipschitz;
      if (m.lipschitz > 0) alpha = std::min(alpha, m.exponent);
    }
  return {L, alpha};
}

}  // namespace ellb
