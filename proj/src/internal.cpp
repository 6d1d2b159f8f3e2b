#include "internal.hpp"

#include <algorithm>
#include <numeric>

namespace ellb::detail {

std::vector<SymMat> probe_matrices(int n, double cap) {
  std::vector<SymMat> out{SymMat(n)};
  for (double s : {1.0, std::sqrt(cap), cap}) {
    for (int i = 0; i < n; ++i) {
      SymMat E(n);
      E.set(i, i, -s);
      out.push_back(E);
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        SymMat D(n);
        D.set(i, i, s);
        D.set(j, j, -s);
        out.push_back(D);
      }
    }
  }
  return out;
}

std::vector<Vec> probe_points(const DomainSpec& d) {
  const Vec c = d.centroid();
  std::vector<Vec> pts{c};
  for (const Vec& b : d.boundary_points(8)) {
    const Vec p = c + 0.5 * (b - c);
    if (d.contains(p)) pts.push_back(p);
  }
  return pts;
}

std::vector<Vec> sample_points(const DomainSpec& d, Rng& rng, std::size_t count) {
  const Vec c = d.centroid();
  std::vector<Vec> pts{c};
  for (const Vec& b : d.boundary_points(8)) {
    const Vec p = c + 0.9 * (b - c);
    if (d.contains(p)) pts.push_back(p);
  }
  for (std::size_t i = 0; i < count; ++i) pts.push_back(d.sample_interior(rng));
  return pts;
}

bool is_all(const EllipticSetSpec& s) { return std::holds_alternative<EllipticSetSpec::All>(s.kind); }

SymMat phi_boundary(const EllipticSetSpec& phi, const SymMat& A) {
  if (const auto* t = std::get_if<EllipticSetSpec::Translate>(&phi.kind)) {
    if (std::holds_alternative<EllipticSetSpec::PSD>(t->base->kind)) {
      const SymMat S = A - t->offset;
      return A.shifted(-lambda_min(S));
    }
  }
  if (std::holds_alternative<EllipticSetSpec::PSD>(phi.kind)) return A.shifted(-lambda_min(A));
  auto sh = boundary_shift(phi, A);
  if (!sh) throw std::logic_error("constraint set has no boundary along the identity ray");
  return sh->inside;
}

double safe_eval(const OperatorSpec& op, const Vec& x, const SymMat& A) {
  try {
    return evaluate(op, x, A);
  } catch (const AdmissibilityError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
    if (std::abs(a[p * n + c]) < 1e-300) throw InvalidInput("singular linear system");
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[p * n + k], a[c * n + k]);
      std::swap(b[p], b[c]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = a[r * n + c] / a[c * n + c];
      if (m == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= m * a[c * n + k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

std::vector<std::array<int, kMaxDim>> offsets(int n, int radius) {
  std::vector<std::array<int, kMaxDim>> out;
  std::array<int, kMaxDim> d{};
  for (int i = 0; i < n; ++i) d[i] = -radius;
  while (true) {
    out.push_back(d);
    int i = n - 1;
    while (i >= 0 && d[i] == radius) d[i--] = -radius;
    if (i < 0) break;
    ++d[i];
  }
  return out;
}

std::vector<std::array<int, kMaxDim>> primitive_directions(int n, int radius) {
  std::vector<std::array<int, kMaxDim>> out;
  for (const auto& d : offsets(n, radius)) {
    int g = 0, first = 0;
    for (int i = 0; i < n; ++i) {
      g = std::gcd(g, std::abs(d[i]));
      if (first == 0) first = d[i];
    }
    if (g == 1 && first > 0) out.push_back(d);
  }
  // Axes first, then by increasing length, so frames and ties resolve the same way everywhere.
  std::stable_sort(out.begin(), out.end(), [n](const auto& a, const auto& b) {
    int la = 0, lb = 0;
    for (int i = 0; i < n; ++i) {
      la += a[i] * a[i];
      lb += b[i] * b[i];
    }
    return la < lb;
  });
  return out;
}

}  // namespace ellb::detail
