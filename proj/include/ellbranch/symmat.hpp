// Small dense symmetric matrices and the primitive spectral operations used
// throughout the library. Dimensions are tiny (N <= 4 for Hessians, 2N for
// the block matrices of the structure-condition checks), so everything is
// stack allocated and eigenvalues come from cyclic Jacobi rotations.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ellb {

inline constexpr int kMaxDim = 4;
inline constexpr double kDefaultTol = 1e-9;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fixed-capacity real vector; used for points of R^N and eigenvectors.
template <int MaxN>
class BasicVec {
 public:
  BasicVec() = default;
  explicit BasicVec(int n, double fill = 0.0) : n_(n) {
    if (n < 0 || n > MaxN) throw DimensionMismatch("vector dimension out of range");
    std::fill_n(v_.begin(), n, fill);
  }
  BasicVec(std::initializer_list<double> xs) : BasicVec(std::span<const double>(xs.begin(), xs.size())) {}
  explicit BasicVec(std::span<const double> xs) : n_(static_cast<int>(xs.size())) {
    if (n_ > MaxN) throw DimensionMismatch("vector dimension out of range");
    std::copy(xs.begin(), xs.end(), v_.begin());
  }

  static BasicVec unit(int n, int i) {
    BasicVec e(n);
    e[i] = 1.0;
    return e;
  }

  int size() const { return n_; }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  const double* begin() const { return v_.data(); }
  const double* end() const { return v_.data() + n_; }
  std::vector<double> to_vector() const { return {begin(), end()}; }

  double dot(const BasicVec& o) const {
    check_same(o);
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += v_[i] * o.v_[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }

  BasicVec& operator+=(const BasicVec& o) {
    check_same(o);
    for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  BasicVec& operator-=(const BasicVec& o) {
    check_same(o);
    for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  BasicVec& operator*=(double s) {
    for (int i = 0; i < n_; ++i) v_[i] *= s;
    return *this;
  }
  friend BasicVec operator+(BasicVec a, const BasicVec& b) { return a += b; }
  friend BasicVec operator-(BasicVec a, const BasicVec& b) { return a -= b; }
  friend BasicVec operator*(double s, BasicVec a) { return a *= s; }
  friend BasicVec operator*(BasicVec a, double s) { return a *= s; }
  friend bool operator==(const BasicVec& a, const BasicVec& b) {
    return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
  }

 private:
  void check_same(const BasicVec& o) const {
    if (o.n_ != n_) throw DimensionMismatch("vector dimensions differ");
  }
  std::array<double, MaxN> v_{};
  int n_ = 0;
};

/// Real symmetric matrix of dimension n <= MaxN. Every constructor that takes
/// raw entries stores the symmetric part (A + A^T) / 2.
template <int MaxN>
class BasicSymMat {
 public:
  using Vector = BasicVec<MaxN>;

  BasicSymMat() = default;
  explicit BasicSymMat(int n) : n_(n) {
    if (n < 1 || n > MaxN) throw DimensionMismatch("matrix dimension must lie in [1, " + std::to_string(MaxN) + "]");
  }

  static BasicSymMat zero(int n) { return BasicSymMat(n); }
  static BasicSymMat identity(int n, double s = 1.0) {
    BasicSymMat m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = s;
    return m;
  }
  static BasicSymMat diag(std::span<const double> d) {
    BasicSymMat m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n_; ++i) m.at(i, i) = d[i];
    return m;
  }
  static BasicSymMat diag(std::initializer_list<double> d) { return diag(std::span<const double>(d.begin(), d.size())); }

  static BasicSymMat from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    BasicSymMat m(n);
    for (const auto& r : rows)
      if (static_cast<int>(r.size()) != n) throw DimensionMismatch("matrix rows must form a square array");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m.at(i, j) = 0.5 * (rows[i][j] + rows[j][i]);
    return m;
  }
  static BasicSymMat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> r;
    for (const auto& row : rows) r.emplace_back(row);
    return from_rows(r);
  }

  int dim() const { return n_; }
  double operator()(int i, int j) const { return a_[idx(i, j)]; }
  void set(int i, int j, double v) {
    at(i, j) = v;
    at(j, i) = v;
  }
  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> r(n_, std::vector<double>(n_));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r[i][j] = (*this)(i, j);
    return r;
  }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }
  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }
  bool is_finite() const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (!std::isfinite((*this)(i, j))) return false;
    return true;
  }

  /// tr(A B) for symmetric A, B.
  double inner(const BasicSymMat& o) const {
    check_same(o);
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * o(i, j);
    return s;
  }
  /// <A v, v>
  double quad(const Vector& v) const {
    if (v.size() != n_) throw DimensionMismatch("vector/matrix dimensions differ");
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * v[i] * v[j];
    return s;
  }
  Vector apply(const Vector& v) const {
    if (v.size() != n_) throw DimensionMismatch("vector/matrix dimensions differ");
    Vector r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  BasicSymMat& operator+=(const BasicSymMat& o) {
    check_same(o);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) at(i, j) += o(i, j);
    return *this;
  }
  BasicSymMat& operator-=(const BasicSymMat& o) {
    check_same(o);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) at(i, j) -= o(i, j);
    return *this;
  }
  BasicSymMat& operator*=(double s) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) at(i, j) *= s;
    return *this;
  }
  /// A + s I
  BasicSymMat shifted(double s) const {
    BasicSymMat m = *this;
    for (int i = 0; i < n_; ++i) m.at(i, i) += s;
    return m;
  }
  friend BasicSymMat operator+(BasicSymMat a, const BasicSymMat& b) { return a += b; }
  friend BasicSymMat operator-(BasicSymMat a, const BasicSymMat& b) { return a -= b; }
  friend BasicSymMat operator-(BasicSymMat a) { return a *= -1.0; }
  friend BasicSymMat operator*(double s, BasicSymMat a) { return a *= s; }
  friend BasicSymMat operator*(BasicSymMat a, double s) { return a *= s; }
  friend bool operator==(const BasicSymMat& a, const BasicSymMat& b) {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      for (int j = 0; j < a.n_; ++j)
        if (a(i, j) != b(i, j)) return false;
    return true;
  }

  double& at(int i, int j) { return a_[idx(i, j)]; }

 private:
  static constexpr std::size_t idx(int i, int j) { return static_cast<std::size_t>(i * MaxN + j); }
  void check_same(const BasicSymMat& o) const {
    if (o.n_ != n_) throw DimensionMismatch("matrix dimensions differ");
  }
  std::array<double, MaxN * MaxN> a_{};
  int n_ = 0;
};

using Vec = BasicVec<kMaxDim>;
using SymMat = BasicSymMat<kMaxDim>;
/// 2N x 2N matrices for the block inequalities of the classical structure condition.
using BlockSymMat = BasicSymMat<2 * kMaxDim>;

template <int MaxN>
struct BasicEigDecomp {
  BasicVec<MaxN> values;                  // ascending
  std::array<BasicVec<MaxN>, MaxN> frame; // frame[i] is the unit eigenvector of values[i]
};
using EigDecomp = BasicEigDecomp<kMaxDim>;

/// Cyclic Jacobi eigen-solver. Deterministic: the rotation sequence depends
/// only on the input entries.
template <int MaxN>
BasicEigDecomp<MaxN> eigs(const BasicSymMat<MaxN>& A) {
  if (!A.is_finite()) throw InvalidInput("eigs: non-finite matrix entry");
  const int n = A.dim();
  BasicSymMat<MaxN> a = A;
  BasicSymMat<MaxN> v = BasicSymMat<MaxN>::identity(n);  // columns accumulate eigenvectors
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));

  for (int sweep = 0; sweep < 64 && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-17 * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, MaxN> order{};
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.begin() + n, [&](int i, int j) { return a(i, i) < a(j, j); });

  BasicEigDecomp<MaxN> out;
  out.values = BasicVec<MaxN>(n);
  for (int r = 0; r < n; ++r) {
    const int c = order[r];
    out.values[r] = a(c, c);
    out.frame[r] = BasicVec<MaxN>(n);
    for (int k = 0; k < n; ++k) out.frame[r][k] = v(k, c);
  }
  return out;
}

template <int MaxN>
BasicVec<MaxN> eigenvalues(const BasicSymMat<MaxN>& A) {
  return eigs(A).values;
}

/// k-th smallest eigenvalue, 1-based as in lambda_1 <= ... <= lambda_N.
template <int MaxN>
double lambda(const BasicSymMat<MaxN>& A, int k) {
  if (k < 1 || k > A.dim()) throw InvalidInput("lambda: index out of range");
  return eigenvalues(A)[k - 1];
}
template <int MaxN>
double lambda_min(const BasicSymMat<MaxN>& A) {
  return lambda(A, 1);
}
template <int MaxN>
double lambda_max(const BasicSymMat<MaxN>& A) {
  return lambda(A, A.dim());
}

/// max_i |lambda_i(A)|
template <int MaxN>
double opnorm(const BasicSymMat<MaxN>& A) {
  const auto ev = eigenvalues(A);
  return std::max(std::abs(ev[0]), std::abs(ev[A.dim() - 1]));
}

/// Determinant via Gaussian elimination with partial pivoting.
double det(const SymMat& A);

/// (v w^T + w v^T) / 2
SymMat outer(const Vec& v, const Vec& w);

/// A >= B in the Loewner order, up to tol.
inline bool loewner_geq(const SymMat& A, const SymMat& B, double tol = kDefaultTol) {
  return lambda_min(A - B) >= -tol;
}

/// Positive and negative parts tr[A^+], tr[A^-] (both nonnegative).
struct TraceParts {
  double positive = 0.0;
  double negative = 0.0;
};
TraceParts trace_parts(const SymMat& A);

std::string to_string(const SymMat& A);

}  // namespace ellb
