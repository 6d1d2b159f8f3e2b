#include "ellbranch/symmat.hpp"

#include <sstream>

namespace ellb {

double det(const SymMat& A) {
  if (!A.is_finite()) throw InvalidInput("det: non-finite matrix entry");
  const int n = A.dim();
  double m[kMaxDim][kMaxDim];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = A(i, j);
  double d = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(m[piv][j], m[c][j]);
      d = -d;
    }
    d *= m[c][c];
    for (int r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int j = c; j < n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return d;
}

SymMat outer(const Vec& v, const Vec& w) {
  if (v.size() != w.size()) throw DimensionMismatch("outer: vector dimensions differ");
  SymMat m(v.size());
  for (int i = 0; i < v.size(); ++i)
    for (int j = 0; j < v.size(); ++j) m.at(i, j) = 0.5 * (v[i] * w[j] + w[i] * v[j]);
  return m;
}

TraceParts trace_parts(const SymMat& A) {
  TraceParts t;
  for (double l : eigenvalues(A)) {
    if (l > 0) t.positive += l;
    else t.negative -= l;
  }
  return t;
}

std::string to_string(const SymMat& A) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (int i = 0; i < A.dim(); ++i) {
    os << (i ? ",[" : "[");
    for (int j = 0; j < A.dim(); ++j) os << (j ? "," : "") << A(i, j);
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace ellb
