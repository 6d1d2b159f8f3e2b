#include "ellbranch/random.hpp"

namespace ellb {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double log_uniform(Rng& rng, double lo, double hi) {
  if (!(lo > 0.0 && hi >= lo)) throw InvalidInput("log_uniform: need 0 < lo <= hi");
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

Vec random_unit(Rng& rng, int n) {
  for (;;) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    const double r = v.norm();
    if (r > 1e-12) return (1.0 / r) * v;
  }
}

SymMat random_symmat(Rng& rng, int n, double norm) {
  SymMat m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set(i, j, normal(rng));
  const double s = opnorm(m);
  return s > 0.0 ? (norm / s) * m : m;
}

Frame random_rotation(Rng& rng, int n) {
  Frame q;
  q.n = n;
  for (int c = 0; c < n; ++c) {
    for (;;) {
      Vec v(n);
      for (int i = 0; i < n; ++i) v[i] = normal(rng);
      for (int p = 0; p < c; ++p) v -= v.dot(q.cols[p]) * q.cols[p];
      const double r = v.norm();
      if (r > 1e-8) {
        q.cols[c] = (1.0 / r) * v;
        break;
      }
    }
  }
  return q;
}

SymMat conjugate(const Frame& q, const Vec& d) {
  SymMat m(q.n);
  for (int c = 0; c < q.n; ++c) m += d[c] * outer(q.cols[c], q.cols[c]);
  return m;
}

SymMat random_psd(Rng& rng, int n, double norm) {
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = uniform(rng, 0.0, norm);
  return conjugate(random_rotation(rng, n), d);
}

}  // namespace ellb
