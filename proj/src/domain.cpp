#include "ellbranch/domain.hpp"

#include <numbers>

namespace ellb {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Vec radial(const Vec& y) {
  const double r = y.norm();
  return r > 0.0 ? (1.0 / r) * y : Vec::unit(y.size(), 0);
}

}  // namespace

DomainSpec::DomainSpec(Shape s) : shape_(std::move(s)) {
  std::visit(overloaded{
                 [&](const Ball& b) {
                   if (!(b.radius > 0)) throw InvalidInput("ball radius must be positive");
                   dim_ = b.center.size();
                   lo_ = b.center - Vec(dim_, b.radius);
                   hi_ = b.center + Vec(dim_, b.radius);
                 },
                 [&](const Ellipsoid& e) {
                   dim_ = e.center.size();
                   if (e.axes.size() != dim_) throw DimensionMismatch("ellipsoid axes/center dimensions differ");
                   for (double a : e.axes)
                     if (!(a > 0)) throw InvalidInput("ellipsoid axes must be positive");
                   lo_ = e.center - e.axes;
                   hi_ = e.center + e.axes;
                 },
                 [&](const Box& b) {
                   dim_ = b.lo.size();
                   if (b.hi.size() != dim_) throw DimensionMismatch("box corners differ in dimension");
                   for (int i = 0; i < dim_; ++i)
                     if (!(b.hi[i] > b.lo[i])) throw InvalidInput("box needs hi > lo on every axis");
                   lo_ = b.lo;
                   hi_ = b.hi;
                 },
                 [&](const Annulus& a) {
                   if (!(a.inner > 0 && a.outer > a.inner)) throw InvalidInput("annulus needs 0 < inner < outer");
                   dim_ = a.center.size();
                   lo_ = a.center - Vec(dim_, a.outer);
                   hi_ = a.center + Vec(dim_, a.outer);
                 },
             },
             shape_);
  if (dim_ < 1 || dim_ > kMaxDim) throw DimensionMismatch("domain dimension out of range");
}

std::string DomainSpec::kind_name() const {
  return std::visit(overloaded{[](const Ball&) { return std::string("ball"); },
                               [](const Ellipsoid&) { return std::string("ellipsoid"); },
                               [](const Box&) { return std::string("box"); },
                               [](const Annulus&) { return std::string("annulus"); }},
                    shape_);
}

double DomainSpec::rho(const Vec& x) const {
  return std::visit(overloaded{
                        [&](const Ball& b) {
                          const Vec y = x - b.center;
                          return 0.5 * (y.dot(y) - b.radius * b.radius);
                        },
                        [&](const Ellipsoid& e) {
                          double s = 0.0;
                          for (int i = 0; i < dim_; ++i) {
                            const double t = (x[i] - e.center[i]) / e.axes[i];
                            s += t * t;
                          }
                          return 0.5 * (s - 1.0);
                        },
                        [&](const Box& b) {
                          double m = -std::numeric_limits<double>::infinity();
                          for (int i = 0; i < dim_; ++i) {
                            const double c = 0.5 * (b.lo[i] + b.hi[i]), half = 0.5 * (b.hi[i] - b.lo[i]);
                            m = std::max(m, std::abs(x[i] - c) - half);
                          }
                          return m;
                        },
                        [&](const Annulus& a) {
                          const Vec y = x - a.center;
                          const double r2 = y.dot(y);
                          return std::max(0.5 * (a.inner * a.inner - r2), 0.5 * (r2 - a.outer * a.outer));
                        },
                    },
                    shape_);
}

Vec DomainSpec::grad_rho(const Vec& x) const {
  return std::visit(overloaded{
                        [&](const Ball& b) { return x - b.center; },
                        [&](const Ellipsoid& e) {
                          Vec g(dim_);
                          for (int i = 0; i < dim_; ++i) g[i] = (x[i] - e.center[i]) / (e.axes[i] * e.axes[i]);
                          return g;
                        },
                        [&](const Box& b) {
                          int best = 0;
                          double m = -std::numeric_limits<double>::infinity();
                          for (int i = 0; i < dim_; ++i) {
                            const double c = 0.5 * (b.lo[i] + b.hi[i]), half = 0.5 * (b.hi[i] - b.lo[i]);
                            const double v = std::abs(x[i] - c) - half;
                            if (v > m) {
                              m = v;
                              best = i;
                            }
                          }
                          const double c = 0.5 * (b.lo[best] + b.hi[best]);
                          return (x[best] >= c ? 1.0 : -1.0) * Vec::unit(dim_, best);
                        },
                        [&](const Annulus& a) {
                          const Vec y = x - a.center;
                          const double r2 = y.dot(y);
                          const bool inner = (a.inner * a.inner - r2) >= (r2 - a.outer * a.outer);
                          return inner ? -1.0 * y : y;
                        },
                    },
                    shape_);
}

SymMat DomainSpec::hess_rho(const Vec& x) const {
  return std::visit(overloaded{
                        [&](const Ball&) { return SymMat::identity(dim_); },
                        [&](const Ellipsoid& e) {
                          SymMat h(dim_);
                          for (int i = 0; i < dim_; ++i) h.set(i, i, 1.0 / (e.axes[i] * e.axes[i]));
                          return h;
                        },
                        [&](const Box&) { return SymMat::zero(dim_); },
                        [&](const Annulus& a) {
                          const Vec y = x - a.center;
                          const double r2 = y.dot(y);
                          const bool inner = (a.inner * a.inner - r2) >= (r2 - a.outer * a.outer);
                          return SymMat::identity(dim_, inner ? -1.0 : 1.0);
                        },
                    },
                    shape_);
}

Vec DomainSpec::project(const Vec& x) const {
  return std::visit(overloaded{
                        [&](const Ball& b) { return b.center + b.radius * radial(x - b.center); },
                        [&](const Ellipsoid& e) {
                          Vec y = x - e.center;
                          double s = 0.0;
                          for (int i = 0; i < dim_; ++i) s += (y[i] / e.axes[i]) * (y[i] / e.axes[i]);
                          if (s == 0.0) {
                            y = Vec::unit(dim_, 0);
                            s = 1.0 / (e.axes[0] * e.axes[0]);
                          }
                          return e.center + (1.0 / std::sqrt(s)) * y;
                        },
                        [&](const Box& b) {
                          Vec p = x;
                          bool inside = true;
                          for (int i = 0; i < dim_; ++i) {
                            if (p[i] <= b.lo[i] || p[i] >= b.hi[i]) inside = false;
                            p[i] = std::clamp(p[i], b.lo[i], b.hi[i]);
                          }
                          if (!inside) return p;
                          int best = 0;
                          double gap = std::numeric_limits<double>::infinity();
                          bool to_hi = false;
                          for (int i = 0; i < dim_; ++i) {
                            if (p[i] - b.lo[i] < gap) {
                              gap = p[i] - b.lo[i];
                              best = i;
                              to_hi = false;
                            }
                            if (b.hi[i] - p[i] < gap) {
                              gap = b.hi[i] - p[i];
                              best = i;
                              to_hi = true;
                            }
                          }
                          p[best] = to_hi ? b.hi[best] : b.lo[best];
                          return p;
                        },
                        [&](const Annulus& a) {
                          const Vec y = x - a.center;
                          const double r = y.norm();
                          const double target = r < 0.5 * (a.inner + a.outer) ? a.inner : a.outer;
                          return a.center + target * radial(y);
                        },
                    },
                    shape_);
}

double DomainSpec::width() const {
  double w = 0.0;
  for (int i = 0; i < dim_; ++i) w = std::max(w, hi_[i] - lo_[i]);
  return w;
}

Vec DomainSpec::centroid() const {
  Vec c = 0.5 * (lo_ + hi_);
  if (const auto* a = std::get_if<Annulus>(&shape_)) c += (0.5 * (a->inner + a->outer)) * Vec::unit(dim_, 0);
  return c;
}

Vec DomainSpec::sample_interior(Rng& rng) const {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = uniform(rng, lo_[i], hi_[i]);
    if (contains(x)) return x;
  }
  throw InvalidInput("domain sampler: could not find an interior point");
}

Vec DomainSpec::sample_boundary(Rng& rng) const {
  if (std::holds_alternative<Box>(shape_)) return project(sample_interior(rng));
  if (const auto* a = std::get_if<Annulus>(&shape_)) {
    const bool inner = uniform(rng, 0.0, a->inner + a->outer) < a->inner;
    return a->center + (inner ? a->inner : a->outer) * random_unit(rng, dim_);
  }
  return project(centroid() + random_unit(rng, dim_));
}

std::vector<Vec> DomainSpec::boundary_points(int count) const {
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const Vec c = 0.5 * (lo_ + hi_);
  if (dim_ == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / count;
      Vec d{std::cos(th), std::sin(th)};
      if (const auto* a = std::get_if<Annulus>(&shape_)) {
        pts.push_back(a->center + ((k % 2) ? a->inner : a->outer) * d);
      } else {
        // ray from the box centre: bisect on rho along c + t d
        double lo = 0.0, hi = 2.0 * width();
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
          const double mid = 0.5 * (lo + hi);
          (rho(c + mid * d) < 0.0 ? lo : hi) = mid;
        }
        pts.push_back(project(c + hi * d));
      }
    }
    return pts;
  }
  Rng rng(0x5eedULL + static_cast<unsigned>(count));
  for (int k = 0; k < count; ++k) pts.push_back(sample_boundary(rng));
  return pts;
}

}  // namespace ellb
