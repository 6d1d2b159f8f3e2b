// Bounded domains Omega with a defining function rho (rho < 0 inside,
// rho = 0 on the boundary, D rho != 0 there).
#pragma once

#include <variant>
#include <vector>

#include "ellbranch/random.hpp"
#include "ellbranch/symmat.hpp"

namespace ellb {

class DomainSpec {
 public:
  /// rho = (|x - c|^2 - R^2) / 2
  struct Ball {
    Vec center;
    double radius = 1.0;
  };
  /// rho = (sum (x_i - c_i)^2 / a_i^2 - 1) / 2
  struct Ellipsoid {
    Vec center;
    Vec axes;
  };
  /// rho = max_i (|x_i - c_i| - half_i); not C^2 at edges.
  struct Box {
    Vec lo, hi;
  };
  /// rho = max((r_in^2 - |y|^2) / 2, (|y|^2 - r_out^2) / 2), y = x - c
  struct Annulus {
    Vec center;
    double inner = 0.5;
    double outer = 1.0;
  };
  using Shape = std::variant<Ball, Ellipsoid, Box, Annulus>;

  DomainSpec() : DomainSpec(Ball{Vec{0.0, 0.0}, 1.0}) {}
  explicit DomainSpec(Shape s);

  static DomainSpec ball(int n, double radius = 1.0) { return DomainSpec(Ball{Vec(n), radius}); }
  static DomainSpec unit_box(int n) { return DomainSpec(Box{Vec(n, -1.0), Vec(n, 1.0)}); }

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }
  std::string kind_name() const;

  double rho(const Vec& x) const;
  Vec grad_rho(const Vec& x) const;
  SymMat hess_rho(const Vec& x) const;
  bool contains(const Vec& x) const { return rho(x) < 0.0; }
  bool in_closure(const Vec& x, double tol = 1e-12) const { return rho(x) <= tol; }
  /// A point of the boundary associated with x (radial for round shapes, nearest face for boxes).
  Vec project(const Vec& x) const;

  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  /// Largest coordinate extent of the bounding box.
  double width() const;
  Vec centroid() const;

  Vec sample_interior(Rng& rng) const;
  Vec sample_boundary(Rng& rng) const;
  /// Deterministic boundary points spread evenly (angles for N = 2, axis/diagonal directions otherwise).
  std::vector<Vec> boundary_points(int count) const;

 private:
  Shape shape_;
  int dim_ = 0;
  Vec lo_, hi_;
};

}  // namespace ellb
