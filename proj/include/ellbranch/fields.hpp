// Closed-form coefficient descriptors f(x), M(x), a(x) and boundary data.
// Each descriptor carries a modulus of continuity omega(r) so the structural
// checks can reason about |f(x) - f(y)| without sampling f itself.
#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "ellbranch/symmat.hpp"

namespace ellb {

/// Declared modulus omega(r) = L * r^alpha.
struct Modulus {
  double lipschitz = 0.0;
  double exponent = 1.0;
  double operator()(double r) const { return lipschitz * std::pow(r, exponent); }
};

class ScalarField {
 public:
  struct Constant {
    double value = 0.0;
  };
  struct Affine {
    double offset = 0.0;
    std::vector<double> gradient;
  };
  /// scale * |x - center| + offset
  struct Norm {
    double scale = 1.0;
    double offset = 0.0;
    std::vector<double> center;
  };
  struct Monomial {
    double coeff = 0.0;
    std::vector<int> powers;
  };
  /// sum of monomials; modulus is a Lipschitz bound on the box [-radius, radius]^N
  struct Polynomial {
    std::vector<Monomial> terms;
    double radius = 1.0;
  };
  /// Multilinear interpolation on a tensor grid over [lo, hi]; clamped outside.
  struct Table {
    std::vector<double> lo, hi;
    std::vector<int> shape;
    std::vector<double> values;  // row-major, last axis fastest
  };
  /// u(x) = 0.5 x^T Q x + b.x + c
  struct Quadratic {
    std::vector<std::vector<double>> q;
    std::vector<double> b;
    double c = 0.0;
  };
  using Kind = std::variant<Constant, Affine, Norm, Polynomial, Table, Quadratic>;

  ScalarField() : kind_(Constant{}) {}
  explicit ScalarField(Kind k, std::optional<Modulus> declared = std::nullopt);

  static ScalarField constant(double c) { return ScalarField(Constant{c}); }
  static ScalarField affine(double offset, std::vector<double> grad) { return ScalarField(Affine{offset, std::move(grad)}); }
  static ScalarField norm(double scale = 1.0, double offset = 0.0, std::vector<double> center = {}) {
    return ScalarField(Norm{scale, offset, std::move(center)});
  }
  static ScalarField quadratic(const SymMat& Q, std::vector<double> b, double c);

  double operator()(const Vec& x) const;
  Modulus modulus() const { return modulus_; }
  const Kind& kind() const { return kind_; }
  bool has_declared_modulus() const { return declared_; }
  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
  /// sup |f| over the box [-radius, radius]^N; exact for the simple kinds, a bound otherwise.
  double sup_abs(int n, double radius) const;

 private:
  Kind kind_;
  Modulus modulus_;
  bool declared_ = false;
};

class MatrixField {
 public:
  struct Constant {
    SymMat value;
  };
  /// Upper-triangle entries, row-major: (0,0),(0,1),...,(0,n-1),(1,1),...
  struct Entries {
    int dim = 0;
    std::vector<ScalarField> upper;
  };
  using Kind = std::variant<Constant, Entries>;

  MatrixField() = default;
  explicit MatrixField(Kind k) : kind_(std::move(k)) {}
  static MatrixField constant(const SymMat& m) { return MatrixField(Constant{m}); }
  static MatrixField entries(int dim, std::vector<ScalarField> upper);

  int dim() const;
  SymMat operator()(const Vec& x) const;
  /// Modulus bound for the operator norm, via the entrywise Frobenius bound.
  Modulus modulus() const;
  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
  const Kind& kind() const { return kind_; }

 private:
  Kind kind_ = Constant{SymMat(1)};
};

}  // namespace ellb
