// Catalog of second-order operators F(x, A).
#pragma once

#include <string>
#include <variant>

#include "ellbranch/fields.hpp"

namespace ellb {

class AdmissibilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct OperatorSpec {
  /// det A - f(x), on the constraint A >= 0
  struct MongeAmpere {
    ScalarField f;
  };
  /// det(A + M(x))^(1/N) - f(x), on the constraint A + M(x) >= 0
  struct PerturbedMA {
    MatrixField M;
    ScalarField f;
  };
  /// lambda_k(A) - f(x)
  struct KthEigenvalue {
    int k = 1;
    ScalarField f;
  };
  /// inf { tr(beta A) : spec(beta) in [lambda, Lambda] } - f(x)
  struct PucciMinus {
    double lambda = 1.0;
    double Lambda = 1.0;
    ScalarField f;
  };
  /// tr(a(x) A) - f(x)
  struct LinearTrace {
    MatrixField a;
    ScalarField f;
  };
  /// min{ tr(a(x) A) - f(x), M^-_{lambda/2, Lambda}(A) + h }
  struct TruncatedLinear {
    MatrixField a;
    ScalarField f;
    double lambda = 1.0;
    double Lambda = 1.0;
    double h = 1.0;
  };
  /// inf over det(beta) = N^-N of tr(beta (A + M(x))) - f(x); evaluated in closed form
  struct BellmanMA {
    MatrixField M;
    ScalarField f;
  };
  using Kind = std::variant<MongeAmpere, PerturbedMA, KthEigenvalue, PucciMinus, LinearTrace, TruncatedLinear, BellmanMA>;

  int dim = 2;
  Kind kind;
  double tol = kDefaultTol;

  std::string name() const;
  const ScalarField& f() const;
};

/// F(x, A). PerturbedMA and BellmanMA throw AdmissibilityError when lambda_1(A + M(x)) < -tol.
double evaluate(const OperatorSpec& op, const Vec& x, const SymMat& A);

/// Pucci minimal operator: lambda * sum of positive eigenvalues + Lambda * sum of negative ones.
double pucci_minus(const SymMat& A, double lambda, double Lambda);

/// Product of clamped eigenvalues of A raised to 1/N; requires lambda_1(A) >= -tol.
double det_root(const SymMat& A, double tol = kDefaultTol);

/// Offset O(x) with natural constraint Phi(x) = O(x) + PSD, or nullopt when the natural constraint is all of S(N).
std::optional<SymMat> constraint_offset(const OperatorSpec& op, const Vec& x);

}  // namespace ellb
