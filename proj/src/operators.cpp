#include "ellbranch/operators.hpp"

namespace ellb {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_dim(const OperatorSpec& op, const SymMat& A) {
  if (A.dim() != op.dim) throw DimensionMismatch("operator dimension " + std::to_string(op.dim) + " vs matrix " + std::to_string(A.dim()));
}

double shifted_det_root(const SymMat& A, const SymMat& M, double tol) {
  const SymMat S = A + M;
  const double l1 = lambda_min(S);
  if (l1 < -tol) throw AdmissibilityError("A + M(x) is not positive semidefinite (lambda_1 = " + std::to_string(l1) + ")");
  return det_root(S, tol);
}

}  // namespace

std::string OperatorSpec::name() const {
  return std::visit(overloaded{[](const MongeAmpere&) { return std::string("MongeAmpere"); },
                               [](const PerturbedMA&) { return std::string("PerturbedMA"); },
                               [](const KthEigenvalue&) { return std::string("KthEigenvalue"); },
                               [](const PucciMinus&) { return std::string("PucciMinus"); },
                               [](const LinearTrace&) { return std::string("LinearTrace"); },
                               [](const TruncatedLinear&) { return std::string("TruncatedLinear"); },
                               [](const BellmanMA&) { return std::string("BellmanMA"); }},
                    kind);
}

const ScalarField& OperatorSpec::f() const {
  return std::visit([](const auto& k) -> const ScalarField& { return k.f; }, kind);
}

double pucci_minus(const SymMat& A, double lambda, double Lambda) {
  if (!(lambda > 0 && Lambda >= lambda)) throw InvalidInput("pucci: need 0 < lambda <= Lambda");
  double s = 0.0;
  for (double l : eigenvalues(A)) s += l > 0 ? lambda * l : Lambda * l;
  return s;
}

double det_root(const SymMat& A, double tol) {
  const auto ev = eigenvalues(A);
  if (ev[0] < -tol) throw AdmissibilityError("det_root: matrix is not positive semidefinite");
  double p = 1.0;
  for (double l : ev) p *= std::max(l, 0.0);
  return std::pow(p, 1.0 / A.dim());
}

double evaluate(const OperatorSpec& op, const Vec& x, const SymMat& A) {
  check_dim(op, A);
  return std::visit(overloaded{
                        [&](const OperatorSpec::MongeAmpere& k) { return det(A) - k.f(x); },
                        [&](const OperatorSpec::PerturbedMA& k) { return shifted_det_root(A, k.M(x), op.tol) - k.f(x); },
                        [&](const OperatorSpec::KthEigenvalue& k) { return lambda(A, k.k) - k.f(x); },
                        [&](const OperatorSpec::PucciMinus& k) { return pucci_minus(A, k.lambda, k.Lambda) - k.f(x); },
                        [&](const OperatorSpec::LinearTrace& k) { return k.a(x).inner(A) - k.f(x); },
                        [&](const OperatorSpec::TruncatedLinear& k) {
                          const double lin = k.a(x).inner(A) - k.f(x);
                          return std::min(lin, pucci_minus(A, 0.5 * k.lambda, k.Lambda) + k.h);
                        },
                        [&](const OperatorSpec::BellmanMA& k) { return shifted_det_root(A, k.M(x), op.tol) - k.f(x); },
                    },
                    op.kind);
}

std::optional<SymMat> constraint_offset(const OperatorSpec& op, const Vec& x) {
  return std::visit(overloaded{
                        [&](const OperatorSpec::MongeAmpere&) -> std::optional<SymMat> { return SymMat::zero(op.dim); },
                        [&](const OperatorSpec::PerturbedMA& k) -> std::optional<SymMat> { return -k.M(x); },
                        [&](const OperatorSpec::BellmanMA& k) -> std::optional<SymMat> { return -k.M(x); },
                        [&](const auto&) -> std::optional<SymMat> { return std::nullopt; },
                    },
                    op.kind);
}

}  // namespace ellb
