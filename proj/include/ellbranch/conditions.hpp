// Sampled certification and falsification of structural conditions on F.
#pragma once

#include "ellbranch/branches.hpp"

namespace ellb {

/// F(y, A + eps I) >= F(x, A) for A in Phi(x), |x - y| < delta. Searches delta_grid for the largest
/// passing level at the sampler cap and at cap/10; fails when no level passes or when the level
/// shrinks as the cap grows. eps must lie in (0, eps_star].
ConditionReport ucf_check(const OperatorSpec& op, const EllipticMapSpec& phi, double eps, const Sampler& sampler,
                          double eps_star = std::numeric_limits<double>::infinity(), int levels = 20);
/// Single delta level of ucf_check.
ConditionReport ucf_check_at(const OperatorSpec& op, const EllipticMapSpec& phi, double eps, double delta, const Sampler& sampler);
/// True when a stored UCF witness still violates the inequality.
bool replay_ucf(const OperatorSpec& op, double eps, const Witness& w);

enum class GKind { Det, LambdaK, Trace };
struct GDescriptor {
  GKind kind = GKind::Det;
  int k = 1;
};
double g_value(const GDescriptor& g, const SymMat& A);

/// Sampled infimum of G(A + rI) - G(A) over A in phi (norm up to sampler.cap).
double gntd_estimate(const GDescriptor& g, const EllipticSetSpec& phi, double r, const Sampler& sampler,
                     double r_star = std::numeric_limits<double>::infinity());

/// Both 2N x 2N block inequalities of the classical structure condition, within tol * (1 + 3 alpha).
bool caba2_admissible(const SymMat& A, const SymMat& B, double alpha, double tol = kDefaultTol);

/// Runs the classical-condition counterexample along x_n = (r_n, 0) for the given radii.
/// Requires a 2-D PerturbedMA operator with M(x) = diag(|x|, 0). The report fails (classical
/// condition falsified) when every pair is admissible and the gap never drops below 1/sqrt(2) - 1e-9
/// while the modulus argument decreases.
ConditionReport classical_falsify(const OperatorSpec& op, const std::vector<double>& radii);
std::vector<double> default_falsify_radii();
OperatorSpec classical_counterexample_operator(const ScalarField& f = ScalarField::constant(0.0));

/// lambda_N(A + B) >= -tol for A in Theta(x), B in the dual of Theta(x).
ConditionReport sum_duals_check(const EllipticMapSpec& M, const Sampler& sampler, double eps = kDefaultMargin, double tol = 1e-6);

}  // namespace ellb
