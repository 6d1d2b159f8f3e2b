// Elliptic branches Theta(x) = {A in Phi(x) : F(x, A) >= 0} built from the
// operator catalog, plus the branch and non-degeneracy checks.
#pragma once

#include "ellbranch/ellset.hpp"

namespace ellb {

class EmptyBranch : public std::invalid_argument {
 public:
  EmptyBranch(const std::string& what, Vec x) : std::invalid_argument(what), x_(std::move(x)) {}
  const Vec& point() const { return x_; }

 private:
  Vec x_;
};

class SpectrumViolation : public std::invalid_argument {
 public:
  SpectrumViolation(const std::string& what, Vec x, SymMat a)
      : std::invalid_argument(what), x_(std::move(x)), a_(std::move(a)) {}
  const Vec& point() const { return x_; }
  const SymMat& coefficient() const { return a_; }

 private:
  Vec x_;
  SymMat a_;
};

struct BranchSpec {
  OpPtr op;
  EllipticMapSpec constraint;  // Phi
  EllipticMapSpec theta;
  /// Spot-check results recorded by make_branch (e.g. whether the zero locus of F meets Phi).
  ojson flags = ojson::object();
};

/// The constraint each operator is posed on: PSD for Monge-Ampere, -M(x) + PSD for the
/// perturbed and Bellman forms, all of S(N) otherwise.
RulePtr natural_phi_rule(const OperatorSpec& op);
EllipticMapSpec natural_phi(const OperatorSpec& op, const DomainSpec& domain);

/// Builds Theta. Throws EmptyBranch if Theta(x) is empty at a sampled x and InvalidInput if F
/// fails the monotonicity spot check on Phi(x).
BranchSpec make_branch(const OperatorSpec& op, const EllipticMapSpec& phi, const Sampler& sampler = {64, 7, 10.0, 1e3});
BranchSpec make_natural_branch(const OperatorSpec& op, const DomainSpec& domain);

/// Boundary matrices of Theta(x) (bisection along the identity ray) must satisfy F(x, A) <= 0.
ConditionReport branch_condition_check(const BranchSpec& B, const Sampler& sampler);
/// F(x, A) > 0 at interior samples A = A_bdy + eps I.
ConditionReport nondegeneracy_check(const BranchSpec& B, const Sampler& sampler);

/// min over sampled beta >= 0 with det(beta) = N^-N of tr(beta (A + M)).
double bellman_MA_estimate(const SymMat& A, const SymMat& M, std::size_t samples, std::uint64_t seed);
/// min over sampled beta with spectrum in [lambda, Lambda] of tr(beta A).
double pucci_minus_sampled(const SymMat& A, double lambda, double Lambda, std::size_t samples, std::uint64_t seed);

/// Truncated linear operator min{tr(a A) - f, M^-_{lambda/2,Lambda}(A) + h}. Throws SpectrumViolation
/// when a(x) leaves [lambda, Lambda] at a sampled point of the domain.
OperatorSpec truncated_linear(const MatrixField& a, const ScalarField& f, double lambda, double Lambda, double h,
                              const DomainSpec& domain, const Sampler& sampler = {256, 11, 10.0, 1e3});

/// Samples B in Theta_h(x) + eps I and y in the domain with tr(a(y) B) - f(y) <= 1 and checks
/// tr[B^-] <= (1 + 2h + |f|) / Lambda and tr[B^+] <= (2 + 2h + 2|f|) / lambda.
ConditionReport truncated_norm_bound_check(const OperatorSpec& op, const DomainSpec& domain, double eps, const Sampler& sampler);

}  // namespace ellb
