// Perron-style Dirichlet solver on lattices: a monotone wide-stencil scheme
// for each catalog operator, barrier subsolutions, boundary convexity and
// convergence studies.
#pragma once

#include <iosfwd>
#include <stdexcept>

#include "ellbranch/branches.hpp"
#include "ellbranch/weaksol.hpp"

namespace ellb {

/// Lattice directions of max-norm <= radius (one per antipodal pair) and the exactly
/// orthogonal frames they form.
struct Stencil {
  int dim = 2;
  int radius = 2;
  std::vector<Index> dirs;
  std::vector<Vec> units;
  std::vector<std::vector<int>> frames;
  /// For each frame and each k-subset of it: directions lying in the span of the subset.
  /// spans[k - 1] lists those direction sets for subsets of size k.
  std::vector<std::vector<std::vector<int>>> spans;
};
Stencil make_stencil(int n, int radius = 2);

/// Value of the monotone scheme G_h at an interior node: the discrete operator combined with
/// the discrete constraint (min over directions of the second difference plus e^T M e) for
/// the operators posed on a proper constraint. Directions whose arm reaches an Outside node
/// are dropped at that node.
double discrete_operator(const BranchSpec& branch, const GridFunction& u, std::size_t node, const Stencil& stencil);

struct SolverParams {
  double h = 1.0 / 16.0;
  double tol = 1e-10;        // stop when the largest nodal update falls below tol
  int max_sweeps = 200000;
  int stencil_radius = 2;
  std::uint64_t seed = 1;
  int threads = 1;
  int barrier_points = 16;
  double barrier_eps = 0.1;
  bool require_certificates = true;
};

/// Raised when a problem fails the checks required before solving.
class PreconditionError : public std::runtime_error {
 public:
  PreconditionError(const std::string& what, ojson flags) : std::runtime_error(what), flags_(std::move(flags)) {}
  const ojson& flags() const { return flags_; }

 private:
  ojson flags_;
};

struct DirichletProblem {
  BranchSpec branch;
  DomainSpec domain;
  ScalarField boundary;
  std::optional<ScalarField> reference;
  SolverParams params;
  /// Filled by certify(); perron_solve certifies on demand when empty.
  ojson flags = ojson::object();
};

/// Runs the UUSC, branch-condition, non-degeneracy and boundary-convexity checks and records
/// their verdicts in p.flags. Returns true when the three required checks did not fail.
bool certify(DirichletProblem& p, const Sampler& sampler = {256, 3, 10.0, 1e3});

struct SolveReport {
  bool converged = false;
  int sweeps = 0;
  double final_update = 0.0;
  double residual = 0.0;  // max |G_h(u)| over interior nodes
  std::vector<double> history;
  std::optional<double> max_error;
  double barrier_C = 0.0;
  bool lower_barrier_ok = false;
  bool upper_barrier_ok = false;
  std::string comparison;
  std::size_t interior_nodes = 0;
  ojson flags = ojson::object();
};
ojson to_json(const SolveReport& r);

struct SolveResult {
  GridFunction u;
  GridFunction initial;
  SolveReport report;
};

class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(const std::string& what, SolveReport r) : std::runtime_error(what), report_(std::move(r)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// Nodewise monotone relaxation from a barrier subsolution to the scheme's fixed point.
/// Throws SolveFailure after max_sweeps without convergence.
SolveResult perron_solve(const DirichletProblem& p);

std::vector<double> default_alpha_grid();
/// Boundary samples x pass when D^2 rho + alpha D rho (x) D rho is in the interior of the
/// cone associated with Theta(x) for some alpha on the grid.
ConditionReport convexity_check(const DomainSpec& domain, const EllipticMapSpec& theta, int samples = 16,
                                const std::vector<double>& alpha_grid = default_alpha_grid());

/// C (q(x) - eps |x - x0|^2), q the defining function of the domain for balls and ellipsoids and
/// of the circumscribed ball otherwise.
class Barrier {
 public:
  Barrier(const DomainSpec& domain, Vec x0, double C, double eps);
  double operator()(const Vec& x) const;
  SymMat hessian(const Vec& x) const;
  const Vec& x0() const { return x0_; }
  double C() const { return C_; }
  double eps() const { return eps_; }

 private:
  DomainSpec q_;
  Vec x0_;
  double C_, eps_;
};
/// Throws InvalidInput when eps <= 0 or C is below the certified cone radius R.
Barrier barrier(const DomainSpec& domain, const Vec& x0, double C, double eps, double R_certified = 0.0);
/// The barrier's Hessian lies in Theta(x) at every sample.
bool barrier_valid(const Barrier& b, const EllipticMapSpec& theta, const std::vector<Vec>& samples);

struct ConvergenceRow {
  double h = 0.0;
  double max_error = 0.0;
  int sweeps = 0;
  double residual = 0.0;
};
/// Solves on each h of the ladder; errors are measured against the reference field when given,
/// otherwise against the finest solve at shared nodes.
std::vector<ConvergenceRow> convergence_study(DirichletProblem p, const std::vector<double>& h_ladder);
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

}  // namespace ellb
