// Elliptic subsets of S(N), their duals and associated cones, and elliptic
// maps x -> Theta(x) over a domain.
#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "ellbranch/domain.hpp"
#include "ellbranch/operators.hpp"
#include "ellbranch/report.hpp"

namespace ellb {

inline constexpr double kDefaultMargin = 1e-6;
inline constexpr double kShiftStepTol = 1e-10;

struct EllipticSetSpec;
using SetPtr = std::shared_ptr<const EllipticSetSpec>;
using OpPtr = std::shared_ptr<const OperatorSpec>;

struct EllipticSetSpec {
  /// lambda_1 >= 0
  struct PSD {};
  /// lambda_N >= 0
  struct DualPSD {};
  /// lambda_k >= 0
  struct Pk {
    int k = 1;
  };
  /// {A in phi : F(x, A) >= 0}
  struct SublevelBranch {
    OpPtr op;
    Vec x;
    SetPtr phi;
  };
  /// {tr(a A) >= c}, a >= 0 nonzero
  struct HalfSpaceLinear {
    SymMat a;
    double c = 0.0;
  };
  /// intersection
  struct Truncated {
    SetPtr first, second;
  };
  /// base + offset
  struct Translate {
    SetPtr base;
    SymMat offset;
  };
  struct Union {
    SetPtr first, second;
  };
  /// [-(base)°]^c with interiority tested at margin eps
  struct Dual {
    SetPtr base;
    double eps = kDefaultMargin;
  };
  /// all of S(N); only valid as a constraint, never as a branch
  struct All {};
  using Kind = std::variant<PSD, DualPSD, Pk, SublevelBranch, HalfSpaceLinear, Truncated, Translate, Union, Dual, All>;

  int dim = 2;
  Kind kind = PSD{};
  double tol = kDefaultTol;
  /// contains(tI) for all t >= t_nonempty
  std::optional<double> t_nonempty;
  /// !contains(-tI) for all t >= t_proper
  std::optional<double> t_proper;

  std::string kind_name() const;
};

// Factories. Each returns a set whose witnesses t_nonempty / t_proper are filled.
EllipticSetSpec psd(int n, double tol = kDefaultTol);
EllipticSetSpec dual_psd(int n, double tol = kDefaultTol);
EllipticSetSpec pk(int n, int k, double tol = kDefaultTol);
EllipticSetSpec half_space(const SymMat& a, double c, double tol = kDefaultTol);
EllipticSetSpec truncated(const EllipticSetSpec& a, const EllipticSetSpec& b);
EllipticSetSpec set_union(const EllipticSetSpec& a, const EllipticSetSpec& b);
EllipticSetSpec translate(const EllipticSetSpec& base, const SymMat& offset);
EllipticSetSpec sublevel(OpPtr op, const Vec& x, const EllipticSetSpec& phi);
EllipticSetSpec whole_space(int n);

/// Computes and stores t_nonempty and t_proper; throws InvalidInput when the set is empty or all of S(N).
EllipticSetSpec certify_set(EllipticSetSpec s);

bool contains(const EllipticSetSpec& S, const SymMat& A);
/// A - eps I in S, certifying A in the interior.
bool interior_contains(const EllipticSetSpec& S, const SymMat& A, double eps = kDefaultMargin);
/// -A not in the interior of S.
bool dual_contains(const EllipticSetSpec& S, const SymMat& A, double eps = kDefaultMargin);
/// A + eps I in S.
bool enlarge_contains(const EllipticSetSpec& S, const SymMat& A, double eps);

/// Closed-form dual when known (PSD, DualPSD, Pk, HalfSpace, Translate, Truncated), else nullopt.
std::optional<EllipticSetSpec> closed_form_dual(const EllipticSetSpec& S);
/// Closed form if available, otherwise the margin-eps Dual wrapper.
EllipticSetSpec dual(const EllipticSetSpec& S, double eps = kDefaultMargin);

/// Point where the line B + tI crosses the boundary of S.
struct BoundaryShift {
  double t = 0.0;  // B + tI in S
  SymMat inside;   // B + tI
  SymMat outside;  // B + (t - step) I, not in S
};
/// Bisection on t to step tolerance; nullopt if no bracket is found within |t| <= 1e15.
std::optional<BoundaryShift> boundary_shift(const EllipticSetSpec& S, const SymMat& B, double step_tol = kShiftStepTol);

/// Operator-norm distance from A to S, exact for elliptic S: min{t >= 0 : A + tI in S}.
double distance_to(const SymMat& A, const EllipticSetSpec& S);

/// Sampled lower bound for the Hausdorff distance restricted to the ball of radius sampler.radius.
/// Returns +infinity when the estimate exceeds radius / 2.
double hausdorff_estimate(const EllipticSetSpec& S1, const EllipticSetSpec& S2, const Sampler& sampler);

struct ConeResult {
  bool inside = false;
  double eps = 0.0;  // margin that certified membership
  double R = 0.0;    // start of the tested ray tail
};
std::vector<double> default_eps_grid();
inline constexpr double kDefaultConeCap = 1e6;
ConeResult cone_test(const EllipticSetSpec& S, const SymMat& A, const std::vector<double>& eps_grid = default_eps_grid(),
                     double C_max = kDefaultConeCap);
/// A in the interior of the cone associated with S.
bool cone_contains(const EllipticSetSpec& S, const SymMat& A, const std::vector<double>& eps_grid = default_eps_grid(),
                   double C_max = kDefaultConeCap);

// ---------------------------------------------------------------------------
// Elliptic maps

struct MapRule;
using RulePtr = std::shared_ptr<const MapRule>;

struct MapRule {
  struct Constant {
    EllipticSetSpec set;
  };
  /// {A in phi(x) : F(x, A) >= 0}
  struct Branch {
    OpPtr op;
    RulePtr phi;
  };
  /// base(x) + sign * offset(x)
  struct Translate {
    RulePtr base;
    MatrixField offset;
    double sign = 1.0;
  };
  /// {tr(a(x) A) >= c(x)}
  struct HalfSpace {
    MatrixField a;
    ScalarField c;
  };
  struct Intersect {
    RulePtr first, second;
  };
  struct Dual {
    RulePtr base;
    double eps = kDefaultMargin;
  };
  using Kind = std::variant<Constant, Branch, Translate, HalfSpace, Intersect, Dual>;
  Kind kind;
};

class EllipticMapSpec {
 public:
  EllipticMapSpec(DomainSpec domain, RulePtr rule, int dim);
  static EllipticMapSpec constant(DomainSpec domain, const EllipticSetSpec& set);

  const DomainSpec& domain() const { return domain_; }
  const RulePtr& rule() const { return rule_; }
  int dim() const { return dim_; }
  EllipticSetSpec at(const Vec& x) const;
  /// Pointwise dual map.
  EllipticMapSpec dual(double eps = kDefaultMargin) const;

 private:
  DomainSpec domain_;
  RulePtr rule_;
  int dim_;
};

EllipticSetSpec evaluate_rule(const MapRule& rule, const Vec& x, int dim);

/// Delta levels {2^-1, ..., 2^-levels} * width(Omega), largest first.
std::vector<double> delta_grid(const DomainSpec& d, int levels = 20);

/// Samples |x - y| < delta and A in Theta(x) (boundary-shift sampling, |B| up to sampler.cap);
/// checks A + eps I in Theta(y) in both directions. Passing is reported as PassUpToCap.
ConditionReport uusc_check(const EllipticMapSpec& M, double eps, double delta, const Sampler& sampler);
/// Largest passing delta on delta_grid; fails when no level passes or when the certified delta
/// shrinks as the cap grows from cap/10 to cap.
ConditionReport uusc_certify(const EllipticMapSpec& M, double eps, const Sampler& sampler, int levels = 20);
/// True when a stored uusc witness still violates A + eps I in Theta(y).
bool replay_uusc(const EllipticMapSpec& M, double eps, const Witness& w);

/// Membership in the boundary limit set at x0: A + eps I in Theta(x_int), x_int the interior
/// point at distance delta/2 along the inward normal.
bool extend_to_closure(const EllipticMapSpec& M, const Vec& x0, const SymMat& A, double eps, double delta);

}  // namespace ellb
