// Grid functions and the weak notions built on them: subaffinity, pointwise
// Theta-subharmonicity tests, sup-convolution, Slodkowski's K and a
// comparison harness.
#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ellbranch/ellset.hpp"

namespace ellb {

/// Stand-in for -infinity at outside nodes. Arithmetic on it saturates via saturate().
inline constexpr double kMinusInf = -1e30;
inline double saturate(double v) { return v < kMinusInf ? kMinusInf : v; }

enum class NodeTag : char { Interior = 'I', Boundary = 'B', Outside = 'O' };

using Index = std::array<int, kMaxDim>;

/// Values on the lattice h * Z^N restricted to a bounding box. Nodes are tagged interior
/// (inside Omega), boundary (outside Omega but adjacent to an interior node) or outside.
class GridFunction {
 public:
  enum class BoundaryValues { AtNode, AtProjection };

  GridFunction() = default;
  /// Box of nodes lo[i] <= idx[i] < lo[i] + shape[i]; every node starts as Outside.
  GridFunction(int n, double h, Index lo, Index shape);

  /// Lattice covering the domain with one layer of margin and tags from the domain.
  static GridFunction on_domain(const DomainSpec& d, double h);
  /// Samples fn at interior nodes and at boundary nodes (at the node or at its projection onto the boundary).
  static GridFunction sample(const DomainSpec& d, double h, const std::function<double(const Vec&)>& fn,
                             BoundaryValues mode = BoundaryValues::AtNode);

  int dim() const { return n_; }
  double h() const { return h_; }
  const Index& lo() const { return lo_; }
  const Index& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }

  Index index(std::size_t node) const;
  std::optional<std::size_t> find(const Index& idx) const;
  /// Node reached from `node` by an integer offset, if it exists and is not Outside.
  std::optional<std::size_t> neighbor(std::size_t node, const Index& offset) const;
  std::optional<std::size_t> nearest(const Vec& x) const;
  Vec point(std::size_t node) const;

  NodeTag tag(std::size_t node) const { return tags_[node]; }
  void set_tag(std::size_t node, NodeTag t);
  double value(std::size_t node) const { return values_[node]; }
  void set_value(std::size_t node, double v);
  const std::vector<double>& values() const { return values_; }
  std::vector<std::size_t> nodes(NodeTag t) const;
  bool same_lattice(const GridFunction& o) const;

  GridFunction transformed(const std::function<double(const Vec&, double)>& fn) const;
  GridFunction operator-() const;
  friend GridFunction operator-(const GridFunction& a, const GridFunction& b);

  /// CSV with header x1,...,xN,mask,value; values written with 17 significant digits.
  void write_csv(std::ostream& os) const;
  static GridFunction read_csv(std::istream& is);

 private:
  int n_ = 0;
  double h_ = 0.0;
  Index lo_{}, shape_{}, stride_{};
  std::vector<NodeTag> tags_;
  std::vector<double> values_;
};

/// Central second differences along axes and mixed diagonals.
SymMat stencil_hessian(const GridFunction& u, std::size_t node);
Vec stencil_gradient(const GridFunction& u, std::size_t node);

/// Witness that u - a has a strict interior maximum: (u - a)(x0) = 0 and
/// (u - a)(x) <= -eps |x - x0|^2 on lattice nodes within distance r of x0.
struct ContactTriple {
  std::size_t node = 0;
  Vec x0;
  double eps = 0.0;
  double r = 0.0;
  Vec slope;
  double intercept = 0.0;
  /// Hessian of the touching quadratic a(x) - eps |x - x0|^2.
  SymMat hessian;

  double affine(const Vec& x) const { return slope.dot(x) + intercept; }
};
bool replay_contact(const GridFunction& u, const ContactTriple& t, double tol = 1e-9);

struct NodeBox {
  Index lo{}, hi{};  // inclusive
};
struct SubaffineResult {
  bool pass = true;
  std::optional<ContactTriple> triple;
  std::size_t boxes = 0;
  std::size_t affines = 0;
};
/// Maximum principle against affine functions on a dyadic family of sub-boxes of `region`.
SubaffineResult subaffine_check(const GridFunction& u, const NodeBox& region, double tol = 1e-9);
/// The whole node box of u.
NodeBox full_box(const GridFunction& u);

/// Quadratic test functions used at a node. The size of the dictionary is the completeness knob.
struct Dictionary {
  double shift = 0.05;      // multiples k * shift * I, k = -multiples..multiples
  int multiples = 3;
  int rotations = 8;        // random PSD perturbations shift * Q diag(d) Q^T, both signs
  std::uint64_t seed = 5;
  int ball_radius = 3;      // lattice ball on which touching is enforced, in units of h
  double shell = 0.0;       // membership tested as P + shell I in Theta(x0)
};
std::vector<SymMat> build_dictionary(const SymMat& center, const Dictionary& dict);

struct PointTest {
  bool pass = true;
  std::size_t contacts = 0;
  std::optional<SymMat> witness;
};
/// Every dictionary quadratic touching u from above at the node must have its Hessian in Theta(x0).
PointTest theta_subharmonic_test(const GridFunction& u, const EllipticMapSpec& M, std::size_t node, const Dictionary& dict = {});
PointTest theta_subharmonic_test(const GridFunction& u, const EllipticMapSpec& M, std::size_t node,
                                 const std::vector<SymMat>& hessians, const Dictionary& dict = {});

/// u^eps(x) = max over nodes y of u(y) - |x - y|^2 / eps; Outside nodes stay at kMinusInf.
GridFunction sup_convolution(const GridFunction& u, double eps);

/// Tail maximum over the smaller half of the ladder of
/// 2 eps^-2 max_{|y| = 1} (u(x + eps y) - u(x) - eps <Du(x), y>), y over lattice directions.
double slodkowski_K(const GridFunction& u, std::size_t node, const std::vector<double>& eps_ladder, int stencil_radius = 2);

struct ComparisonResult {
  enum class Status { Pass, Violation, PreconditionFailed };
  Status status = Status::Pass;
  std::string reason;
  std::optional<std::size_t> node;
  std::optional<ContactTriple> triple;
  std::size_t nodes_tested = 0;
};
std::string to_string(ComparisonResult::Status s);

/// Interior nodes whose axis and diagonal neighbours are all interior.
std::vector<std::size_t> testable_nodes(const GridFunction& u);

/// Checks u <= w + tol at interior nodes given u subharmonic, -w dual-subharmonic and u <= w on
/// boundary nodes. Precondition failures are reported separately from comparison failures.
ComparisonResult comparison_harness(const GridFunction& u, const GridFunction& w, const EllipticMapSpec& M,
                                    const Dictionary& dict = {}, double tol = 1e-8);

}  // namespace ellb
