#include "ellbranch/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "internal.hpp"
#include "toml.hpp"

namespace ellb {
namespace {

using detail::overloaded;

[[noreturn]] void bad(const std::string& what) { throw InvalidInput("config: " + what); }

const ojson& need(const ojson& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

double num(const ojson& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number()) bad(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

double num(const ojson& j, const char* key) {
  const ojson& v = need(j, key);
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

int integer(const ojson& j, const char* key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) bad(std::string("field '") + key + "' must be an integer");
  return j.at(key).get<int>();
}

std::string kind_of(const ojson& j) {
  const ojson& k = need(j, "kind");
  if (!k.is_string()) bad("'kind' must be a string");
  return k.get<std::string>();
}

std::vector<double> doubles(const ojson& j) {
  if (!j.is_array()) bad("expected an array of numbers");
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number()) bad("expected an array of numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

std::vector<int> ints(const ojson& j) {
  if (!j.is_array()) bad("expected an array of integers");
  std::vector<int> v;
  for (const auto& e : j) {
    if (!e.is_number_integer()) bad("expected an array of integers");
    v.push_back(e.get<int>());
  }
  return v;
}

std::vector<std::vector<double>> rows_of(const ojson& j) {
  if (!j.is_array()) bad("expected a row-major array of rows");
  std::vector<std::vector<double>> r;
  for (const auto& row : j) r.push_back(doubles(row));
  return r;
}

RulePtr make_rule(MapRule::Kind k) { return std::make_shared<const MapRule>(MapRule{std::move(k)}); }
SetPtr share(EllipticSetSpec s) { return std::make_shared<const EllipticSetSpec>(std::move(s)); }

EllipticSetSpec build(int dim, EllipticSetSpec::Kind k, double tol) {
  EllipticSetSpec s;
  s.dim = dim;
  s.kind = std::move(k);
  s.tol = tol;
  return certify_set(std::move(s));
}

ojson toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    ojson o = ojson::object();
    for (const auto& [k, v] : *t) o[std::string(k.str())] = toml_to_json(v);
    return o;
  }
  if (const auto* a = n.as_array()) {
    ojson o = ojson::array();
    for (const auto& v : *a) o.push_back(toml_to_json(v));
    return o;
  }
  if (const auto* v = n.as_integer()) return ojson(v->get());
  if (const auto* v = n.as_floating_point()) return ojson(v->get());
  if (const auto* v = n.as_boolean()) return ojson(v->get());
  if (const auto* v = n.as_string()) return ojson(v->get());
  bad("unsupported TOML value (dates and times are not accepted)");
}

}  // namespace

Vec vec_from_json(const ojson& j) {
  const auto v = doubles(j);
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) bad("vector length out of range");
  return Vec(std::span<const double>(v));
}

SymMat matrix_from_json(const ojson& j) {
  const auto r = rows_of(j);
  if (r.empty() || r.size() > static_cast<std::size_t>(kMaxDim)) bad("matrix dimension out of range");
  SymMat A = SymMat::from_rows(r);
  if (!A.is_finite()) bad("matrix entries must be finite");
  return A;
}

// ---------------------------------------------------------------------------

ScalarField scalar_field_from_json(const ojson& j) {
  if (j.is_number()) return ScalarField::constant(j.get<double>());
  std::optional<Modulus> mod;
  if (j.contains("modulus")) mod = Modulus{num(j.at("modulus"), "lipschitz"), num(j.at("modulus"), "exponent", 1.0)};
  const std::string k = kind_of(j);
  if (k == "constant") return ScalarField(ScalarField::Constant{num(j, "value")}, mod);
  if (k == "affine") return ScalarField(ScalarField::Affine{num(j, "offset", 0.0), doubles(need(j, "gradient"))}, mod);
  if (k == "norm") {
    return ScalarField(ScalarField::Norm{num(j, "scale", 1.0), num(j, "offset", 0.0),
                                         j.contains("center") ? doubles(j.at("center")) : std::vector<double>{}},
                       mod);
  }
  if (k == "polynomial") {
    ScalarField::Polynomial p;
    p.radius = num(j, "radius", 1.0);
    for (const auto& t : need(j, "terms")) p.terms.push_back({num(t, "coeff"), ints(need(t, "powers"))});
    return ScalarField(p, mod);
  }
  if (k == "table") {
    return ScalarField(ScalarField::Table{doubles(need(j, "lo")), doubles(need(j, "hi")), ints(need(j, "shape")), doubles(need(j, "values"))},
                       mod);
  }
  if (k == "quadratic") {
    ScalarField::Quadratic q{rows_of(need(j, "q")), j.contains("b") ? doubles(j.at("b")) : std::vector<double>{}, num(j, "c", 0.0)};
    return ScalarField(q, mod);
  }
  bad("unknown scalar field kind '" + k + "'");
}

ojson to_json(const ScalarField& f) {
  ojson j = std::visit(overloaded{
                           [](const ScalarField::Constant& c) { return ojson{{"kind", "constant"}, {"value", c.value}}; },
                           [](const ScalarField::Affine& a) { return ojson{{"kind", "affine"}, {"offset", a.offset}, {"gradient", a.gradient}}; },
                           [](const ScalarField::Norm& n) {
                             return ojson{{"kind", "norm"}, {"scale", n.scale}, {"offset", n.offset}, {"center", n.center}};
                           },
                           [](const ScalarField::Polynomial& p) {
                             ojson terms = ojson::array();
                             for (const auto& t : p.terms) terms.push_back({{"coeff", t.coeff}, {"powers", t.powers}});
                             return ojson{{"kind", "polynomial"}, {"terms", terms}, {"radius", p.radius}};
                           },
                           [](const ScalarField::Table& t) {
                             return ojson{{"kind", "table"}, {"lo", t.lo}, {"hi", t.hi}, {"shape", t.shape}, {"values", t.values}};
                           },
                           [](const ScalarField::Quadratic& q) { return ojson{{"kind", "quadratic"}, {"q", q.q}, {"b", q.b}, {"c", q.c}}; },
                       },
                       f.kind());
  if (f.has_declared_modulus()) j["modulus"] = {{"lipschitz", f.modulus().lipschitz}, {"exponent", f.modulus().exponent}};
  return j;
}

MatrixField matrix_field_from_json(const ojson& j) {
  if (j.is_array()) return MatrixField::constant(matrix_from_json(j));
  const std::string k = kind_of(j);
  if (k == "constant") return MatrixField::constant(matrix_from_json(need(j, "value")));
  if (k == "entries") {
    std::vector<ScalarField> upper;
    for (const auto& e : need(j, "upper")) upper.push_back(scalar_field_from_json(e));
    return MatrixField::entries(integer(j, "dim", 0), std::move(upper));
  }
  bad("unknown matrix field kind '" + k + "'");
}

ojson to_json(const MatrixField& m) {
  return std::visit(overloaded{
                        [](const MatrixField::Constant& c) { return ojson{{"kind", "constant"}, {"value", to_json(c.value)}}; },
                        [](const MatrixField::Entries& e) {
                          ojson up = ojson::array();
                          for (const auto& f : e.upper) up.push_back(to_json(f));
                          return ojson{{"kind", "entries"}, {"dim", e.dim}, {"upper", up}};
                        },
                    },
                    m.kind());
}

// ---------------------------------------------------------------------------

DomainSpec domain_from_json(const ojson& j) {
  const ojson& s = need(j, "shape");
  if (!s.is_string()) bad("domain 'shape' must be a string");
  const std::string shape = s.get<std::string>();
  const int dim = integer(j, "dim", 2);
  auto center = [&]() { return j.contains("center") ? vec_from_json(j.at("center")) : Vec(dim); };
  if (shape == "ball") return DomainSpec(DomainSpec::Ball{center(), num(j, "radius", 1.0)});
  if (shape == "ellipsoid") return DomainSpec(DomainSpec::Ellipsoid{center(), vec_from_json(need(j, "axes"))});
  if (shape == "box") return DomainSpec(DomainSpec::Box{vec_from_json(need(j, "lo")), vec_from_json(need(j, "hi"))});
  if (shape == "annulus") return DomainSpec(DomainSpec::Annulus{center(), num(j, "inner"), num(j, "outer")});
  bad("unknown domain shape '" + shape + "'");
}

ojson to_json(const DomainSpec& d) {
  return std::visit(overloaded{
                        [](const DomainSpec::Ball& b) { return ojson{{"shape", "ball"}, {"center", to_json(b.center)}, {"radius", b.radius}}; },
                        [](const DomainSpec::Ellipsoid& e) {
                          return ojson{{"shape", "ellipsoid"}, {"center", to_json(e.center)}, {"axes", to_json(e.axes)}};
                        },
                        [](const DomainSpec::Box& b) { return ojson{{"shape", "box"}, {"lo", to_json(b.lo)}, {"hi", to_json(b.hi)}}; },
                        [](const DomainSpec::Annulus& a) {
                          return ojson{{"shape", "annulus"}, {"center", to_json(a.center)}, {"inner", a.inner}, {"outer", a.outer}};
                        },
                    },
                    d.shape());
}

// ---------------------------------------------------------------------------

OperatorSpec operator_from_json(const ojson& j) {
  OperatorSpec op;
  op.dim = integer(j, "dim", 2);
  if (op.dim < 1 || op.dim > kMaxDim) bad("operator dimension out of range");
  op.tol = num(j, "tol", kDefaultTol);
  const std::string k = kind_of(j);
  auto f = [&]() { return j.contains("f") ? scalar_field_from_json(j.at("f")) : ScalarField::constant(0.0); };
  auto mf = [&](const char* key) {
    MatrixField m = matrix_field_from_json(need(j, key));
    if (m.dim() != op.dim) bad(std::string("'") + key + "' dimension differs from the operator dimension");
    return m;
  };
  if (k == "monge_ampere") op.kind = OperatorSpec::MongeAmpere{f()};
  else if (k == "perturbed_ma") op.kind = OperatorSpec::PerturbedMA{mf("M"), f()};
  else if (k == "kth_eigenvalue") {
    const int kk = integer(j, "k", 1);
    if (kk < 1 || kk > op.dim) bad("k must lie in [1, dim]");
    op.kind = OperatorSpec::KthEigenvalue{kk, f()};
  } else if (k == "pucci_minus") {
    const double lo = num(j, "lambda"), hi = num(j, "Lambda");
    if (!(lo > 0.0 && hi >= lo)) bad("pucci_minus needs 0 < lambda <= Lambda");
    op.kind = OperatorSpec::PucciMinus{lo, hi, f()};
  } else if (k == "linear_trace") op.kind = OperatorSpec::LinearTrace{mf("a"), f()};
  else if (k == "truncated_linear") {
    const double lo = num(j, "lambda"), hi = num(j, "Lambda"), h = num(j, "h");
    if (!(lo > 0.0 && hi >= lo && h > 0.0)) bad("truncated_linear needs 0 < lambda <= Lambda and h > 0");
    op.kind = OperatorSpec::TruncatedLinear{mf("a"), f(), lo, hi, h};
  } else if (k == "bellman_ma") op.kind = OperatorSpec::BellmanMA{mf("M"), f()};
  else bad("unknown operator kind '" + k + "'");
  return op;
}

ojson to_json(const OperatorSpec& op) {
  ojson j = std::visit(overloaded{
                           [](const OperatorSpec::MongeAmpere& k) { return ojson{{"kind", "monge_ampere"}, {"f", to_json(k.f)}}; },
                           [](const OperatorSpec::PerturbedMA& k) {
                             return ojson{{"kind", "perturbed_ma"}, {"M", to_json(k.M)}, {"f", to_json(k.f)}};
                           },
                           [](const OperatorSpec::KthEigenvalue& k) { return ojson{{"kind", "kth_eigenvalue"}, {"k", k.k}, {"f", to_json(k.f)}}; },
                           [](const OperatorSpec::PucciMinus& k) {
                             return ojson{{"kind", "pucci_minus"}, {"lambda", k.lambda}, {"Lambda", k.Lambda}, {"f", to_json(k.f)}};
                           },
                           [](const OperatorSpec::LinearTrace& k) {
                             return ojson{{"kind", "linear_trace"}, {"a", to_json(k.a)}, {"f", to_json(k.f)}};
                           },
                           [](const OperatorSpec::TruncatedLinear& k) {
                             return ojson{{"kind", "truncated_linear"}, {"a", to_json(k.a)}, {"f", to_json(k.f)},
                                          {"lambda", k.lambda}, {"Lambda", k.Lambda}, {"h", k.h}};
                           },
                           [](const OperatorSpec::BellmanMA& k) { return ojson{{"kind", "bellman_ma"}, {"M", to_json(k.M)}, {"f", to_json(k.f)}}; },
                       },
                       op.kind);
  j["dim"] = op.dim;
  j["tol"] = op.tol;
  return j;
}

// ---------------------------------------------------------------------------

EllipticSetSpec set_from_json(const ojson& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "PSD") return psd(2);
    if (s == "DualPSD") return dual_psd(2);
    bad("unknown set name '" + s + "'");
  }
  const std::string k = kind_of(j);
  const int dim = integer(j, "dim", 2);
  const double tol = num(j, "tol", kDefaultTol);
  if (k == "psd") return build(dim, EllipticSetSpec::PSD{}, tol);
  if (k == "dual_psd") return build(dim, EllipticSetSpec::DualPSD{}, tol);
  if (k == "pk") {
    const int kk = integer(j, "k", 1);
    if (kk < 1 || kk > dim) bad("k must lie in [1, dim]");
    return build(dim, EllipticSetSpec::Pk{kk}, tol);
  }
  if (k == "half_space") {
    const SymMat a = matrix_from_json(need(j, "a"));
    if (a.dim() != dim) bad("half_space 'a' dimension differs");
    if (lambda_min(a) < -tol || a.frobenius() == 0.0) bad("half_space 'a' must be positive semidefinite and nonzero");
    return build(dim, EllipticSetSpec::HalfSpaceLinear{a, num(j, "c", 0.0)}, tol);
  }
  auto sub = [&](const char* key) {
    EllipticSetSpec s = set_from_json(need(j, key));
    if (s.dim != dim) bad(std::string("'") + key + "' dimension differs");
    return share(std::move(s));
  };
  if (k == "truncated") return build(dim, EllipticSetSpec::Truncated{sub("first"), sub("second")}, tol);
  if (k == "union") return build(dim, EllipticSetSpec::Union{sub("first"), sub("second")}, tol);
  if (k == "translate") {
    const SymMat o = matrix_from_json(need(j, "offset"));
    if (o.dim() != dim) bad("translate 'offset' dimension differs");
    return build(dim, EllipticSetSpec::Translate{sub("base"), o}, tol);
  }
  if (k == "dual") {
    const double eps = num(j, "eps", kDefaultMargin);
    if (!(eps > 0.0)) bad("dual 'eps' must be positive");
    return build(dim, EllipticSetSpec::Dual{sub("base"), eps}, tol);
  }
  if (k == "all") return whole_space(dim);
  if (k == "sublevel") {
    auto op = std::make_shared<const OperatorSpec>(operator_from_json(need(j, "operator")));
    if (op->dim != dim) bad("sublevel operator dimension differs");
    const Vec x = vec_from_json(need(j, "x"));
    return build(dim, EllipticSetSpec::SublevelBranch{op, x, sub("phi")}, tol);
  }
  bad("unknown set kind '" + k + "'");
}

ojson to_json(const EllipticSetSpec& s) {
  ojson j = std::visit(overloaded{
                           [](const EllipticSetSpec::PSD&) { return ojson{{"kind", "psd"}}; },
                           [](const EllipticSetSpec::DualPSD&) { return ojson{{"kind", "dual_psd"}}; },
                           [](const EllipticSetSpec::Pk& p) { return ojson{{"kind", "pk"}, {"k", p.k}}; },
                           [](const EllipticSetSpec::HalfSpaceLinear& h) { return ojson{{"kind", "half_space"}, {"a", to_json(h.a)}, {"c", h.c}}; },
                           [](const EllipticSetSpec::Truncated& t) {
                             return ojson{{"kind", "truncated"}, {"first", to_json(*t.first)}, {"second", to_json(*t.second)}};
                           },
                           [](const EllipticSetSpec::Union& t) {
                             return ojson{{"kind", "union"}, {"first", to_json(*t.first)}, {"second", to_json(*t.second)}};
                           },
                           [](const EllipticSetSpec::Translate& t) {
                             return ojson{{"kind", "translate"}, {"base", to_json(*t.base)}, {"offset", to_json(t.offset)}};
                           },
                           [](const EllipticSetSpec::Dual& d) { return ojson{{"kind", "dual"}, {"base", to_json(*d.base)}, {"eps", d.eps}}; },
                           [](const EllipticSetSpec::All&) { return ojson{{"kind", "all"}}; },
                           [](const EllipticSetSpec::SublevelBranch& b) {
                             return ojson{{"kind", "sublevel"}, {"operator", to_json(*b.op)}, {"x", to_json(b.x)}, {"phi", to_json(*b.phi)}};
                           },
                       },
                       s.kind);
  j["dim"] = s.dim;
  j["tol"] = s.tol;
  return j;
}

// ---------------------------------------------------------------------------

RulePtr rule_from_json(const ojson& j, int dim) {
  const std::string k = kind_of(j);
  if (k == "constant") {
    EllipticSetSpec s = set_from_json(need(j, "set"));
    if (s.dim != dim) bad("constant rule set dimension differs");
    return make_rule(MapRule::Constant{std::move(s)});
  }
  if (k == "branch") {
    auto op = std::make_shared<const OperatorSpec>(operator_from_json(need(j, "operator")));
    if (op->dim != dim) bad("branch operator dimension differs");
    RulePtr phi = j.contains("phi") ? rule_from_json(j.at("phi"), dim) : natural_phi_rule(*op);
    return make_rule(MapRule::Branch{op, phi});
  }
  if (k == "translate") {
    MatrixField off = matrix_field_from_json(need(j, "offset"));
    if (off.dim() != dim) bad("translate rule offset dimension differs");
    return make_rule(MapRule::Translate{rule_from_json(need(j, "base"), dim), off, num(j, "sign", 1.0)});
  }
  if (k == "half_space") {
    MatrixField a = matrix_field_from_json(need(j, "a"));
    if (a.dim() != dim) bad("half_space rule 'a' dimension differs");
    return make_rule(MapRule::HalfSpace{a, j.contains("c") ? scalar_field_from_json(j.at("c")) : ScalarField::constant(0.0)});
  }
  if (k == "intersect") return make_rule(MapRule::Intersect{rule_from_json(need(j, "first"), dim), rule_from_json(need(j, "second"), dim)});
  if (k == "dual") {
    const double eps = num(j, "eps", kDefaultMargin);
    if (!(eps > 0.0)) bad("dual rule 'eps' must be positive");
    return make_rule(MapRule::Dual{rule_from_json(need(j, "base"), dim), eps});
  }
  bad("unknown rule kind '" + k + "'");
}

ojson to_json(const MapRule& r) {
  return std::visit(overloaded{
                        [](const MapRule::Constant& c) { return ojson{{"kind", "constant"}, {"set", to_json(c.set)}}; },
                        [](const MapRule::Branch& b) { return ojson{{"kind", "branch"}, {"operator", to_json(*b.op)}, {"phi", to_json(*b.phi)}}; },
                        [](const MapRule::Translate& t) {
                          return ojson{{"kind", "translate"}, {"base", to_json(*t.base)}, {"offset", to_json(t.offset)}, {"sign", t.sign}};
                        },
                        [](const MapRule::HalfSpace& h) { return ojson{{"kind", "half_space"}, {"a", to_json(h.a)}, {"c", to_json(h.c)}}; },
                        [](const MapRule::Intersect& i) {
                          return ojson{{"kind", "intersect"}, {"first", to_json(*i.first)}, {"second", to_json(*i.second)}};
                        },
                        [](const MapRule::Dual& d) { return ojson{{"kind", "dual"}, {"base", to_json(*d.base)}, {"eps", d.eps}}; },
                    },
                    r.kind);
}

EllipticMapSpec map_from_json(const ojson& j) {
  DomainSpec d = domain_from_json(need(j, "domain"));
  const int dim = integer(j, "dim", d.dim());
  return EllipticMapSpec(d, rule_from_json(need(j, "rule"), dim), dim);
}

ojson to_json(const EllipticMapSpec& m) { return {{"domain", to_json(m.domain())}, {"dim", m.dim()}, {"rule", to_json(*m.rule())}}; }

Sampler sampler_from_json(const ojson& j, Sampler s) {
  if (!j.is_object()) return s;
  if (j.contains("samples")) s.samples = need(j, "samples").get<std::size_t>();
  if (j.contains("seed")) s.seed = need(j, "seed").get<std::uint64_t>();
  s.radius = num(j, "radius", s.radius);
  s.cap = num(j, "cap", s.cap);
  return s;
}

// ---------------------------------------------------------------------------

BranchSpec branch_from_json(const ojson& j) {
  const OperatorSpec op = operator_from_json(need(j, "operator"));
  const DomainSpec d = domain_from_json(need(j, "domain"));
  if (op.dim != d.dim()) bad("operator and domain dimensions differ");
  if (const auto* t = std::get_if<OperatorSpec::TruncatedLinear>(&op.kind)) truncated_linear(t->a, t->f, t->lambda, t->Lambda, t->h, d);
  if (j.contains("constraint")) return make_branch(op, EllipticMapSpec(d, rule_from_json(j.at("constraint"), op.dim), op.dim));
  return make_natural_branch(op, d);
}

DirichletProblem problem_from_json(const ojson& j) {
  BranchSpec b = branch_from_json(j);
  DirichletProblem p{b, b.theta.domain(), scalar_field_from_json(need(j, "boundary")), std::nullopt, {}, ojson::object()};
  if (j.contains("reference")) p.reference = scalar_field_from_json(j.at("reference"));
  const ojson s = j.contains("solver") ? j.at("solver") : ojson::object();
  p.params.h = num(s, "h", p.params.h);
  p.params.tol = num(s, "tol", p.params.tol);
  p.params.max_sweeps = integer(s, "max_sweeps", p.params.max_sweeps);
  p.params.stencil_radius = integer(s, "stencil_radius", p.params.stencil_radius);
  p.params.threads = integer(s, "threads", p.params.threads);
  p.params.barrier_points = integer(s, "barrier_points", p.params.barrier_points);
  p.params.barrier_eps = num(s, "barrier_eps", p.params.barrier_eps);
  if (s.contains("seed")) p.params.seed = s.at("seed").get<std::uint64_t>();
  if (s.contains("require_certificates")) p.params.require_certificates = s.at("require_certificates").get<bool>();
  if (!(p.params.h > 0.0) || !(p.params.tol > 0.0) || p.params.max_sweeps < 1 || p.params.stencil_radius < 1)
    bad("solver parameters out of range");
  return p;
}

ojson to_json(const SolverParams& p) {
  return {{"h", p.h},
          {"tol", p.tol},
          {"max_sweeps", p.max_sweeps},
          {"stencil_radius", p.stencil_radius},
          {"seed", p.seed},
          {"threads", p.threads},
          {"barrier_points", p.barrier_points},
          {"barrier_eps", p.barrier_eps},
          {"require_certificates", p.require_certificates}};
}

// ---------------------------------------------------------------------------

ojson parse_toml(const std::string& text) {
  try {
    toml::table t = toml::parse(text);
    return toml_to_json(t);
  } catch (const toml::parse_error& e) {
    bad(std::string("TOML parse error: ") + std::string(e.description()));
  }
}

ojson load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (std::filesystem::path(path).extension() == ".toml") return parse_toml(text);
  try {
    return ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    bad(std::string("JSON parse error: ") + e.what());
  }
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

}  // namespace ellb
