// JSON (and TOML, via conversion to JSON) forms of every spec type.
#pragma once

#include <string>

#include "ellbranch/solver.hpp"

namespace ellb {

Vec vec_from_json(const ojson& j);
SymMat matrix_from_json(const ojson& j);

/// Numbers are constants; objects carry "kind" plus kind-specific fields and an optional "modulus".
ScalarField scalar_field_from_json(const ojson& j);
ojson to_json(const ScalarField& f);
/// Square arrays are constants; objects are {"kind": "constant" | "entries", ...}.
MatrixField matrix_field_from_json(const ojson& j);
ojson to_json(const MatrixField& m);

DomainSpec domain_from_json(const ojson& j);
ojson to_json(const DomainSpec& d);

OperatorSpec operator_from_json(const ojson& j);
ojson to_json(const OperatorSpec& op);

EllipticSetSpec set_from_json(const ojson& j);
ojson to_json(const EllipticSetSpec& s);

RulePtr rule_from_json(const ojson& j, int dim);
ojson to_json(const MapRule& r);
/// {"domain": ..., "dim": N, "rule": ...}
EllipticMapSpec map_from_json(const ojson& j);
ojson to_json(const EllipticMapSpec& m);

Sampler sampler_from_json(const ojson& j, Sampler defaults = {});

/// Branch from {"operator": ..., "domain": ..., "constraint": rule (optional)}.
BranchSpec branch_from_json(const ojson& j);
/// {"domain", "operator", "boundary", "reference"?, "constraint"?, "solver": {...}?, "flags"?}
DirichletProblem problem_from_json(const ojson& j);
ojson to_json(const SolverParams& p);

ojson parse_toml(const std::string& text);
/// Reads a .json or .toml file into JSON.
ojson load_config(const std::string& path);
/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace ellb
