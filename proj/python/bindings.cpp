// Python bindings. Structured inputs and outputs cross the boundary as JSON text.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ellbranch/conditions.hpp"
#include "ellbranch/serialize.hpp"

namespace py = pybind11;
using ellb::ojson;

namespace {

ojson parse(const std::string& text) { return ojson::parse(text); }

ellb::SymMat matrix(const std::vector<std::vector<double>>& rows) { return ellb::SymMat::from_rows(rows); }

ellb::EllipticSetSpec set_for(const std::string& text, int dim) {
  ojson j = parse(text);
  if (j.is_object() && !j.contains("dim")) j["dim"] = dim;
  return ellb::set_from_json(j);
}

std::string csv(const ellb::GridFunction& g) {
  std::ostringstream os;
  g.write_csv(os);
  return os.str();
}

ojson solve_json(const ellb::DirichletProblem& p) {
  const ellb::SolveResult r = ellb::perron_solve(p);
  ojson out = {{"report", ellb::to_json(r.report)}, {"solution_csv", csv(r.u)}, {"initial_csv", csv(r.initial)}};
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Elliptic branch sets, structural checks and lattice Dirichlet solves";

  py::register_exception<ellb::PreconditionError>(m, "PreconditionError");
  py::register_exception<ellb::SolveFailure>(m, "SolveFailure");

  m.def("eigenvalues", [](const std::vector<std::vector<double>>& A) {
    return ellb::eigenvalues(matrix(A)).to_vector();
  });
  m.def("contains", [](const std::string& set, const std::vector<std::vector<double>>& A) {
    const ellb::SymMat M = matrix(A);
    return ellb::contains(set_for(set, M.dim()), M);
  });
  m.def(
      "dual_contains",
      [](const std::string& set, const std::vector<std::vector<double>>& A, double eps) {
        const ellb::SymMat M = matrix(A);
        return ellb::dual_contains(set_for(set, M.dim()), M, eps);
      },
      py::arg("set"), py::arg("matrix"), py::arg("eps") = ellb::kDefaultMargin);
  m.def("distance_to", [](const std::string& set, const std::vector<std::vector<double>>& A) {
    const ellb::SymMat M = matrix(A);
    return ellb::distance_to(M, set_for(set, M.dim()));
  });
  m.def("cone_test", [](const std::string& set, const std::vector<std::vector<double>>& A) {
    const ellb::SymMat M = matrix(A);
    const ellb::ConeResult r = ellb::cone_test(set_for(set, M.dim()), M);
    return ojson{{"inside", r.inside}, {"eps", r.eps}, {"R", r.R}}.dump();
  });
  m.def("hausdorff", [](const std::string& first, const std::string& second, const std::string& sampler) {
    return ellb::hausdorff_estimate(ellb::set_from_json(parse(first)), ellb::set_from_json(parse(second)),
                                    ellb::sampler_from_json(parse(sampler)));
  });
  m.def(
      "verify_uusc",
      [](const std::string& map, double eps, const std::string& sampler) {
        const ojson j = parse(map);
        const ellb::EllipticMapSpec M = j.contains("rule") ? ellb::map_from_json(j) : ellb::branch_from_json(j).theta;
        return ellb::to_json(ellb::uusc_certify(M, eps, ellb::sampler_from_json(parse(sampler)))).dump();
      },
      py::arg("map"), py::arg("eps"), py::arg("sampler") = "{}");
  m.def("falsify_classical", [](const std::vector<double>& radii) {
    return ellb::to_json(ellb::classical_falsify(ellb::classical_counterexample_operator(), radii)).dump();
  });
  m.def("check_conditions", [](const std::string& problem) {
    ellb::DirichletProblem p = ellb::problem_from_json(parse(problem));
    const bool ok = ellb::certify(p);
    return ojson{{"certified", ok}, {"flags", p.flags}}.dump();
  });
  m.def("solve", [](const std::string& problem) {
    const ellb::DirichletProblem p = ellb::problem_from_json(parse(problem));
    py::gil_scoped_release release;
    return solve_json(p).dump();
  });
  m.def("convergence_study", [](const std::string& problem, const std::vector<double>& ladder) {
    const ellb::DirichletProblem p = ellb::problem_from_json(parse(problem));
    std::vector<ellb::ConvergenceRow> rows;
    {
      py::gil_scoped_release release;
      rows = ellb::convergence_study(p, ladder);
    }
    ojson out = ojson::array();
    for (const auto& r : rows) out.push_back({{"h", r.h}, {"max_error", r.max_error}, {"sweeps", r.sweeps}, {"residual", r.residual}});
    return out.dump();
  });
  m.def("toml_to_json", [](const std::string& text) { return ellb::parse_toml(text).dump(); });
}
