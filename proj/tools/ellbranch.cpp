// ellbranch command line tool.
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ellbranch/conditions.hpp"
#include "ellbranch/serialize.hpp"

namespace {

using ellb::ojson;

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFail = 2;

struct Options {
  std::string command;
  std::string input;
  std::string out;
  bool json = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tol;
  std::optional<double> cap;
  std::optional<double> h;
  std::optional<std::size_t> samples;
  std::string set;
  std::string matrix;
  std::vector<double> xn;
  std::vector<double> ladder;
  std::optional<double> eps;
};

struct Outcome {
  ojson result = ojson::object();
  int exit = kExitPass;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

ojson parse_literal(const std::string& text, const char* what) {
  try {
    return ojson::parse(text);
  } catch (const ojson::parse_error&) {
    throw UsageError(std::string("malformed ") + what + " literal: " + text);
  }
}

// File values win: a flag only fills a key the config leaves unset.
template <class T>
void fill(ojson& j, const char* key, const std::optional<T>& flag) {
  if (flag && !j.contains(key)) j[key] = *flag;
}

ellb::Sampler sampler(const ojson& cfg, const Options& o, ellb::Sampler defaults = {}) {
  ojson s = cfg.contains("sampler") ? cfg.at("sampler") : ojson::object();
  fill(s, "seed", o.seed);
  fill(s, "cap", o.cap);
  fill(s, "samples", o.samples);
  return ellb::sampler_from_json(s, defaults);
}

double eps_of(const ojson& cfg, const Options& o, double fallback) {
  if (cfg.contains("eps")) return cfg.at("eps").get<double>();
  return o.eps.value_or(fallback);
}

ellb::SymMat matrix_of(const ojson& cfg, const Options& o) {
  if (cfg.contains("matrix")) return ellb::matrix_from_json(cfg.at("matrix"));
  if (o.matrix.empty()) throw UsageError("a matrix is required (--matrix or \"matrix\" in the config)");
  return ellb::matrix_from_json(parse_literal(o.matrix, "matrix"));
}

ellb::EllipticSetSpec set_of(const ojson& cfg, const Options& o, int dim) {
  if (cfg.contains("set")) {
    ojson s = cfg.at("set");
    if (s.is_object() && !s.contains("dim")) s["dim"] = dim;
    if (!s.is_string()) return ellb::set_from_json(s);
    return set_of(ojson::object(), Options{.set = s.get<std::string>()}, dim);
  }
  const std::string& name = o.set;
  if (name.empty()) throw UsageError("a set is required (--set or \"set\" in the config)");
  if (name.front() == '{') {
    ojson s = parse_literal(name, "set");
    if (!s.contains("dim")) s["dim"] = dim;
    return ellb::set_from_json(s);
  }
  if (name == "PSD" || name == "P") return ellb::psd(dim);
  if (name == "DualPSD") return ellb::dual_psd(dim);
  if (name.size() > 1 && name[0] == 'P') {
    int k = 0;
    const auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
    if (ec == std::errc() && p == name.data() + name.size() && k >= 1 && k <= dim) return ellb::pk(dim, k);
  }
  throw UsageError("unknown set '" + name + "' (PSD, DualPSD, P<k> or a JSON descriptor)");
}

ellb::EllipticMapSpec map_of(const ojson& cfg) {
  if (cfg.contains("map")) return ellb::map_from_json(cfg.at("map"));
  if (cfg.contains("operator")) return ellb::branch_from_json(cfg).theta;
  throw UsageError("config needs \"map\" or \"operator\" + \"domain\"");
}

ellb::DirichletProblem problem_of(const ojson& cfg, const Options& o) {
  ojson c = cfg;
  ojson& s = c["solver"];
  if (s.is_null()) s = ojson::object();
  fill(s, "h", o.h);
  fill(s, "tol", o.tol);
  fill(s, "threads", o.threads);
  fill(s, "seed", o.seed);
  return ellb::problem_from_json(c);
}

int verdict_exit(const ellb::ConditionReport& r) { return r.failed() ? kExitFail : kExitPass; }

// ---------------------------------------------------------------------------

Outcome cmd_dual(const ojson& cfg, const Options& o) {
  const ellb::SymMat A = matrix_of(cfg, o);
  const ellb::EllipticSetSpec S = set_of(cfg, o, A.dim());
  const double eps = eps_of(cfg, o, ellb::kDefaultMargin);
  Outcome out;
  out.result["set"] = ellb::to_json(S);
  out.result["matrix"] = ellb::to_json(A);
  out.result["in_dual"] = ellb::dual_contains(S, A, eps);
  out.result["in_set"] = ellb::contains(S, A);
  if (auto cf = ellb::closed_form_dual(S)) out.result["closed_form_dual"] = ellb::to_json(*cf);
  return out;
}

Outcome cmd_cone(const ojson& cfg, const Options& o) {
  const ellb::SymMat A = matrix_of(cfg, o);
  const ellb::EllipticSetSpec S = set_of(cfg, o, A.dim());
  const auto grid = cfg.contains("eps_grid") ? cfg.at("eps_grid").get<std::vector<double>>() : ellb::default_eps_grid();
  const double cmax = cfg.value("C_max", ellb::kDefaultConeCap);
  const ellb::ConeResult r = ellb::cone_test(S, A, grid, cmax);
  Outcome out;
  out.result["set"] = ellb::to_json(S);
  out.result["matrix"] = ellb::to_json(A);
  out.result["in_cone"] = r.inside;
  out.result["eps"] = r.eps;
  out.result["R"] = r.R;
  return out;
}

Outcome cmd_hausdorff(const ojson& cfg, const Options& o) {
  if (!cfg.contains("first") || !cfg.contains("second")) throw UsageError("hausdorff needs \"first\" and \"second\" sets in the config");
  const ellb::EllipticSetSpec a = ellb::set_from_json(cfg.at("first"));
  const ellb::EllipticSetSpec b = ellb::set_from_json(cfg.at("second"));
  const ellb::Sampler s = sampler(cfg, o);
  const double d = ellb::hausdorff_estimate(a, b, s);
  Outcome out;
  out.result["distance"] = std::isfinite(d) ? ojson(d) : ojson("inf");
  out.result["sampler"] = ellb::to_json(s);
  return out;
}

Outcome cmd_verify_uusc(const ojson& cfg, const Options& o) {
  const ellb::EllipticMapSpec M = map_of(cfg);
  const ellb::Sampler s = sampler(cfg, o);
  const double eps = eps_of(cfg, o, 0.5);
  const ellb::ConditionReport r =
      cfg.contains("delta") ? ellb::uusc_check(M, eps, cfg.at("delta").get<double>(), s) : ellb::uusc_certify(M, eps, s, cfg.value("levels", 20));
  return {ellb::to_json(r), verdict_exit(r), {}};
}

Outcome cmd_verify_ucf(const ojson& cfg, const Options& o) {
  if (!cfg.contains("operator") || !cfg.contains("domain")) throw UsageError("verify-ucf needs \"operator\" and \"domain\"");
  const ellb::BranchSpec B = ellb::branch_from_json(cfg);
  const ellb::Sampler s = sampler(cfg, o);
  const double eps = eps_of(cfg, o, 0.5);
  const ellb::ConditionReport r = cfg.contains("delta")
                                      ? ellb::ucf_check_at(*B.op, B.constraint, eps, cfg.at("delta").get<double>(), s)
                                      : ellb::ucf_check(*B.op, B.constraint, eps, s, cfg.value("eps_star", std::numeric_limits<double>::infinity()),
                                                        cfg.value("levels", 20));
  return {ellb::to_json(r), verdict_exit(r), {}};
}

Outcome cmd_falsify_classical(const ojson& cfg, const Options& o) {
  std::vector<double> radii = ellb::default_falsify_radii();
  if (cfg.contains("xn")) radii = cfg.at("xn").is_array() ? cfg.at("xn").get<std::vector<double>>() : std::vector<double>{cfg.at("xn").get<double>()};
  else if (!o.xn.empty()) radii = o.xn;
  for (double& r : radii) r = std::abs(r);
  const ellb::ScalarField f = cfg.contains("f") ? ellb::scalar_field_from_json(cfg.at("f")) : ellb::ScalarField::constant(0.0);
  const ellb::ConditionReport r = ellb::classical_falsify(ellb::classical_counterexample_operator(f), radii);
  Outcome out;
  const ojson& trace = r.details.at("gap_trace");
  out.result["gap"] = trace.back().at("gap");
  out.result["modulus_argument"] = trace.back().at("modulus_argument");
  out.result["falsified"] = r.failed();
  out.result["report"] = ellb::to_json(r);
  out.exit = verdict_exit(r);
  return out;
}

Outcome cmd_check_conditions(const ojson& cfg, const Options& o) {
  ellb::DirichletProblem p = problem_of(cfg, o);
  const ellb::Sampler s = sampler(cfg, o, {256, 3, 10.0, 1e3});
  const bool ok = ellb::certify(p, s);
  Outcome out;
  out.result["certified"] = ok;
  out.result["flags"] = p.flags;
  out.exit = ok ? kExitPass : kExitFail;
  return out;
}

std::string grid_csv(const ellb::GridFunction& g) {
  std::ostringstream os;
  g.write_csv(os);
  return os.str();
}

Outcome cmd_solve(const ojson& cfg, const Options& o) {
  const ellb::DirichletProblem p = problem_of(cfg, o);
  Outcome out;
  try {
    const ellb::SolveResult r = ellb::perron_solve(p);
    out.result = ellb::to_json(r.report);
    out.result["solver"] = ellb::to_json(p.params);
    out.files.emplace_back("solution.csv", grid_csv(r.u));
    out.files.emplace_back("initial.csv", grid_csv(r.initial));
    if (r.report.comparison == "violation") out.exit = kExitFail;
  } catch (const ellb::PreconditionError& e) {
    out.result = {{"error", e.what()}, {"flags", e.flags()}};
    out.exit = kExitFail;
  } catch (const ellb::SolveFailure& e) {
    out.result = ellb::to_json(e.report());
    out.result["error"] = e.what();
    out.exit = kExitFail;
  }
  return out;
}

Outcome cmd_converge(const ojson& cfg, const Options& o) {
  std::vector<double> ladder = {1.0 / 8, 1.0 / 16, 1.0 / 32};
  if (cfg.contains("ladder")) ladder = cfg.at("ladder").get<std::vector<double>>();
  else if (!o.ladder.empty()) ladder = o.ladder;
  const ellb::DirichletProblem p = problem_of(cfg, o);
  Outcome out;
  try {
    const auto rows = ellb::convergence_study(p, ladder);
    ojson table = ojson::array();
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      table.push_back({{"h", rows[i].h}, {"max_error", rows[i].max_error}, {"sweeps", rows[i].sweeps}, {"residual", rows[i].residual}});
      if (i > 0 && !(rows[i].max_error < rows[i - 1].max_error)) decreasing = false;
    }
    out.result["rows"] = table;
    out.result["error_strictly_decreasing"] = decreasing;
    std::ostringstream os;
    ellb::write_convergence_csv(os, rows);
    out.files.emplace_back("convergence.csv", os.str());
  } catch (const ellb::PreconditionError& e) {
    out.result = {{"error", e.what()}, {"flags", e.flags()}};
    out.exit = kExitFail;
  } catch (const ellb::SolveFailure& e) {
    out.result = ellb::to_json(e.report());
    out.result["error"] = e.what();
    out.exit = kExitFail;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string scalar_text(const ojson& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void print_text(std::ostream& os, const ojson& result) {
  for (const auto& [k, v] : result.items()) {
    if (v.is_primitive()) os << k << ": " << scalar_text(v) << '\n';
    else if (v.is_object() && v.contains("check")) os << k << ": " << v.at("check").get<std::string>() << " " << scalar_text(v.at("verdict")) << '\n';
    else if (v.is_array() && v.size() > 8) os << k << ": [" << v.size() << " entries]\n";
    else os << k << ": " << v.dump() << '\n';
  }
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int run(const Options& o) {
  using Fn = Outcome (*)(const ojson&, const Options&);
  static const std::map<std::string, Fn> commands = {
      {"dual", cmd_dual},
      {"cone", cmd_cone},
      {"hausdorff", cmd_hausdorff},
      {"verify-uusc", cmd_verify_uusc},
      {"verify-ucf", cmd_verify_ucf},
      {"falsify-classical", cmd_falsify_classical},
      {"check-conditions", cmd_check_conditions},
      {"solve", cmd_solve},
      {"converge", cmd_converge},
  };
  const auto it = commands.find(o.command);
  if (it == commands.end()) throw UsageError("unknown command '" + o.command + "'");
  const ojson cfg = o.input.empty() ? ojson::object() : ellb::load_config(o.input);
  if (!cfg.is_object()) throw UsageError("config must be a table/object");

  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  Outcome out = it->second(cfg, o);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (o.json) std::cout << out.result.dump(2) << '\n';
  else print_text(std::cout, out.result);

  if (!o.out.empty()) {
    const std::filesystem::path dir(o.out);
    for (const auto& [name, content] : out.files) ellb::write_atomic((dir / name).string(), content);
    ellb::write_atomic((dir / (o.command + ".json")).string(), out.result.dump(2) + "\n");
    ojson meta = {{"command", o.command}, {"input", o.input}, {"started_utc", started}, {"elapsed_seconds", elapsed}, {"exit", out.exit}};
    ellb::write_atomic((dir / (o.command + ".meta.json")).string(), meta.dump(2) + "\n");
  }
  return out.exit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptic branches: set calculus, structural checks and Dirichlet solves"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* sub, bool takes_config) {
    if (takes_config) sub->add_option("config", o.input, "Problem file (.json or .toml)")->check(CLI::ExistingFile);
    sub->add_flag("--json", o.json, "Print the result as JSON");
    sub->add_option("--out", o.out, "Directory for the report, grids and the .meta.json sidecar");
    sub->add_option("--seed", o.seed, "Sampler / solver seed");
    sub->add_option("--threads", o.threads, "Worker threads for same-color node updates")->check(CLI::PositiveNumber);
    sub->add_option("--tol", o.tol, "Solver stopping tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--cap", o.cap, "Largest matrix norm probed by samplers")->check(CLI::PositiveNumber);
    sub->add_option("--h", o.h, "Grid spacing")->check(CLI::PositiveNumber);
    sub->add_option("--samples", o.samples, "Sample count")->check(CLI::PositiveNumber);
    sub->add_option("--eps", o.eps, "Margin epsilon")->check(CLI::PositiveNumber);
  };
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->callback([&o, sub] { o.command = sub->get_name(); });
    return sub;
  };

  for (const char* name : {"dual", "cone"}) {
    CLI::App* sub = add(name, name == std::string("dual") ? "Membership in the dual set" : "Membership in the interior of the associated cone");
    common(sub, false);
    sub->add_option("--config", o.input, "Query file (.json or .toml)")->check(CLI::ExistingFile);
    sub->add_option("--set", o.set, "PSD, DualPSD, P<k> or a JSON set descriptor");
    sub->add_option("--matrix", o.matrix, "Row-major JSON matrix literal");
  }
  common(add("hausdorff", "Sampled Hausdorff distance between two elliptic sets"), true);
  common(add("verify-uusc", "Uniform upper semicontinuity of an elliptic map"), true);
  common(add("verify-ucf", "Uniform continuity of F on its constraint"), true);
  {
    CLI::App* sub = add("falsify-classical", "Counterexample to the classical structure condition");
    common(sub, false);
    sub->add_option("--config", o.input, "Optional file with \"xn\" and \"f\"")->check(CLI::ExistingFile);
    sub->add_option("--xn", o.xn, "Values of |x_n| (repeatable)");
  }
  common(add("check-conditions", "Certificates required before solving"), true);
  common(add("solve", "Dirichlet solve on a lattice"), true);
  {
    CLI::App* sub = add("converge", "Convergence study over an h ladder");
    common(sub, true);
    sub->add_option("--ladder", o.ladder, "Grid spacings, coarse to fine")->delimiter(',');
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return run(o);
  } catch (const UsageError& e) {
    std::cerr << "ellbranch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "ellbranch: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ellbranch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ellbranch: internal error: " << e.what() << '\n';
    return kExitUsage;
  }
}
