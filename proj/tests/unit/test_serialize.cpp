#include <filesystem>
#include <fstream>

#include "ellbranch/serialize.hpp"
#include "support.hpp"

using namespace ellb;
using namespace test;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("scalar and matrix fields round trip through JSON", "[serialize]") {
  auto g = rng(71);
  const std::vector<ScalarField> fields = {
      ScalarField::constant(1.25),
      ScalarField::affine(0.3, {0.7, -0.4}),
      ScalarField::norm(2.0, -0.5),
      ScalarField::quadratic(mat({{1, 0.5}, {0.5, -2}}), {0.1, 0.2}, 3.0),
  };
  for (const auto& f : fields) {
    const ojson j = to_json(f);
    const ScalarField back = scalar_field_from_json(j);
    CHECK(to_json(back) == j);
    for (int t = 0; t < 20; ++t) {
      const Vec x{uniform(g, -1, 1), uniform(g, -1, 1)};
      CHECK(back(x) == f(x));
    }
  }
  CHECK(scalar_field_from_json(ojson(2.5))(Vec{0.3, 0.1}) == 2.5);

  const auto m = MatrixField::entries(2, {ScalarField::norm(), ScalarField::constant(0.0), ScalarField::affine(1.0, {0.0, 1.0})});
  const MatrixField mb = matrix_field_from_json(to_json(m));
  CHECK(mb(Vec{0.3, 0.4}) == m(Vec{0.3, 0.4}));
  CHECK(matrix_field_from_json(ojson::parse("[[1, 0], [0, 2]]"))(Vec{0.0, 0.0}) == SymMat::diag({1.0, 2.0}));
}

TEST_CASE("operators, domains and sets round trip", "[serialize]") {
  const ojson op = ojson::parse(R"({"kind": "pucci_minus", "dim": 2, "lambda": 0.5, "Lambda": 2.0, "f": 0.25})");
  const OperatorSpec o = operator_from_json(op);
  CHECK(evaluate(o, Vec{0.0, 0.0}, SymMat::diag({1.0, -1.0})) == Approx(0.5 - 2.0 - 0.25));
  CHECK(to_json(operator_from_json(to_json(o))) == to_json(o));

  for (const char* d : {R"({"shape": "ball", "center": [0, 0], "radius": 1.5})", R"({"shape": "box", "lo": [0, 0], "hi": [1, 2]})",
                        R"({"shape": "annulus", "center": [0, 0], "inner": 0.5, "outer": 1.0})"}) {
    const DomainSpec dom = domain_from_json(ojson::parse(d));
    CHECK(to_json(domain_from_json(to_json(dom))) == to_json(dom));
  }

  CHECK(contains(set_from_json(ojson("PSD")), SymMat::identity(2)));
  CHECK(to_json(set_from_json(ojson("DualPSD"))) == to_json(dual_psd(2)));
  const EllipticSetSpec pk3 = pk(3, 2);
  const EllipticSetSpec back = set_from_json(to_json(pk3));
  auto g = rng(72);
  for (int t = 0; t < 100; ++t) {
    const SymMat A = random_symmat(g, 3, 2.0);
    CHECK(contains(back, A) == contains(pk3, A));
  }
}

TEST_CASE("problem configs load from TOML", "[serialize]") {
  const ojson j = parse_toml(R"(
boundary = 0.5

[domain]
shape = "ball"
center = [0.0, 0.0]
radius = 1.0

[operator]
kind = "monge_ampere"
dim = 2
f = 1.0

[solver]
h = 0.0625
tol = 1e-9
threads = 2
)");
  const DirichletProblem p = problem_from_json(j);
  CHECK(p.params.h == 0.0625);
  CHECK(p.params.tol == 1e-9);
  CHECK(p.params.threads == 2);
  CHECK(p.boundary(Vec{1.0, 0.0}) == 0.5);
  CHECK_FALSE(p.reference);
  CHECK(to_json(p.params).at("h") == 0.0625);
}

TEST_CASE("malformed configs are rejected", "[serialize]") {
  CHECK_THROWS_AS(operator_from_json(ojson::parse(R"({"kind": "nope", "dim": 2})")), InvalidInput);
  CHECK_THROWS_AS(domain_from_json(ojson::parse(R"({"shape": "ball", "radius": -1})")), InvalidInput);
  CHECK_THROWS_AS(scalar_field_from_json(ojson::parse(R"({"kind": "affine"})")), InvalidInput);
  CHECK_THROWS_AS(parse_toml("a = "), InvalidInput);
  CHECK_THROWS_AS(parse_toml("when = 1979-05-27"), InvalidInput);
  CHECK_THROWS_AS(problem_from_json(ojson::parse(R"({"domain": {"shape": "ball"}})")), InvalidInput);
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), InvalidInput);
}

TEST_CASE("atomic writes leave no temporary files", "[serialize]") {
  const auto dir = std::filesystem::temp_directory_path() / "ellbranch_serialize_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.json";
  write_atomic(path.string(), "{\"a\": 1}\n");
  write_atomic(path.string(), "{\"a\": 2}\n");
  CHECK(slurp(path) == "{\"a\": 2}\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK(load_config(path.string()).at("a") == 2);
  std::filesystem::remove_all(dir);
}
