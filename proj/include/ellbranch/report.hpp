// Verdict plumbing shared by every structural check.
#pragma once

#include <optional>
#include <string>

#include "ellbranch/symmat.hpp"
#include "json.hpp"

namespace ellb {

using ojson = nlohmann::ordered_json;

enum class Verdict { Pass, Fail, PassUpToCap };

std::string to_string(Verdict v);

/// Concrete counterexample data. Only the fields relevant to the check are set.
struct Witness {
  std::optional<Vec> x;
  std::optional<Vec> y;
  std::optional<SymMat> A;
  std::optional<SymMat> B;
  std::optional<double> alpha;
  ojson values = ojson::object();
};

struct ConditionReport {
  std::string check;
  Verdict verdict = Verdict::Pass;
  std::optional<Witness> witness;
  std::size_t samples_used = 0;
  ojson parameters = ojson::object();
  ojson details = ojson::object();

  bool failed() const { return verdict == Verdict::Fail; }
};

/// Sampling controls shared by the randomized checks.
struct Sampler {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double radius = 10.0;  // matrix ball radius for set-distance estimates
  double cap = 1e3;      // largest matrix norm probed when sampling Theta(x)
};

ojson to_json(const Vec& v);
ojson to_json(const SymMat& m);
ojson to_json(const Witness& w);
ojson to_json(const ConditionReport& r);
ojson to_json(const Sampler& s);

}  // namespace ellb
