#include "ellbranch/report.hpp"

namespace ellb {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::PassUpToCap:
      return "pass-up-to-cap";
  }
  return "unknown";
}

ojson to_json(const Vec& v) {
  ojson j = ojson::array();
  for (double x : v) j.push_back(x);
  return j;
}

ojson to_json(const SymMat& m) {
  ojson j = ojson::array();
  for (const auto& row : m.rows()) j.push_back(row);
  return j;
}

ojson to_json(const Witness& w) {
  ojson j = ojson::object();
  if (w.x) j["x"] = to_json(*w.x);
  if (w.y) j["y"] = to_json(*w.y);
  if (w.A) j["A"] = to_json(*w.A);
  if (w.B) j["B"] = to_json(*w.B);
  if (w.alpha) j["alpha"] = *w.alpha;
  if (!w.values.empty()) j["values"] = w.values;
  return j;
}

ojson to_json(const ConditionReport& r) {
  ojson j = ojson::object();
  j["check"] = r.check;
  j["verdict"] = to_string(r.verdict);
  j["witness"] = r.witness ? to_json(*r.witness) : ojson(nullptr);
  j["samples_used"] = r.samples_used;
  j["parameters"] = r.parameters;
  j["details"] = r.details;
  return j;
}

ojson to_json(const Sampler& s) {
  return {{"samples", s.samples}, {"seed", s.seed}, {"radius", s.radius}, {"cap", s.cap}};
}

}  // namespace ellb
