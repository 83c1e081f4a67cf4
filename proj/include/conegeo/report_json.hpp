#pragma once

#include <json.hpp>
#include <string>

#include "conegeo/examples.hpp"

namespace conegeo {

/// Stable report schema.  wall_ms is emitted as 0 unless timing is requested,
/// so that reports stay byte-deterministic across runs by default.
inline nlohmann::ordered_json report_to_json(const Example& e, const SuiteResult& res,
                                             bool timing = false) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["example"] = e.name;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : e.params) params[k] = v;
  if (!e.potential_expr.empty()) params["u"] = e.potential_expr;
  j["params"] = params;
  j["grid"] = std::to_string(res.grid.nx) + "x" + std::to_string(res.grid.ny);
  j["backend"] = res.backend;
  nlohmann::ordered_json residuals = nlohmann::ordered_json::object();
  for (const auto& [name, st] : res.report.residuals) {
    nlohmann::ordered_json r;
    r["max"] = st.max();
    r["mean"] = st.mean();
    r["p99"] = st.p99();
    r["count"] = st.count();
    r["masked_count"] = st.masked_count;
    auto it = res.report.bounds.find(name);
    if (it != res.report.bounds.end()) r["bound"] = it->second;
    residuals[name] = r;
  }
  j["residuals"] = residuals;
  nlohmann::ordered_json probes = nlohmann::ordered_json::object();
  for (const auto& [name, v] : res.probes) probes[name] = v;
  j["probes"] = probes;
  if (!res.report.flags.empty()) j["flags"] = res.report.flags;
  j["pass"] = res.report.pass();
  j["wall_ms"] = timing ? res.wall_ms : 0.0;
  return j;
}

}  // namespace conegeo
