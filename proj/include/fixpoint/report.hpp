#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixpoint/oracle.hpp"
#include "fixpoint/recovery.hpp"

namespace fixpoint {

/// Six significant digits, the precision used by the printed tables. Full
/// precision lives in the JSON report.
[[nodiscard]] inline std::string fmt6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

[[nodiscard]] inline std::string fmt6(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt6(v[i]);
  }
  return s + ")";
}

namespace report_detail {

inline void print_table(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      os << r[c];
      if (c + 1 < r.size()) os << std::string(width[c] - r[c].size() + 2, ' ');
    }
    os << '\n';
  }
}

}  // namespace report_detail

inline void print_solution_table(std::ostream& os, const SolveResult& result) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"#", "sigma", "x", "Pi", "Pi^d", "gap", "residual", "G", "stability",
                  "source", "triality", "fallback"});
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const SolutionRecord& r = result.records[i];
    std::string triality = r.triality == TrialityVerdict::NotApplicable && !r.triality_note.empty()
                               ? r.triality_note
                               : to_string(r.triality);
    std::string stability = to_string(r.stability);
    if (r.verdict_conflict) stability += " [!]";
    rows.push_back({std::to_string(i + 1), fmt6(r.sigma), fmt6(r.x), fmt6(r.pi_value),
                    fmt6(r.pid_value), fmt6(r.gap), fmt6(r.fp_residual),
                    std::string(to_string(r.g_class)) + (r.from_pole ? "*" : ""), stability,
                    to_string(r.stability_source), triality, to_string(r.fallback_label)});
  }
  report_detail::print_table(os, rows);
  for (const SolutionRecord& r : result.records)
    if (r.verdict_conflict)
      os << "warning: triality and the primal Hessian disagree at sigma = " << fmt6(r.sigma)
         << "; the direct Hessian check decided the label\n";
}

[[nodiscard]] inline nlohmann::json record_to_json(const SolutionRecord& r) {
  nlohmann::json j;
  j["sigma"] = std::vector<double>(r.sigma.begin(), r.sigma.end());
  j["x"] = std::vector<double>(r.x.begin(), r.x.end());
  j["pi"] = r.pi_value;
  j["pid"] = r.pid_value;
  j["gap"] = r.gap;
  j["residual"] = r.fp_residual;
  j["g_class"] = to_string(r.g_class);
  j["g_eigs"] = std::vector<double>(r.g_eigs.begin(), r.g_eigs.end());
  j["stability"] = to_string(r.stability);
  j["stability_source"] = to_string(r.stability_source);
  j["triality"] = to_string(r.triality);
  j["triality_note"] = r.triality_note;
  j["fallback"] = to_string(r.fallback_label);
  j["verdict_conflict"] = r.verdict_conflict;
  j["from_pole"] = r.from_pole;
  return j;
}

[[nodiscard]] inline nlohmann::json report_to_json(const SolveResult& result) {
  nlohmann::json j;
  j["records"] = nlohmann::json::array();
  for (const SolutionRecord& r : result.records) j["records"].push_back(record_to_json(r));
  const SolveDiagnostics& d = result.diagnostics;
  j["diagnostics"] = {{"seeds", d.search.seeds},
                      {"masked_seeds", d.search.masked_seeds},
                      {"converged", d.search.converged},
                      {"discarded", d.search.discarded},
                      {"rejected_singular", d.search.rejected_singular},
                      {"brackets", d.search.brackets},
                      {"rejected_gap", d.rejected_gap},
                      {"rejected_residual", d.rejected_residual},
                      {"pole_candidates", d.pole_candidates},
                      {"notes", d.notes}};
  return j;
}

inline void print_oracle_report(std::ostream& os, const OracleReport& rep,
                                const std::vector<SolutionRecord>& records) {
  os << "oracle points: " << rep.points.size() << ", dual records: " << records.size()
     << ", matched: " << rep.matched.size() << '\n';
  for (const MatchedPair& m : rep.matched)
    os << "  matched record " << m.record_idx << " <-> oracle " << m.oracle_idx
       << "  |dx| = " << fmt6(m.distance) << "  |dPi| = " << fmt6(m.value_diff) << '\n';
  for (std::size_t i : rep.unmatched_dual)
    os << "  UNMATCHED dual record " << i << " at x = " << fmt6(records[i].x) << '\n';
  for (std::size_t j : rep.unmatched_oracle)
    os << "  UNMATCHED oracle point " << j << " at x = " << fmt6(rep.points[j].x)
       << " (Pi = " << fmt6(rep.points[j].pi_value) << ")\n";
  for (const MatchedPair& m : rep.value_mismatches)
    os << "  VALUE MISMATCH record " << m.record_idx << " vs oracle " << m.oracle_idx
       << ": |dPi| = " << fmt6(m.value_diff) << '\n';
  os << (rep.consistent() ? "verification: consistent\n" : "verification: FAILED\n");
}

}  // namespace fixpoint
