#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fixpoint/problem.hpp"
#include "fixpoint/recovery.hpp"

namespace fixpoint {

/// Problem-file rejection: carries line/column for syntax errors and the
/// JSON path of the offending element for schema errors.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = -1, int col = -1)
      : std::runtime_error(what), line(line), col(col) {}
  int line;
  int col;
};

/// A parsed problem file: the problem plus any solver overrides it carried.
struct LoadedProblem {
  FixedPointProblem problem;
  SolveOptions options;
  std::uint64_t seed = 0;
  bool has_grid_override = false;
};

namespace io_detail {

using nlohmann::json;

inline std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& path) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    if (!known) throw ParseError("unknown key \"" + item.key() + "\" at " + path);
  }
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing key \"" + std::string(key) + "\" at " + path);
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError("expected a number at " + path);
  return v.get<double>();
}

inline Eigen::VectorXd as_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ParseError("expected a nonempty array at " + path);
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

inline Eigen::MatrixXd as_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ParseError("expected a 2-D array at " + path);
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  Eigen::MatrixXd out;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].empty()) throw ParseError("expected a row array at " + rp);
    if (r == 0) {
      cols = v[r].size();
      out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (v[r].size() != cols) {
      throw ParseError("ragged matrix row at " + rp);
    }
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(v[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return out;
}

inline CanonicalTerm parse_term(const json& t, const std::string& path) {
  if (!t.is_object()) throw ParseError("expected a term object at " + path);
  const json& kind = require(t, "kind", path);
  if (!kind.is_string()) throw ParseError("\"kind\" must be a string at " + path);
  const std::string k = kind.get<std::string>();
  const Eigen::MatrixXd D = as_matrix(require(t, "D", path), path + ".D");
  try {
    if (k == "exponential") {
      reject_unknown_keys(t, {"kind", "alpha", "D"}, path);
      return CanonicalTerm::exponential(as_number(require(t, "alpha", path), path + ".alpha"), D);
    }
    if (k == "quartic") {
      reject_unknown_keys(t, {"kind", "beta", "lambda", "D"}, path);
      return CanonicalTerm::quartic(as_number(require(t, "beta", path), path + ".beta"),
                                    as_number(require(t, "lambda", path), path + ".lambda"), D);
    }
    if (k == "log_quadratic") {
      reject_unknown_keys(t, {"kind", "c1", "c2", "D"}, path);
      return CanonicalTerm::log_quadratic(as_number(require(t, "c1", path), path + ".c1"),
                                          as_number(require(t, "c2", path), path + ".c2"), D);
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string(e.what()) + " at " + path);
  }
  throw ParseError("unknown term kind \"" + k + "\" at " + path +
                   " (expected exponential | quartic | log_quadratic)");
}

}  // namespace io_detail

[[nodiscard]] inline LoadedProblem parse_problem_text(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = io_detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("JSON syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(col),
                     line, col);
  }
  if (!doc.is_object()) throw ParseError("problem file must be a JSON object");
  io_detail::reject_unknown_keys(doc, {"n", "f", "terms", "solver"}, "$");

  const json& jn = io_detail::require(doc, "n", "$");
  if (!jn.is_number_integer() || jn.get<long>() <= 0)
    throw ParseError("\"n\" must be a positive integer at $.n");
  const Eigen::Index n = jn.get<Eigen::Index>();

  const Eigen::VectorXd f = io_detail::as_vector(io_detail::require(doc, "f", "$"), "$.f");
  if (f.size() != n)
    throw ParseError("\"f\" has length " + std::to_string(f.size()) + ", expected " +
                     std::to_string(n) + " at $.f");

  const json& jterms = io_detail::require(doc, "terms", "$");
  if (!jterms.is_array() || jterms.empty())
    throw ParseError("\"terms\" must be a nonempty array at $.terms");
  std::vector<CanonicalTerm> terms;
  for (std::size_t i = 0; i < jterms.size(); ++i) {
    CanonicalTerm term =
        io_detail::parse_term(jterms[i], "$.terms[" + std::to_string(i) + "]");
    if (term.cols() != n)
      throw ParseError("term map D has " + std::to_string(term.cols()) +
                       " columns, expected n = " + std::to_string(n) + " at $.terms[" +
                       std::to_string(i) + "].D");
    terms.push_back(std::move(term));
  }

  LoadedProblem out{FixedPointProblem(f, std::move(terms)), SolveOptions{}, 0, false};
  const Eigen::Index m = out.problem.dual_dim();

  if (auto it = doc.find("solver"); it != doc.end()) {
    const json& s = *it;
    if (!s.is_object()) throw ParseError("\"solver\" must be an object at $.solver");
    io_detail::reject_unknown_keys(s, {"box", "grid_steps", "tolerances", "seed"}, "$.solver");

    ScanGrid grid = ScanGrid::defaults(m);
    if (auto bit = s.find("box"); bit != s.end()) {
      const json& b = *bit;
      if (!b.is_array() || (b.size() != 1 && b.size() != static_cast<std::size_t>(m)))
        throw ParseError("\"box\" must list one [lo, hi] pair or one per dual axis at $.solver.box");
      for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) {
        const json& pair = b.size() == 1 ? b[0] : b[j];
        const std::string bp = "$.solver.box[" + std::to_string(b.size() == 1 ? 0 : j) + "]";
        if (!pair.is_array() || pair.size() != 2) throw ParseError("expected [lo, hi] at " + bp);
        grid.axes[j].lo = io_detail::as_number(pair[0], bp + "[0]");
        grid.axes[j].hi = io_detail::as_number(pair[1], bp + "[1]");
        if (!(grid.axes[j].lo < grid.axes[j].hi))
          throw ParseError("box requires lo < hi at " + bp);
      }
      out.has_grid_override = true;
    }
    if (auto git = s.find("grid_steps"); git != s.end()) {
      if (!git->is_number_integer() || git->get<long>() < 2)
        throw ParseError("\"grid_steps\" must be an integer >= 2 at $.solver.grid_steps");
      for (auto& ax : grid.axes) ax.steps = git->get<int>();
      out.has_grid_override = true;
    }
    if (out.has_grid_override) out.options.grid = grid;

    if (auto tit = s.find("tolerances"); tit != s.end()) {
      const json& t = *tit;
      if (!t.is_object()) throw ParseError("\"tolerances\" must be an object at $.solver.tolerances");
      io_detail::reject_unknown_keys(t, {"gtol", "gap_tol", "res_tol"}, "$.solver.tolerances");
      if (auto v = t.find("gtol"); v != t.end())
        out.options.tol.gtol = io_detail::as_number(*v, "$.solver.tolerances.gtol");
      if (auto v = t.find("gap_tol"); v != t.end())
        out.options.tol.gap_tol = io_detail::as_number(*v, "$.solver.tolerances.gap_tol");
      if (auto v = t.find("res_tol"); v != t.end())
        out.options.tol.res_tol = io_detail::as_number(*v, "$.solver.tolerances.res_tol");
    }
    if (auto sit = s.find("seed"); sit != s.end()) {
      if (!sit->is_number_integer() || sit->get<long long>() < 0)
        throw ParseError("\"seed\" must be a nonnegative integer at $.solver.seed");
      out.seed = sit->get<std::uint64_t>();
    }
  }
  return out;
}

[[nodiscard]] inline LoadedProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

}  // namespace fixpoint
