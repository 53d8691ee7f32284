// Command-line front end: solve | scan | verify | oracle over a JSON problem
// file. See README.md for the file schema and examples.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fixpoint/fixpoint.hpp"

namespace {

std::vector<std::pair<double, double>> parse_box_spec(const std::string& spec) {
  std::vector<std::pair<double, double>> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = spec.find(',', pos);
    const std::string part = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const std::size_t colon = part.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--box", "expected lo:hi[,lo:hi...], got \"" + spec + "\"");
    try {
      const double lo = std::stod(part.substr(0, colon));
      const double hi = std::stod(part.substr(colon + 1));
      if (!(lo < hi)) throw CLI::ValidationError("--box", "requires lo < hi");
      out.emplace_back(lo, hi);
    } catch (const std::invalid_argument&) {
      throw CLI::ValidationError("--box", "bad number in \"" + part + "\"");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void apply_box_override(fixpoint::ScanGrid& grid, const std::string& box_spec,
                        std::optional<int> grid_steps) {
  if (!box_spec.empty()) {
    auto ranges = parse_box_spec(box_spec);
    if (ranges.size() != 1 && ranges.size() != grid.axes.size())
      throw CLI::ValidationError("--box", "expected 1 or " + std::to_string(grid.axes.size()) +
                                              " ranges");
    for (std::size_t j = 0; j < grid.axes.size(); ++j) {
      const auto& r = ranges.size() == 1 ? ranges[0] : ranges[j];
      grid.axes[j].lo = r.first;
      grid.axes[j].hi = r.second;
    }
  }
  if (grid_steps)
    for (auto& ax : grid.axes) ax.steps = *grid_steps;
}

struct CommonArgs {
  std::string file;
  std::string box_spec;
  std::optional<int> grid_steps;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

fixpoint::LoadedProblem load(const CommonArgs& args) {
  fixpoint::LoadedProblem lp = fixpoint::load_problem_file(args.file);
  fixpoint::ScanGrid grid =
      lp.options.grid ? *lp.options.grid : fixpoint::ScanGrid::defaults(lp.problem.dual_dim());
  if (!args.box_spec.empty() || args.grid_steps) {
    apply_box_override(grid, args.box_spec, args.grid_steps);
    lp.options.grid = grid;
  }
  if (args.seed_given) lp.seed = args.seed;
  return lp;
}

std::vector<fixpoint::Interval> oracle_box_from(const fixpoint::LoadedProblem& lp,
                                                const std::vector<fixpoint::SolutionRecord>& recs,
                                                const std::string& spec) {
  const auto n = static_cast<std::size_t>(lp.problem.dim());
  if (!spec.empty()) {
    auto ranges = parse_box_spec(spec);
    if (ranges.size() != 1 && ranges.size() != n)
      throw CLI::ValidationError("--oracle-box", "expected 1 or " + std::to_string(n) + " ranges");
    std::vector<fixpoint::Interval> box(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& r = ranges.size() == 1 ? ranges[0] : ranges[j];
      box[j] = {r.first, r.second};
    }
    return box;
  }
  // default: a symmetric box comfortably containing every recovered point
  std::vector<fixpoint::Interval> box(n, {-1.0, 1.0});
  for (std::size_t j = 0; j < n; ++j) {
    double w = 1.0;
    for (const auto& r : recs)
      w = std::max(w, 1.5 * std::abs(r.x[static_cast<Eigen::Index>(j)]));
    box[j] = {-w, w};
  }
  return box;
}

int run_solve(const CommonArgs& args, const std::string& json_path) {
  fixpoint::LoadedProblem lp = load(args);
  const fixpoint::SolveResult result = fixpoint::solve(lp.problem, lp.options);
  fixpoint::print_solution_table(std::cout, result);
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) {
      std::cerr << "error: cannot write " << json_path << '\n';
      return 1;
    }
    out << fixpoint::report_to_json(result).dump(2) << '\n';
  }
  if (result.records.empty()) {
    std::cout << "no stationary point in box\n";
    return 2;
  }
  return 0;
}

int run_scan(const CommonArgs& args, const std::string& out_path) {
  fixpoint::LoadedProblem lp = load(args);
  fixpoint::ScanGrid grid =
      lp.options.grid ? *lp.options.grid : fixpoint::ScanGrid::defaults(lp.problem.dual_dim());
  const fixpoint::ScanResult res = fixpoint::scan_dual(lp.problem, grid, lp.options.tol);
  if (out_path.empty() || out_path == "-") {
    fixpoint::write_scan_csv(std::cout, res);
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return 1;
    }
    fixpoint::write_scan_csv(out, res);
  }
  return 0;
}

int run_verify(const CommonArgs& args, int starts, const std::string& oracle_box_spec) {
  fixpoint::LoadedProblem lp = load(args);
  const fixpoint::SolveResult result = fixpoint::solve(lp.problem, lp.options);
  fixpoint::print_solution_table(std::cout, result);

  const auto box = oracle_box_from(lp, result.records, oracle_box_spec);
  const int n_starts = starts > 0 ? starts : 2500 * static_cast<int>(lp.problem.dim());
  const auto pts = fixpoint::multistart_stationary_search(lp.problem, box, n_starts, lp.seed);
  const fixpoint::OracleReport rep = fixpoint::cross_validate(result.records, pts);
  fixpoint::print_oracle_report(std::cerr, rep, result.records);
  return rep.consistent() ? 0 : 1;
}

int run_oracle(const CommonArgs& args, int starts, const std::string& oracle_box_spec) {
  fixpoint::LoadedProblem lp = load(args);
  const auto box = oracle_box_from(lp, {}, oracle_box_spec);
  const int n_starts = starts > 0 ? starts : 2500 * static_cast<int>(lp.problem.dim());
  const auto pts = fixpoint::multistart_stationary_search(lp.problem, box, n_starts, lp.seed);
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"#", "x", "Pi", "|grad|", "inertia(+/-/0)"});
  for (std::size_t i = 0; i < pts.size(); ++i)
    rows.push_back({std::to_string(i + 1), fixpoint::fmt6(pts[i].x),
                    fixpoint::fmt6(pts[i].pi_value), fixpoint::fmt6(pts[i].grad_norm),
                    std::to_string(pts[i].hess_pos) + "/" + std::to_string(pts[i].hess_neg) +
                        "/" + std::to_string(pts[i].hess_zero)});
  fixpoint::report_detail::print_table(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixpoint: finds all fixed points of nonlinear potential operators by "
               "solving the canonical dual problem"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string json_path, out_path, oracle_box_spec;
  int starts = 0;

  auto add_common = [&](CLI::App* cmd, bool with_box) {
    cmd->add_option("file", args.file, "problem JSON file")->required();
    if (with_box) {
      cmd->add_option("--box", args.box_spec, "dual search box lo:hi[,lo:hi]");
      cmd->add_option("--grid", args.grid_steps, "grid nodes per axis");
    }
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&](std::uint64_t s) {
             args.seed = s;
             args.seed_given = true;
           },
           "seed for the multistart oracle")
        ->expected(1);
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the canonical dual, recover and label "
                                                "all fixed points");
  add_common(solve, true);
  solve->add_option("--json", json_path, "write a machine-readable report");

  CLI::App* scan = app.add_subcommand("scan", "export the dual landscape over a grid as CSV");
  add_common(scan, true);
  scan->add_option("--out", out_path, "CSV output path (default stdout)");

  CLI::App* verify = app.add_subcommand("verify", "solve, then cross-check against the primal "
                                                  "multistart oracle");
  add_common(verify, true);
  verify->add_option("--starts", starts, "number of oracle starts");
  verify->add_option("--oracle-box", oracle_box_spec, "primal search box lo:hi[,lo:hi]");

  CLI::App* oracle = app.add_subcommand("oracle", "run the primal multistart search alone");
  add_common(oracle, false);
  oracle->add_option("--starts", starts, "number of oracle starts");
  oracle->add_option("--oracle-box", oracle_box_spec, "primal search box lo:hi[,lo:hi]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(args, json_path);
    if (scan->parsed()) return run_scan(args, out_path);
    if (verify->parsed()) return run_verify(args, starts, oracle_box_spec);
    if (oracle->parsed()) return run_oracle(args, starts, oracle_box_spec);
  } catch (const fixpoint::ParseError& e) {
    std::cerr << args.file << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
