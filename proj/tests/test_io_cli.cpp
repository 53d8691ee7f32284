#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "fixpoint/problem_io.hpp"
#include "fixpoint/report.hpp"

using namespace fixpoint;
namespace fs = std::filesystem;

namespace {

std::string problems_dir() { return FIXPOINT_PROBLEMS_DIR; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const fs::path tmp = fs::temp_directory_path();
  const fs::path out = tmp / "fixpoint_test_stdout.txt";
  const fs::path err = tmp / "fixpoint_test_stderr.txt";
  const std::string cmd = std::string(FIXPOINT_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r{-1, slurp(out), slurp(err)};
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream f(p);
  f << content;
  return p;
}

}  // namespace

TEST_CASE("problem files parse into problems") {
  const auto lp = load_problem_file(problems_dir() + "/example1.json");
  CHECK(lp.problem.dim() == 2);
  CHECK(lp.problem.dual_dim() == 2);
  CHECK(lp.problem.f()[0] == 2.0);
  CHECK(lp.problem.term(0).kind() == TermKind::Exponential);
  CHECK(lp.problem.term(1).kind() == TermKind::Quartic);
  REQUIRE(lp.options.grid.has_value());
  CHECK(lp.options.grid->axes[0].lo == -10.0);
  CHECK(lp.options.grid->axes[0].steps == 401);

  const auto lp2 = load_problem_file(problems_dir() + "/example2.json");
  CHECK(lp2.problem.dual_dim() == 1);
  CHECK_FALSE(lp2.options.grid.has_value());
}

TEST_CASE("strict schema") {
  const char* base = R"({"n": 1, "f": [1], "terms": [{"kind": "quartic", "beta": 1, "lambda": 0, "D": [[1]]}]})";
  CHECK_NOTHROW(parse_problem_text(base));

  CHECK_THROWS_WITH(
      parse_problem_text(
          R"({"n": 1, "f": [1], "extra": 0, "terms": [{"kind": "quartic", "beta": 1, "lambda": 0, "D": [[1]]}]})"),
      Catch::Matchers::ContainsSubstring("extra"));
  CHECK_THROWS_WITH(
      parse_problem_text(
          R"({"n": 1, "f": [1], "terms": [{"kind": "quartic", "beta": 1, "lambda": 0, "D": [[1]], "alpha": 2}]})"),
      Catch::Matchers::ContainsSubstring("terms[0]"));
  CHECK_THROWS_WITH(
      parse_problem_text(
          R"({"n": 1, "f": [1], "terms": [{"kind": "cubic", "D": [[1]]}]})"),
      Catch::Matchers::ContainsSubstring("cubic"));
  CHECK_THROWS_WITH(
      parse_problem_text(
          R"({"n": 2, "f": [1, 2], "terms": [{"kind": "quartic", "beta": 1, "lambda": 0, "D": [[1]]}]})"),
      Catch::Matchers::ContainsSubstring("columns"));
  CHECK_THROWS_WITH(
      parse_problem_text(
          R"({"n": 2, "f": [1], "terms": [{"kind": "quartic", "beta": 1, "lambda": 0, "D": [[1, 0]]}]})"),
      Catch::Matchers::ContainsSubstring("length"));
  CHECK_THROWS_WITH(
      parse_problem_text(
          R"({"n": 1, "f": [1], "terms": [{"kind": "quartic", "beta": -1, "lambda": 0, "D": [[1]]}]})"),
      Catch::Matchers::ContainsSubstring("beta > 0"));
  CHECK_THROWS_WITH(
      parse_problem_text(
          R"({"n": 1, "f": [1], "terms": [{"kind": "quartic", "beta": 1, "lambda": 0, "D": [[1], [1, 2]]}]})"),
      Catch::Matchers::ContainsSubstring("ragged"));
}

TEST_CASE("syntax errors carry line and column") {
  try {
    (void)parse_problem_text("{\n  \"n\": 1,\n  oops\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.col >= 1);
  }
}

TEST_CASE("solver block") {
  const auto lp = parse_problem_text(R"({
    "n": 1, "f": [0.5],
    "terms": [{"kind": "quartic", "beta": 1, "lambda": 2, "D": [[1]]}],
    "solver": {"box": [[-20, 20]], "grid_steps": 101,
               "tolerances": {"gtol": 1e-9, "gap_tol": 1e-5, "res_tol": 1e-7},
               "seed": 42}})");
  REQUIRE(lp.options.grid.has_value());
  CHECK(lp.options.grid->axes[0].lo == -20.0);
  CHECK(lp.options.grid->axes[0].steps == 101);
  CHECK(lp.options.tol.gtol == 1e-9);
  CHECK(lp.options.tol.gap_tol == 1e-5);
  CHECK(lp.options.tol.res_tol == 1e-7);
  CHECK(lp.seed == 42);

  CHECK_THROWS_WITH(parse_problem_text(R"({
    "n": 1, "f": [0.5],
    "terms": [{"kind": "quartic", "beta": 1, "lambda": 2, "D": [[1]]}],
    "solver": {"bogus": 1}})"),
                    Catch::Matchers::ContainsSubstring("bogus"));
}

TEST_CASE("cli solve prints the records and writes the report") {
  const fs::path report = fs::temp_directory_path() / "fixpoint_report.json";
  const auto r = run_cli("solve " + problems_dir() + "/example1.json --json " + report.string());
  CAPTURE(r.out, r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("6.78671") != std::string::npos);
  CHECK(r.out.find("global_stable") != std::string::npos);

  // the JSON report reproduces the printed table at six significant digits
  nlohmann::json doc = nlohmann::json::parse(slurp(report));
  REQUIRE(doc["records"].size() == 5);
  for (const auto& rec : doc["records"]) {
    CHECK(r.out.find(fmt6(rec["pi"].get<double>())) != std::string::npos);
    CHECK(r.out.find(fmt6(rec["pid"].get<double>())) != std::string::npos);
    for (const double v : rec["sigma"].get<std::vector<double>>())
      CHECK(r.out.find(fmt6(v)) != std::string::npos);
    for (const double v : rec["x"].get<std::vector<double>>())
      CHECK(r.out.find(fmt6(v)) != std::string::npos);
  }
}

TEST_CASE("cli solve exit code 2 when the box excludes everything") {
  const auto r = run_cli("solve " + problems_dir() + "/example2.json --box 100:200");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("no stationary point in box") != std::string::npos);
}

TEST_CASE("cli reports parse errors with location") {
  const fs::path bad = write_temp("fixpoint_bad.json", "{\n  \"n\": 1,\n");
  const auto r = run_cli("solve " + bad.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("line") != std::string::npos);
}

TEST_CASE("cli scan writes the landscape CSV") {
  const fs::path csv = fs::temp_directory_path() / "fixpoint_scan.csv";
  const auto r = run_cli("scan " + problems_dir() + "/example2.json --box -100:5 --grid 2001 --out " +
                         csv.string());
  REQUIRE(r.exit_code == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("sigma_1,pid,mask\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2002);

  const auto r3 = run_cli("scan " + problems_dir() + "/example3.json");
  REQUIRE(r3.exit_code == 0);
  CHECK(r3.out.find(",,1\n") != std::string::npos);  // masked pole cells
}

TEST_CASE("cli scan refuses three dual dimensions") {
  const fs::path p = write_temp("fixpoint_m3.json", R"({
    "n": 1, "f": [1],
    "terms": [
      {"kind": "quartic", "beta": 1, "lambda": 0, "D": [[1]]},
      {"kind": "quartic", "beta": 1, "lambda": 1, "D": [[1]]},
      {"kind": "quartic", "beta": 1, "lambda": 2, "D": [[1]]}
    ]})");
  const auto r = run_cli("scan " + p.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("m <= 2") != std::string::npos);
}

TEST_CASE("cli verify accepts the examples and rejects corrupt input") {
  const auto r = run_cli("verify " + problems_dir() + "/example2.json");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  CHECK(r.err.find("consistent") != std::string::npos);

  const fs::path bad = write_temp("fixpoint_nmismatch.json", R"({
    "n": 3, "f": [1, 2],
    "terms": [{"kind": "quartic", "beta": 1, "lambda": 0, "D": [[1, 0, 0]]}]})");
  const auto rb = run_cli("verify " + bad.string());
  CHECK(rb.exit_code == 1);
}

TEST_CASE("cli oracle lists the stationary points") {
  const auto r = run_cli("oracle " + problems_dir() + "/example2.json --starts 1500 --oracle-box -1:1");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("-9.84726") != std::string::npos);
}
