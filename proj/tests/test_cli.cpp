#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "riskshare/cli.hpp"
#include "riskshare/io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using riskshare::ResultDoc;
using riskshare::SolverChoice;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult result;
  result.code = riskshare::cli::run(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::string fixture_path(const char* name) {
  return riskshare::testing::fixture(name).string();
}

int binary_exit(const std::string& args) {
  const std::string command =
      std::string(RISKSHARE_CLI_BIN) + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "riskshare_cli_tests";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("solve: result document on stdout, exit 0") {
  const CliResult r = run_cli({"solve", "--spec", fixture_path("sec_2_2_2.json")});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());

  const ResultDoc doc = riskshare::result_doc_from_json(r.out);
  CHECK(doc.solver == SolverChoice::friends);
  CHECK(doc.objective == doctest::Approx(0.6).epsilon(1e-12));
  REQUIRE(doc.gamma.has_value());
  CHECK(doc.gamma->size() == 2);
  CHECK((*doc.gamma)[0].value == doctest::Approx(0.4).epsilon(1e-12));
  REQUIRE(doc.nonneg.size() == 1);
  CHECK(doc.nonneg[0].criterion == "entrywise");
  CHECK(doc.nonneg[0].holds);
  CHECK(doc.residuals.column_sum_residual <= 1e-12);

  // Determinism: an identical invocation produces identical bytes.
  CHECK(run_cli({"solve", "--spec", fixture_path("sec_2_2_2.json")}).out == r.out);
}

TEST_CASE("solve: equal-share family carries c_hat") {
  const CliResult r = run_cli(
      {"solve", "--spec", fixture_path("sec_2_6_3.json"), "--solver", "equal-share"});
  REQUIRE(r.code == 0);
  const ResultDoc doc = riskshare::result_doc_from_json(r.out);
  CHECK(doc.solver == SolverChoice::equal_share);
  REQUIRE(doc.c_hat.has_value());
  CHECK(*doc.c_hat == doctest::Approx(4.0 / 39.0).epsilon(1e-12));
  CHECK(doc.objective == doctest::Approx(25.0 / 26.0).epsilon(1e-12));
  CHECK_FALSE(doc.gamma.has_value());
}

TEST_CASE("solve: complete solver equals friends on a complete graph, refuses otherwise") {
  const CliResult closed = run_cli(
      {"solve", "--spec", fixture_path("sec_2_6_1.json"), "--solver", "complete"});
  const CliResult network = run_cli(
      {"solve", "--spec", fixture_path("sec_2_6_1.json"), "--solver", "friends"});
  REQUIRE(closed.code == 0);
  REQUIRE(network.code == 0);
  const ResultDoc a = riskshare::result_doc_from_json(closed.out);
  const ResultDoc b = riskshare::result_doc_from_json(network.out);
  CHECK(riskshare::testing::max_abs_diff(a.A, b.A) <= 1e-12);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-13));

  const CliResult refused = run_cli(
      {"solve", "--spec", fixture_path("sec_2_2_2.json"), "--solver", "complete"});
  CHECK(refused.code == 2);
  CHECK(refused.out.empty());
  CHECK(refused.err.find("\"kind\": \"inapplicable_solver\"") != std::string::npos);
}

TEST_CASE("oracle subcommand is an alias for solve --solver oracle") {
  const CliResult direct = run_cli({"oracle", "--spec", fixture_path("sec_2_2_2.json")});
  const CliResult via_solve = run_cli(
      {"solve", "--spec", fixture_path("sec_2_2_2.json"), "--solver", "oracle"});
  REQUIRE(direct.code == 0);
  CHECK(direct.out == via_solve.out);

  const ResultDoc doc = riskshare::result_doc_from_json(direct.out);
  CHECK(doc.solver == SolverChoice::oracle);
  CHECK(doc.objective == doctest::Approx(0.6).epsilon(1e-9));
  REQUIRE(doc.gamma.has_value());
  REQUIRE(doc.gamma->size() == 2);
  CHECK((*doc.gamma)[0].i == 4);
  CHECK((*doc.gamma)[0].value == doctest::Approx(0.4).epsilon(1e-8));
}

TEST_CASE("solve: every solver's matrix revalidates against its constraints") {
  for (const char* solver : {"friends", "equal-share", "complete", "oracle"}) {
    CAPTURE(solver);
    const CliResult r = run_cli(
        {"solve", "--spec", fixture_path("sec_2_2_1.json"), "--solver", solver});
    REQUIRE(r.code == 0);
    const ResultDoc doc = riskshare::result_doc_from_json(r.out);
    const int n = 4;
    CHECK((doc.A.colwise().sum() - Eigen::RowVectorXd::Ones(n)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((doc.A * Eigen::VectorXd::Ones(n) - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <=
          1e-9);
  }
}

TEST_CASE("check: complete graph with identity covariance runs the full catalogue") {
  const CliResult r = run_cli({"check", "--spec", fixture_path("sec_2_6_1.json")});
  CHECK(r.code == 1);  // ran fine, but some criteria are violated

  const nlohmann::json doc = nlohmann::json::parse(r.out);
  REQUIRE(doc.contains("nonneg"));
  std::vector<std::string> names;
  for (const auto& v : doc["nonneg"]) names.push_back(v["criterion"].get<std::string>());
  CHECK(names == std::vector<std::string>{"scaled-identity", "general-pd", "equal-share",
                                          "covariance-threshold", "entrywise-friends",
                                          "entrywise-equal-share"});

  // mu = (1/4, 1, 4) spreads too far: the closed-form matrix dips negative,
  // the equal-share family does not.
  CHECK(doc["nonneg"][0]["holds"] == false);
  CHECK(doc["nonneg"][1]["holds"] == false);
  CHECK(doc["nonneg"][2]["holds"] == true);
  CHECK(doc["nonneg"][4]["holds"] == false);   // entrywise-friends
  CHECK(doc["nonneg"][5]["holds"] == true);    // entrywise-equal-share
  CHECK(doc["nonneg"][0]["lhs"].get<double>() == doctest::Approx(18.0));
  CHECK(doc["nonneg"][0]["rhs"].get<double>() == doctest::Approx(273.0 / 16.0));
}

TEST_CASE("check: all criteria hold for iid agents, exit 0") {
  const CliResult r = run_cli({"check", "--spec", fixture_path("sec_2_2_1.json")});
  CHECK(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  for (const auto& v : doc["nonneg"]) {
    CAPTURE(v["criterion"].get<std::string>());
    CHECK(v["holds"] == true);
    CHECK(v["witness"].is_null());
  }
}

TEST_CASE("check: two-agent instance fails every applicable criterion") {
  const CliResult r = run_cli({"check", "--spec", fixture_path("sec_2_6_4.json")});
  CHECK(r.code == 1);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  std::vector<std::string> names;
  for (const auto& v : doc["nonneg"]) {
    names.push_back(v["criterion"].get<std::string>());
    CHECK(v["holds"] == false);
  }
  // Sigma is not a scaled identity, so that criterion drops out of "all".
  CHECK(names == std::vector<std::string>{"general-pd", "equal-share", "covariance-threshold",
                                          "two-agent", "entrywise-friends",
                                          "entrywise-equal-share"});
  for (const auto& v : doc["nonneg"]) {
    if (v["criterion"] == "two-agent") {
      CHECK(v["lhs"].get<double>() == doctest::Approx(3.0));
      CHECK(v["rhs"].get<double>() == doctest::Approx(29.0 / 12.0));
      CHECK(v["witness"][0] == 1);
      CHECK(v["witness"][1] == 2);
    }
  }
}

TEST_CASE("check: named criteria run in the requested order") {
  const CliResult r = run_cli({"check", "--spec", fixture_path("sec_2_6_3.json"),
                               "--criteria", "covariance-threshold,equal-share"});
  CHECK(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  REQUIRE(doc["nonneg"].size() == 2);
  CHECK(doc["nonneg"][0]["criterion"] == "covariance-threshold");
  CHECK(doc["nonneg"][1]["criterion"] == "equal-share");
}

TEST_CASE("check: inapplicable and unknown criteria") {
  const CliResult arity = run_cli({"check", "--spec", fixture_path("sec_2_2_2.json"),
                                   "--criteria", "two-agent"});
  CHECK(arity.code == 2);
  CHECK(arity.err.find("\"kind\": \"inapplicable_criterion\"") != std::string::npos);

  const CliResult incomplete = run_cli({"check", "--spec", fixture_path("sec_2_6_2.json"),
                                        "--criteria", "scaled-identity"});
  CHECK(incomplete.code == 2);
  CHECK(incomplete.err.find("\"kind\": \"inapplicable_criterion\"") != std::string::npos);

  const CliResult unknown = run_cli({"check", "--spec", fixture_path("sec_2_2_1.json"),
                                     "--criteria", "totally-positive"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("\"kind\": \"parse_error\"") != std::string::npos);
}

TEST_CASE("heatmap: CSV of the solved matrix") {
  const CliResult r = run_cli({"heatmap", "--spec", fixture_path("sec_2_2_1.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out == "0.25,0.25,0.25,0.25\n0.25,0.25,0.25,0.25\n"
                 "0.25,0.25,0.25,0.25\n0.25,0.25,0.25,0.25\n");

  const CliResult es = run_cli({"heatmap", "--spec", fixture_path("sec_2_6_5.json"),
                                "--solver", "equal-share"});
  REQUIRE(es.code == 0);
  CHECK(es.out.substr(0, 5) == "-0.35");  // hub diagonal -7/20
}

TEST_CASE("simulate: deterministic given a seed") {
  const std::vector<std::string> args = {"simulate", "--spec", fixture_path("sec_2_2_2.json"),
                                         "--samples", "20000", "--seed", "31"};
  const CliResult first = run_cli(args);
  REQUIRE(first.code == 0);
  CHECK(run_cli(args).out == first.out);

  const nlohmann::json doc = nlohmann::json::parse(first.out);
  CHECK(doc["solver"] == "friends");
  CHECK(doc["samples"] == 20000);
  CHECK(doc["seed"] == 31);
  CHECK(doc["allocation_error"].get<double>() <= 1e-10);
  CHECK(doc["predicted"].get<double>() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(doc["variance_sum"].get<double>() ==
        doctest::Approx(0.6).epsilon(0.05));  // CLT noise at 2e4 samples

  const CliResult reseeded = run_cli({"simulate", "--spec", fixture_path("sec_2_2_2.json"),
                                      "--samples", "20000", "--seed", "32"});
  CHECK(reseeded.out != first.out);
}

TEST_CASE("simulate: a single sample has zero variance but exact allocation") {
  const CliResult r = run_cli({"simulate", "--spec", fixture_path("sec_2_6_3.json"),
                               "--solver", "equal-share", "--samples", "1", "--seed", "9"});
  REQUIRE(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc["variance_sum"].get<double>() == 0.0);
  CHECK(doc["allocation_error"].get<double>() <= 1e-10);
}

TEST_CASE("error paths: missing file, malformed JSON, invalid model") {
  const CliResult missing = run_cli({"solve", "--spec", "/nonexistent/risk.json"});
  CHECK(missing.code == 4);
  CHECK(missing.err.find("\"kind\": \"io_error\"") != std::string::npos);
  CHECK(missing.err.find("\"exit_code\": 4") != std::string::npos);

  const fs::path dir = scratch_dir();
  const fs::path broken = dir / "broken.json";
  riskshare::write_text_file(broken, "{\"mu\": [1, 1], ");
  const CliResult malformed = run_cli({"solve", "--spec", broken.string()});
  CHECK(malformed.code == 2);
  CHECK(malformed.err.find("\"kind\": \"parse_error\"") != std::string::npos);

  const fs::path indefinite = dir / "indefinite.json";
  riskshare::write_text_file(indefinite,
                             R"({"mu": [1, 1], "sigma": [[1, 2], [2, 1]],
                                 "graph": {"kind": "complete", "n": 2}})");
  const CliResult bad_model = run_cli({"solve", "--spec", indefinite.string()});
  CHECK(bad_model.code == 2);
  CHECK(bad_model.err.find("\"kind\": \"sigma_not_positive_definite\"") != std::string::npos);

  const CliResult no_spec = run_cli({"solve"});
  CHECK(no_spec.code == 2);
  CHECK(no_spec.err.find("--spec") != std::string::npos);

  const CliResult bad_solver = run_cli(
      {"solve", "--spec", fixture_path("sec_2_2_1.json"), "--solver", "newton"});
  CHECK(bad_solver.code == 2);
  CHECK(bad_solver.err.find("\"kind\": \"parse_error\"") != std::string::npos);

  fs::remove_all(dir);
}

TEST_CASE("tolerance gate: reporting-only, but it can refuse a result") {
  // The oracle's minimum-norm solve leaves residuals around machine epsilon;
  // they are nonzero, so an absurdly tight tolerance must trip the gate.
  const CliResult normal = run_cli(
      {"solve", "--spec", fixture_path("sec_2_2_2.json"), "--solver", "oracle"});
  REQUIRE(normal.code == 0);
  const ResultDoc doc = riskshare::result_doc_from_json(normal.out);
  REQUIRE(doc.residuals.column_sum_residual > 1e-18);

  const CliResult tight = run_cli({"solve", "--spec", fixture_path("sec_2_2_2.json"),
                                   "--solver", "oracle", "--tolerance", "1e-18"});
  CHECK(tight.code == 3);
  CHECK(tight.err.find("\"kind\": \"feasibility_exceeded\"") != std::string::npos);
  CHECK(tight.err.find("\"exit_code\": 3") != std::string::npos);

  // A loose tolerance changes nothing about the solution bytes.
  const CliResult loose = run_cli({"solve", "--spec", fixture_path("sec_2_2_2.json"),
                                   "--solver", "oracle", "--tolerance", "0.5"});
  CHECK(loose.out == normal.out);
}

TEST_CASE("--out writes the same bytes to a file") {
  const fs::path dir = scratch_dir();
  const fs::path out_file = dir / "result.json";
  const CliResult to_stdout = run_cli({"solve", "--spec", fixture_path("sec_2_6_2.json")});
  const CliResult to_file = run_cli(
      {"solve", "--spec", fixture_path("sec_2_6_2.json"), "--out", out_file.string()});
  REQUIRE(to_file.code == 0);
  CHECK(to_file.out.empty());
  CHECK(riskshare::read_text_file(out_file) == to_stdout.out);
  fs::remove_all(dir);
}

TEST_CASE("batch solve over a directory") {
  const fs::path dir = scratch_dir();
  const fs::path specs = dir / "specs";
  const fs::path results = dir / "results";
  fs::create_directories(specs);
  fs::copy_file(riskshare::testing::fixture("sec_2_2_1.json"), specs / "a.json");
  fs::copy_file(riskshare::testing::fixture("sec_2_6_2.json"), specs / "b.json");
  riskshare::write_text_file(specs / "c.json", "{broken");

  SUBCASE("--out is mandatory") {
    const CliResult r = run_cli({"solve", "--spec", specs.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("--out") != std::string::npos);
  }

  SUBCASE("--jobs must be positive") {
    const CliResult r = run_cli({"solve", "--spec", specs.string(), "--out", results.string(),
                                 "--jobs", "0"});
    CHECK(r.code == 2);
  }

  SUBCASE("good specs are solved, the bad one is reported, exit is the worst code") {
    const CliResult r = run_cli(
        {"solve", "--spec", specs.string(), "--out", results.string(), "--jobs", "2"});
    CHECK(r.code == 2);  // the parse error dominates
    CHECK(r.err.find("\"kind\": \"parse_error\"") != std::string::npos);
    CHECK(r.err.find("c.json") != std::string::npos);

    REQUIRE(fs::exists(results / "a.result.json"));
    REQUIRE(fs::exists(results / "b.result.json"));
    CHECK_FALSE(fs::exists(results / "c.result.json"));

    // Batch output matches the single-shot solve byte for byte.
    const CliResult single = run_cli({"solve", "--spec", (specs / "a.json").string()});
    CHECK(riskshare::read_text_file(results / "a.result.json") == single.out);

    // And a re-run with different parallelism is identical.
    const fs::path results1 = dir / "results_serial";
    const CliResult serial = run_cli(
        {"solve", "--spec", specs.string(), "--out", results1.string(), "--jobs", "1"});
    CHECK(serial.code == 2);
    CHECK(riskshare::read_text_file(results1 / "a.result.json") ==
          riskshare::read_text_file(results / "a.result.json"));
    CHECK(riskshare::read_text_file(results1 / "b.result.json") ==
          riskshare::read_text_file(results / "b.result.json"));
  }

  fs::remove_all(dir);
}

TEST_CASE("help and argument errors") {
  const CliResult help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("solve") != std::string::npos);
  CHECK(help.out.find("simulate") != std::string::npos);

  const CliResult none = run_cli({});
  CHECK(none.code == 2);
  CHECK(none.err.find("\"kind\": \"parse_error\"") != std::string::npos);

  const CliResult unknown_flag = run_cli({"solve", "--frobnicate"});
  CHECK(unknown_flag.code == 2);
}

TEST_CASE("installed binary exits with the documented codes") {
  CHECK(binary_exit("solve --spec " + fixture_path("sec_2_2_2.json")) == 0);
  CHECK(binary_exit("check --spec " + fixture_path("sec_2_6_1.json")) == 1);
  CHECK(binary_exit("solve --spec " + fixture_path("sec_2_2_2.json") + " --solver complete") ==
        2);
  CHECK(binary_exit("solve --spec " + fixture_path("sec_2_2_2.json") +
                    " --solver oracle --tolerance 1e-18") == 3);
  CHECK(binary_exit("solve --spec /nonexistent/risk.json") == 4);

  // The binary and the library entry point produce identical bytes.
  const fs::path dir = scratch_dir();
  const fs::path out_file = dir / "bin.json";
  const std::string command = std::string(RISKSHARE_CLI_BIN) + " solve --spec " +
                              fixture_path("sec_2_2_3.json") + " --out " + out_file.string() +
                              " > /dev/null 2> /dev/null";
  REQUIRE(std::system(command.c_str()) == 0);
  const CliResult in_process = run_cli({"solve", "--spec", fixture_path("sec_2_2_3.json")});
  CHECK(riskshare::read_text_file(out_file) == in_process.out);
  fs::remove_all(dir);
}
