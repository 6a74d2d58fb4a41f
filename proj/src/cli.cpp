#include "riskshare/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "riskshare/errors.hpp"
#include "riskshare/io.hpp"
#include "riskshare/kkt_oracle.hpp"
#include "riskshare/nonnegativity.hpp"
#include "riskshare/solver_equal_share.hpp"
#include "riskshare/solver_friends.hpp"

namespace riskshare::cli {

namespace fs = std::filesystem;

namespace {

ResultDoc solve_to_doc(const ProblemSpec& spec, SolverChoice choice, double tolerance) {
  ResultDoc doc;
  doc.solver = choice;
  switch (choice) {
    case SolverChoice::friends: {
      SolveReport r = solve_friends(spec.model, spec.graph);
      doc.A = r.sharing.A;
      doc.objective = r.objective;
      doc.gamma = r.gamma_pairs;
      doc.residuals = r.diagnostics;
      break;
    }
    case SolverChoice::complete: {
      if (!spec.graph.is_complete()) {
        throw Error(ErrorKind::inapplicable_solver,
                    "the complete-graph solver needs a complete graph; this spec has " +
                        std::to_string(spec.graph.edge_count()) + " of " +
                        std::to_string(spec.graph.size() * (spec.graph.size() - 1) / 2) +
                        " possible edges (use solver=friends)");
      }
      SolveReport r = feng_complete(spec.model);
      doc.A = r.sharing.A;
      doc.objective = r.objective;
      doc.gamma = r.gamma_pairs;
      doc.residuals = r.diagnostics;
      break;
    }
    case SolverChoice::oracle: {
      VectorizedQP qp = build_qp(spec.model, spec.graph);
      KktSolution sol = solve_kkt(qp);
      SolveReport r = extract_sharing(sol, spec.model.size(), spec.graph);
      doc.A = r.sharing.A;
      doc.objective = r.objective;
      doc.gamma = r.gamma_pairs;
      doc.residuals = r.diagnostics;
      break;
    }
    case SolverChoice::equal_share: {
      EqualShareReport r = solve_equal_share(spec.model, spec.graph);
      doc.A = r.sharing.A;
      doc.objective = r.objective;
      doc.c_hat = r.c_hat;
      doc.residuals = r.diagnostics;
      break;
    }
  }
  doc.nonneg.push_back(check_entrywise(doc.A));

  const double scale = std::max(1.0, spec.model.mu().cwiseAbs().maxCoeff());
  if (doc.residuals.column_sum_residual > tolerance ||
      doc.residuals.fairness_residual > tolerance * scale) {
    throw Error(ErrorKind::feasibility_exceeded,
                "solved matrix misses the feasibility-report tolerance " +
                    std::to_string(tolerance) + ": column-sum residual " +
                    std::to_string(doc.residuals.column_sum_residual) + ", fairness residual " +
                    std::to_string(doc.residuals.fairness_residual));
  }
  return doc;
}

struct CliConfig {
  std::string spec_path;
  std::string out_path;
  std::string solver = "friends";
  double tolerance = 1e-9;
  int jobs = 1;
};

SolverChoice solver_or_throw(const std::string& name) {
  const auto parsed = parse_solver(name);
  if (!parsed) {
    throw Error(ErrorKind::parse_error,
                "unknown solver \"" + name + "\" (expected friends, equal-share, complete, "
                "or oracle)");
  }
  return *parsed;
}

void require_spec(const CliConfig& config) {
  if (config.spec_path.empty()) {
    throw Error(ErrorKind::parse_error, "--spec PATH is required");
  }
}

void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << content;
  } else {
    write_text_file(out_path, content);
  }
}

int run_solve_batch(const CliConfig& config, SolverChoice choice, std::ostream& err) {
  if (config.out_path.empty()) {
    throw Error(ErrorKind::parse_error,
                "--out DIR is required when --spec names a directory of specs");
  }
  if (config.jobs < 1) {
    throw Error(ErrorKind::parse_error,
                "--jobs must be at least 1, got " + std::to_string(config.jobs));
  }
  std::vector<fs::path> files;
  try {
    for (const auto& entry : fs::directory_iterator(config.spec_path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    fs::create_directories(config.out_path);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::io_error, std::string("batch directory error: ") + e.what());
  }
  std::sort(files.begin(), files.end());

  std::atomic<size_t> next{0};
  std::mutex failures_mutex;
  std::vector<std::pair<size_t, std::string>> failure_docs;
  std::atomic<int> worst_exit{0};

  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      const fs::path& file = files[i];
      try {
        ProblemSpec spec = load_problem_spec(file);
        ResultDoc doc = solve_to_doc(spec, choice, config.tolerance);
        const fs::path out_file =
            fs::path(config.out_path) / (file.stem().string() + ".result.json");
        write_text_file(out_file, result_doc_to_json(doc));
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(failures_mutex);
        failure_docs.emplace_back(i, error_json(e, file.string()));
        int expected = worst_exit.load();
        const int code = exit_code_for(e.kind());
        while (expected < code && !worst_exit.compare_exchange_weak(expected, code)) {
        }
      }
    }
  };

  const int thread_count = std::max(1, std::min<int>(config.jobs, static_cast<int>(files.size())));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(thread_count));
  for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::sort(failure_docs.begin(), failure_docs.end());
  for (const auto& [index, doc] : failure_docs) err << doc;
  return worst_exit.load();
}

int run_solve(const CliConfig& config, SolverChoice choice, std::ostream& out,
              std::ostream& err) {
  require_spec(config);
  if (fs::is_directory(config.spec_path)) {
    return run_solve_batch(config, choice, err);
  }
  ProblemSpec spec = load_problem_spec(config.spec_path);
  ResultDoc doc = solve_to_doc(spec, choice, config.tolerance);
  emit(result_doc_to_json(doc), config.out_path, out);
  return 0;
}

bool sigma_is_scaled_identity(const Eigen::MatrixXd& sigma) {
  const double c = sigma.diagonal().mean();
  const double deviation =
      (sigma - c * Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols())).cwiseAbs().maxCoeff();
  return deviation <= 1e-12 * std::max(1.0, std::abs(c));
}

int run_check(const CliConfig& config, const std::string& criteria_arg, std::ostream& out) {
  require_spec(config);
  ProblemSpec spec = load_problem_spec(config.spec_path);
  const bool complete_graph = spec.graph.is_complete();
  const bool scaled_identity = sigma_is_scaled_identity(spec.model.sigma());
  const bool two_agents = spec.model.size() == 2;

  struct Entry {
    const char* name;
    bool applicable;
  };
  const Entry catalogue[] = {
      {"scaled-identity", complete_graph && scaled_identity},
      {"general-pd", complete_graph},
      {"equal-share", true},
      {"covariance-threshold", true},
      {"two-agent", two_agents},
      {"entrywise-friends", true},
      {"entrywise-equal-share", true},
  };

  std::vector<std::string> requested;
  if (criteria_arg == "all") {
    for (const Entry& e : catalogue) {
      if (e.applicable) requested.push_back(e.name);
    }
  } else {
    std::stringstream names(criteria_arg);
    std::string name;
    while (std::getline(names, name, ',')) {
      if (name.empty()) continue;
      const auto* entry =
          std::find_if(std::begin(catalogue), std::end(catalogue),
                       [&](const Entry& e) { return name == e.name; });
      if (entry == std::end(catalogue)) {
        throw Error(ErrorKind::parse_error,
                    "unknown criterion \"" + name + "\" (expected scaled-identity, general-pd, "
                    "equal-share, covariance-threshold, two-agent, entrywise-friends, or "
                    "entrywise-equal-share)");
      }
      if (!entry->applicable) {
        throw Error(ErrorKind::inapplicable_criterion,
                    "criterion \"" + name + "\" does not apply to this spec (n = " +
                        std::to_string(spec.model.size()) +
                        (complete_graph ? ", complete graph" : ", incomplete graph") +
                        (scaled_identity ? ", scaled-identity sigma)" : ", general sigma)"));
      }
      requested.push_back(name);
    }
    if (requested.empty()) {
      throw Error(ErrorKind::parse_error, "--criteria needs \"all\" or a comma-separated list");
    }
  }

  std::vector<NonnegVerdict> verdicts;
  verdicts.reserve(requested.size());
  for (const std::string& name : requested) {
    if (name == "scaled-identity") {
      verdicts.push_back(check_complete_scaled_identity(spec.model.mu()));
    } else if (name == "general-pd") {
      verdicts.push_back(check_complete_general(spec.model));
    } else if (name == "equal-share") {
      verdicts.push_back(check_equal_share(c_hat(spec.model, spec.graph), spec.model.mu(),
                                           spec.graph.degrees()));
    } else if (name == "covariance-threshold") {
      verdicts.push_back(check_covariance_threshold(spec.model, spec.graph));
    } else if (name == "two-agent") {
      verdicts.push_back(check_two_agent(spec.model));
    } else if (name == "entrywise-friends") {
      NonnegVerdict v = check_entrywise(solve_friends(spec.model, spec.graph).sharing.A);
      v.criterion = "entrywise-friends";
      verdicts.push_back(std::move(v));
    } else {  // entrywise-equal-share
      NonnegVerdict v = check_entrywise(solve_equal_share(spec.model, spec.graph).sharing.A);
      v.criterion = "entrywise-equal-share";
      verdicts.push_back(std::move(v));
    }
  }

  emit(verdicts_to_json(verdicts), config.out_path, out);
  const bool all_hold =
      std::all_of(verdicts.begin(), verdicts.end(), [](const NonnegVerdict& v) { return v.holds; });
  return all_hold ? 0 : 1;
}

int run_heatmap(const CliConfig& config, SolverChoice choice, std::ostream& out) {
  require_spec(config);
  ProblemSpec spec = load_problem_spec(config.spec_path);
  ResultDoc doc = solve_to_doc(spec, choice, config.tolerance);
  emit(heatmap_csv(doc.A), config.out_path, out);
  return 0;
}

int run_simulate(const CliConfig& config, SolverChoice choice, std::int64_t samples,
                 std::uint64_t seed, std::ostream& out) {
  require_spec(config);
  ProblemSpec spec = load_problem_spec(config.spec_path);
  ResultDoc doc = solve_to_doc(spec, choice, config.tolerance);
  SimConfig sim{samples, seed, LossDistribution::gaussian};
  SimReport report = simulate_rule(doc.A, spec.model, sim);
  emit(sim_report_to_json(report, choice), config.out_path, out);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal peer-to-peer risk sharing on friendship networks"};
  app.require_subcommand(1);

  CliConfig config;
  app.add_option("--spec", config.spec_path,
                 "problem spec JSON (for solve: may be a directory of specs)");
  app.add_option("--out", config.out_path, "output file (or directory for batch solve)");
  app.add_option("--solver", config.solver, "friends | equal-share | complete | oracle")
      ->capture_default_str();
  app.add_option("--tolerance", config.tolerance,
                 "feasibility-report tolerance; checks the solved matrix only, never "
                 "alters solver internals")
      ->capture_default_str();
  app.add_option("--jobs", config.jobs, "parallel workers for a batch directory")
      ->capture_default_str();

  CLI::App* solve = app.add_subcommand("solve", "solve a spec and write a result document");
  CLI::App* check =
      app.add_subcommand("check", "evaluate nonnegativity criteria for a spec");
  std::string criteria = "all";
  check->add_option("--criteria", criteria,
                    "\"all\" or comma-separated criterion names")
      ->capture_default_str();
  CLI::App* heatmap = app.add_subcommand("heatmap", "solve and write the matrix as CSV");
  CLI::App* simulate = app.add_subcommand("simulate", "solve, then Monte-Carlo check the "
                                                      "variance prediction");
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  simulate->add_option("--samples", samples, "number of loss samples")->capture_default_str();
  simulate->add_option("--seed", seed, "random generator seed")->capture_default_str();
  CLI::App* oracle =
      app.add_subcommand("oracle", "solve through the independent verification route");
  for (CLI::App* sub : {solve, check, heatmap, simulate, oracle}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json(Error(ErrorKind::parse_error, e.what()));
    return exit_code_for(ErrorKind::parse_error);
  }

  try {
    if (solve->parsed()) {
      return run_solve(config, solver_or_throw(config.solver), out, err);
    }
    if (check->parsed()) {
      return run_check(config, criteria, out);
    }
    if (heatmap->parsed()) {
      return run_heatmap(config, solver_or_throw(config.solver), out);
    }
    if (simulate->parsed()) {
      return run_simulate(config, solver_or_throw(config.solver), samples, seed, out);
    }
    if (oracle->parsed()) {
      return run_solve(config, SolverChoice::oracle, out, err);
    }
    err << error_json(Error(ErrorKind::parse_error, "no subcommand given"));
    return exit_code_for(ErrorKind::parse_error);
  } catch (const Error& e) {
    err << error_json(e);
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << error_json(Error(ErrorKind::internal_inconsistency,
                            std::string("unexpected failure: ") + e.what()));
    return exit_code_for(ErrorKind::internal_inconsistency);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("riskshare");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace riskshare::cli
