#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "riskshare/errors.hpp"
#include "riskshare/graph.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/nonnegativity.hpp"
#include "riskshare/sharing.hpp"
#include "riskshare/simulate.hpp"

namespace riskshare {

// A problem instance as stored on disk:
//   { "mu": [...], "sigma": [[...], ...], "graph": { ... } }
// The graph fragment is either a named topology
//   {"kind": "complete"|"path"|"star", "n": N} or {"kind": "barbell", "clique_size": K}
// or an explicit edge list {"n": N, "edges": [[i, j], ...]} (optionally with
// "kind": "edges"). Loading validates through LossModel and Graph, so a
// malformed instance fails with the same error kinds the library uses.
struct ProblemSpec {
  LossModel model;
  Graph graph;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

ProblemSpec problem_spec_from_json(const std::string& text);
ProblemSpec load_problem_spec(const std::filesystem::path& path);

enum class SolverChoice { friends, equal_share, complete, oracle };

const char* solver_name(SolverChoice solver) noexcept;
std::optional<SolverChoice> parse_solver(const std::string& name) noexcept;
ConstraintClass solver_constraint_class(SolverChoice solver) noexcept;

// Result of one solve as serialized to disk. gamma is present for the
// friends/complete/oracle solvers (possibly empty), c_hat only for
// equal-share. Serialization uses shortest-round-trip floating point
// formatting and a stable key order, so identical results are byte-identical
// and documents round-trip losslessly.
struct ResultDoc {
  SolverChoice solver = SolverChoice::friends;
  Eigen::MatrixXd A;
  double objective = 0.0;
  std::optional<std::vector<GammaEntry>> gamma;
  std::optional<double> c_hat;
  std::vector<NonnegVerdict> nonneg;
  SolveDiagnostics residuals;
};

std::string result_doc_to_json(const ResultDoc& doc);
ResultDoc result_doc_from_json(const std::string& text);

// {"nonneg": [...]} — the cmd_check output document.
std::string verdicts_to_json(const std::vector<NonnegVerdict>& verdicts);

std::string sim_report_to_json(const SimReport& report, SolverChoice solver);

// n lines of n comma-separated values, 17 significant digits; row i holds the
// allocations received by agent i.
std::string heatmap_csv(const Eigen::MatrixXd& A);

// {"error": {"kind", "message", "exit_code"[, "file"]}} — the machine-readable
// document emitted on the error stream.
std::string error_json(const Error& error, const std::optional<std::string>& file = {});

}  // namespace riskshare
