#include "riskshare/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace riskshare {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorKind::parse_error, what);
}

const ordered_json& require(const ordered_json& j, const char* key, const char* context) {
  auto it = j.find(key);
  if (it == j.end()) {
    parse_fail(std::string(context) + " is missing required key \"" + key + "\"");
  }
  return *it;
}

double as_number(const ordered_json& j, const std::string& context) {
  if (!j.is_number()) parse_fail(context + " must be a number");
  return j.get<double>();
}

int as_int(const ordered_json& j, const std::string& context) {
  if (!j.is_number_integer()) parse_fail(context + " must be an integer");
  return j.get<int>();
}

Eigen::VectorXd parse_vector(const ordered_json& j, const std::string& context) {
  if (!j.is_array()) parse_fail(context + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = as_number(j[i], context + "[" + std::to_string(i) + "]");
  }
  return v;
}

Eigen::MatrixXd parse_matrix(const ordered_json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) parse_fail(context + " must be a non-empty array of rows");
  const size_t rows = j.size();
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) parse_fail(context + " rows must be non-empty arrays");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      parse_fail(context + " row " + std::to_string(r) + " has " +
                 std::to_string(j[r].size()) + " entries, expected " + std::to_string(cols));
    }
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(j[r][c], context + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

Graph parse_graph(const ordered_json& j) {
  if (!j.is_object()) parse_fail("\"graph\" must be an object");
  std::string kind = "edges";
  if (auto it = j.find("kind"); it != j.end()) {
    if (!it->is_string()) parse_fail("\"graph.kind\" must be a string");
    kind = it->get<std::string>();
  }
  if (kind == "complete") return Graph::complete(as_int(require(j, "n", "graph"), "graph.n"));
  if (kind == "path") return Graph::path(as_int(require(j, "n", "graph"), "graph.n"));
  if (kind == "star") return Graph::star(as_int(require(j, "n", "graph"), "graph.n"));
  if (kind == "barbell") {
    return Graph::barbell(as_int(require(j, "clique_size", "graph"), "graph.clique_size"));
  }
  if (kind == "edges") {
    const int n = as_int(require(j, "n", "graph"), "graph.n");
    const ordered_json& edges = require(j, "edges", "graph");
    if (!edges.is_array()) parse_fail("\"graph.edges\" must be an array of pairs");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(edges.size());
    for (size_t e = 0; e < edges.size(); ++e) {
      const auto& pair = edges[e];
      if (!pair.is_array() || pair.size() != 2) {
        parse_fail("\"graph.edges[" + std::to_string(e) + "]\" must be a pair [i, j]");
      }
      pairs.emplace_back(as_int(pair[0], "graph.edges[" + std::to_string(e) + "][0]"),
                         as_int(pair[1], "graph.edges[" + std::to_string(e) + "][1]"));
    }
    return Graph::from_edges(n, pairs);
  }
  parse_fail("unknown graph kind \"" + kind + "\" (expected complete, barbell, path, star, "
             "or edges)");
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json verdict_to_json(const NonnegVerdict& v) {
  ordered_json j;
  j["criterion"] = v.criterion;
  j["holds"] = v.holds;
  j["lhs"] = v.lhs;
  j["rhs"] = v.rhs;
  j["witness"] = v.witness ? ordered_json::array({v.witness->first, v.witness->second})
                           : ordered_json(nullptr);
  return j;
}

NonnegVerdict verdict_from_json(const ordered_json& j, const std::string& context) {
  NonnegVerdict v;
  const auto& crit = require(j, "criterion", context.c_str());
  if (!crit.is_string()) parse_fail(context + ".criterion must be a string");
  v.criterion = crit.get<std::string>();
  const auto& holds = require(j, "holds", context.c_str());
  if (!holds.is_boolean()) parse_fail(context + ".holds must be a boolean");
  v.holds = holds.get<bool>();
  v.lhs = as_number(require(j, "lhs", context.c_str()), context + ".lhs");
  v.rhs = as_number(require(j, "rhs", context.c_str()), context + ".rhs");
  const auto& witness = require(j, "witness", context.c_str());
  if (!witness.is_null()) {
    if (!witness.is_array() || witness.size() != 2) {
      parse_fail(context + ".witness must be null or a pair [i, j]");
    }
    v.witness = {as_int(witness[0], context + ".witness[0]"),
                 as_int(witness[1], context + ".witness[1]")};
  }
  return v;
}

ordered_json diagnostics_to_json(const SolveDiagnostics& d) {
  ordered_json j;
  j["column_sum"] = d.column_sum_residual;
  j["fairness"] = d.fairness_residual;
  j["linear_system"] = d.linear_system_residual;
  j["condition_estimate"] = d.condition_estimate;
  return j;
}

}  // namespace

const char* constraint_class_name(ConstraintClass c) noexcept {
  switch (c) {
    case ConstraintClass::friends: return "friends";
    case ConstraintClass::equal_share: return "equal_share";
    case ConstraintClass::complete: return "complete";
    case ConstraintClass::kkt: return "kkt";
  }
  return "unknown";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::io_error, "cannot open \"" + path.string() + "\" for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorKind::io_error, "failed while reading \"" + path.string() + "\"");
  }
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::io_error, "cannot open \"" + path.string() + "\" for writing");
  }
  out << content;
  out.flush();
  if (!out) {
    throw Error(ErrorKind::io_error, "failed while writing \"" + path.string() + "\"");
  }
}

ProblemSpec problem_spec_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) parse_fail("problem spec must be a JSON object");
  Eigen::VectorXd mu = parse_vector(require(j, "mu", "problem spec"), "\"mu\"");
  Eigen::MatrixXd sigma = parse_matrix(require(j, "sigma", "problem spec"), "\"sigma\"");
  Graph graph = parse_graph(require(j, "graph", "problem spec"));
  LossModel model = LossModel::validate(std::move(mu), std::move(sigma));
  if (graph.size() != model.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "graph has " + std::to_string(graph.size()) + " vertices but the loss model has " +
                    std::to_string(model.size()) + " agents");
  }
  return ProblemSpec{std::move(model), std::move(graph)};
}

ProblemSpec load_problem_spec(const std::filesystem::path& path) {
  return problem_spec_from_json(read_text_file(path));
}

const char* solver_name(SolverChoice solver) noexcept {
  switch (solver) {
    case SolverChoice::friends: return "friends";
    case SolverChoice::equal_share: return "equal-share";
    case SolverChoice::complete: return "complete";
    case SolverChoice::oracle: return "oracle";
  }
  return "unknown";
}

std::optional<SolverChoice> parse_solver(const std::string& name) noexcept {
  if (name == "friends") return SolverChoice::friends;
  if (name == "equal-share") return SolverChoice::equal_share;
  if (name == "complete") return SolverChoice::complete;
  if (name == "oracle") return SolverChoice::oracle;
  return std::nullopt;
}

ConstraintClass solver_constraint_class(SolverChoice solver) noexcept {
  switch (solver) {
    case SolverChoice::friends: return ConstraintClass::friends;
    case SolverChoice::equal_share: return ConstraintClass::equal_share;
    case SolverChoice::complete: return ConstraintClass::complete;
    case SolverChoice::oracle: return ConstraintClass::kkt;
  }
  return ConstraintClass::friends;
}

std::string result_doc_to_json(const ResultDoc& doc) {
  ordered_json j;
  j["solver"] = solver_name(doc.solver);
  j["A"] = matrix_to_json(doc.A);
  j["objective"] = doc.objective;
  if (doc.gamma) {
    ordered_json gamma = ordered_json::array();
    for (const GammaEntry& g : *doc.gamma) {
      gamma.push_back(ordered_json::array({g.i, g.j, g.value}));
    }
    j["gamma"] = std::move(gamma);
  }
  if (doc.c_hat) j["c_hat"] = *doc.c_hat;
  ordered_json nonneg = ordered_json::array();
  for (const NonnegVerdict& v : doc.nonneg) nonneg.push_back(verdict_to_json(v));
  j["nonneg"] = std::move(nonneg);
  j["residuals"] = diagnostics_to_json(doc.residuals);
  return j.dump(2) + "\n";
}

ResultDoc result_doc_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) parse_fail("result document must be a JSON object");

  ResultDoc doc;
  const auto& solver = require(j, "solver", "result");
  if (!solver.is_string()) parse_fail("\"solver\" must be a string");
  const auto parsed = parse_solver(solver.get<std::string>());
  if (!parsed) parse_fail("unknown solver tag \"" + solver.get<std::string>() + "\"");
  doc.solver = *parsed;

  doc.A = parse_matrix(require(j, "A", "result"), "\"A\"");
  doc.objective = as_number(require(j, "objective", "result"), "\"objective\"");

  if (auto it = j.find("gamma"); it != j.end()) {
    if (!it->is_array()) parse_fail("\"gamma\" must be an array of [i, j, value] triples");
    std::vector<GammaEntry> gamma;
    gamma.reserve(it->size());
    for (size_t r = 0; r < it->size(); ++r) {
      const auto& triple = (*it)[r];
      if (!triple.is_array() || triple.size() != 3) {
        parse_fail("\"gamma[" + std::to_string(r) + "]\" must be a triple [i, j, value]");
      }
      gamma.push_back({as_int(triple[0], "gamma[" + std::to_string(r) + "][0]"),
                       as_int(triple[1], "gamma[" + std::to_string(r) + "][1]"),
                       as_number(triple[2], "gamma[" + std::to_string(r) + "][2]")});
    }
    doc.gamma = std::move(gamma);
  }
  if (auto it = j.find("c_hat"); it != j.end()) {
    doc.c_hat = as_number(*it, "\"c_hat\"");
  }

  const auto& nonneg = require(j, "nonneg", "result");
  if (!nonneg.is_array()) parse_fail("\"nonneg\" must be an array");
  for (size_t i = 0; i < nonneg.size(); ++i) {
    doc.nonneg.push_back(verdict_from_json(nonneg[i], "nonneg[" + std::to_string(i) + "]"));
  }

  const auto& res = require(j, "residuals", "result");
  doc.residuals.column_sum_residual = as_number(require(res, "column_sum", "residuals"),
                                                "residuals.column_sum");
  doc.residuals.fairness_residual = as_number(require(res, "fairness", "residuals"),
                                              "residuals.fairness");
  doc.residuals.linear_system_residual = as_number(require(res, "linear_system", "residuals"),
                                                   "residuals.linear_system");
  doc.residuals.condition_estimate = as_number(require(res, "condition_estimate", "residuals"),
                                               "residuals.condition_estimate");
  return doc;
}

std::string verdicts_to_json(const std::vector<NonnegVerdict>& verdicts) {
  ordered_json j;
  ordered_json list = ordered_json::array();
  for (const NonnegVerdict& v : verdicts) list.push_back(verdict_to_json(v));
  j["nonneg"] = std::move(list);
  return j.dump(2) + "\n";
}

std::string sim_report_to_json(const SimReport& report, SolverChoice solver) {
  ordered_json j;
  j["solver"] = solver_name(solver);
  j["samples"] = report.samples;
  j["seed"] = report.seed;
  j["fairness_error"] = report.fairness_error;
  j["allocation_error"] = report.allocation_error;
  j["variance_sum"] = report.variance_sum;
  j["predicted"] = report.predicted;
  return j.dump(2) + "\n";
}

std::string heatmap_csv(const Eigen::MatrixXd& A) {
  std::string out;
  char buffer[64];
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", A(r, c));
      out += buffer;
      out += (c + 1 < A.cols()) ? "," : "\n";
    }
  }
  return out;
}

std::string error_json(const Error& error, const std::optional<std::string>& file) {
  ordered_json j;
  ordered_json body;
  body["kind"] = error_kind_name(error.kind());
  body["message"] = error.what();
  body["exit_code"] = exit_code_for(error.kind());
  if (file) body["file"] = *file;
  j["error"] = std::move(body);
  return j.dump(2) + "\n";
}

}  // namespace riskshare
