#include "riskshare/kkt_oracle.hpp"

#include <cmath>
#include <string>

#include "riskshare/errors.hpp"

namespace riskshare {

namespace {

constexpr int kDenseCap = 6000;

void check_pair(const LossModel& model, const Graph& graph) {
  if (graph.size() != model.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "graph has " + std::to_string(graph.size()) + " vertices but the loss model has " +
                    std::to_string(model.size()) + " agents");
  }
  if (!graph.is_connected()) {
    throw Error(ErrorKind::not_connected,
                "the friendship network must be connected: fairness cannot be balanced "
                "across separate components");
  }
}

}  // namespace

VectorizedQP build_qp(const LossModel& model, const Graph& graph) {
  check_pair(model, graph);
  const int n = model.size();
  VectorizedQP qp;
  qp.n = n;
  qp.off_pairs = graph.off_edge_pairs();
  qp.m = static_cast<int>(qp.off_pairs.size());

  const long long dim = static_cast<long long>(n) * n + 2LL * n + qp.m;
  if (dim > kDenseCap) {
    throw Error(ErrorKind::too_large,
                "dense KKT system would have " + std::to_string(dim) +
                    " rows, above the cap of " + std::to_string(kDenseCap) +
                    "; use the network solver for instances of this size");
  }

  const int nn = n * n;
  const Eigen::MatrixXd& sigma = model.sigma();
  const Eigen::VectorXd& mu = model.mu();

  // Q = Sigma (x) I: block (j1, j2) is Sigma_{j1,j2} I.
  qp.Q = Eigen::MatrixXd::Zero(nn, nn);
  for (int j1 = 0; j1 < n; ++j1) {
    for (int j2 = 0; j2 < n; ++j2) {
      qp.Q.block(n * j1, n * j2, n, n).diagonal().setConstant(sigma(j1, j2));
    }
  }

  qp.B = Eigen::MatrixXd::Zero(2 * n + qp.m, nn);
  // Fairness rows: (A mu)_i = sum_j mu_j x_{i + n j}.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) qp.B(i, i + n * j) = mu(j);
  }
  // Column-sum rows: (1'A)_j = sum_i x_{i + n j}.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) qp.B(n + j, i + n * j) = 1.0;
  }
  // Structural-zero rows, in off_edge_pairs (ascending vectorization) order.
  for (int r = 0; r < qp.m; ++r) {
    const auto [i, j] = qp.off_pairs[static_cast<size_t>(r)];
    qp.B(2 * n + r, (i - 1) + n * (j - 1)) = 1.0;
  }

  qp.c.resize(2 * n + qp.m);
  qp.c.head(n) = mu;
  qp.c.segment(n, n).setOnes();
  qp.c.tail(qp.m).setZero();
  return qp;
}

KktSolution solve_kkt(const VectorizedQP& qp) {
  const int n = qp.n;
  const int nn = n * n;
  const Eigen::Index rows = qp.B.rows();
  const Eigen::Index dim = nn + rows;
  if (qp.Q.rows() != nn || qp.Q.cols() != nn || qp.B.cols() != nn ||
      qp.c.size() != rows) {
    throw Error(ErrorKind::dimension_mismatch,
                "vectorized program is internally inconsistent: Q is " +
                    std::to_string(qp.Q.rows()) + " x " + std::to_string(qp.Q.cols()) +
                    ", B is " + std::to_string(qp.B.rows()) + " x " +
                    std::to_string(qp.B.cols()) + ", c has " + std::to_string(qp.c.size()) +
                    " entries for n = " + std::to_string(n));
  }

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
  kkt.topLeftCorner(nn, nn) = qp.Q;
  kkt.topRightCorner(nn, rows) = qp.B.transpose();
  kkt.bottomLeftCorner(rows, nn) = qp.B;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs.tail(rows) = qp.c;

  // The system is singular by construction (see the header); a minimum-norm
  // solve picks the unique x* and one multiplier representative. Exactly one
  // zero singular direction is structural; any further deficiency is a
  // genuine failure.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
  const Eigen::Index rank = cod.rank();
  if (rank < dim - 1) {
    throw Error(ErrorKind::rank_deficient,
                "KKT system has rank " + std::to_string(rank) + " of " + std::to_string(dim) +
                    " (deficiency beyond the structural one); this signals a disconnected "
                    "graph or degenerate input");
  }
  const Eigen::VectorXd sol = cod.solve(rhs);

  KktSolution out;
  out.n = n;
  out.m = qp.m;
  out.off_pairs = qp.off_pairs;
  out.x_star = sol.head(nn);
  out.nu_star = sol.tail(rows);
  out.objective = 0.5 * out.x_star.dot(qp.Q * out.x_star);

  const Eigen::VectorXd stationarity = qp.Q * out.x_star + qp.B.transpose() * out.nu_star;
  const Eigen::VectorXd constraint = qp.B * out.x_star - qp.c;
  out.residuals.stationarity = stationarity.cwiseAbs().maxCoeff();
  out.residuals.fairness = constraint.head(n).cwiseAbs().maxCoeff();
  out.residuals.column_sum = constraint.segment(n, n).cwiseAbs().maxCoeff();
  out.residuals.structural_zero =
      qp.m > 0 ? constraint.tail(qp.m).cwiseAbs().maxCoeff() : 0.0;
  out.residual = std::max({out.residuals.stationarity, out.residuals.fairness,
                           out.residuals.column_sum, out.residuals.structural_zero});

  const Eigen::VectorXd tdiag = cod.matrixT().diagonal().head(rank).cwiseAbs();
  out.condition_estimate = tdiag.maxCoeff() > 0.0 ? tdiag.minCoeff() / tdiag.maxCoeff() : 0.0;

  const double scale = std::max(1.0, qp.c.cwiseAbs().maxCoeff());
  if (out.residual > 1e-9 * scale) {
    throw Error(ErrorKind::internal_inconsistency,
                "KKT solve finished with residual " + std::to_string(out.residual) +
                    ", above 1e-9 * " + std::to_string(scale) +
                    "; the system is too ill-conditioned for the oracle");
  }
  return out;
}

SolveReport extract_sharing(const KktSolution& solution, int n, const Graph& graph) {
  if (solution.n != n || graph.size() != n) {
    throw Error(ErrorKind::dimension_mismatch,
                "solution is for n = " + std::to_string(solution.n) + ", requested n = " +
                    std::to_string(n) + ", graph has " + std::to_string(graph.size()) +
                    " vertices");
  }
  if (solution.x_star.size() != static_cast<Eigen::Index>(n) * n) {
    throw Error(ErrorKind::dimension_mismatch,
                "solution vector has " + std::to_string(solution.x_star.size()) +
                    " entries, expected " + std::to_string(n * n));
  }

  Eigen::MatrixXd A = Eigen::Map<const Eigen::MatrixXd>(solution.x_star.data(), n, n);
  const auto pairs = graph.off_edge_pairs();
  if (pairs != solution.off_pairs) {
    throw Error(ErrorKind::internal_inconsistency,
                "graph does not match the one the solution was computed on "
                "(off-edge pair lists differ)");
  }
  for (auto [i, j] : pairs) {
    const double v = A(i - 1, j - 1);
    if (std::abs(v) > 1e-8) {
      throw Error(ErrorKind::internal_inconsistency,
                  "off-edge entry (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") came out as " + std::to_string(v) +
                      " instead of 0 in the oracle solution");
    }
    A(i - 1, j - 1) = 0.0;
  }

  SolveReport report;
  report.sharing = {std::move(A), ConstraintClass::kkt};
  report.objective = solution.objective;
  report.diagnostics.column_sum_residual =
      (report.sharing.A.colwise().sum() - Eigen::RowVectorXd::Ones(n)).cwiseAbs().maxCoeff();
  report.diagnostics.fairness_residual = solution.residuals.fairness;
  report.diagnostics.linear_system_residual = solution.residual;
  report.diagnostics.condition_estimate = solution.condition_estimate;
  report.gamma_pairs.reserve(pairs.size());
  for (size_t r = 0; r < pairs.size(); ++r) {
    report.gamma_pairs.push_back(
        {pairs[r].first, pairs[r].second, solution.nu_star(2 * n + static_cast<Eigen::Index>(r))});
  }
  return report;
}

}  // namespace riskshare
