#include "riskshare/solver_equal_share.hpp"

#include <cmath>
#include <string>

#include "riskshare/errors.hpp"

namespace riskshare {

namespace {

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

// L M^{-1}: column j of the Laplacian scaled by 1/mu_j.
Eigen::MatrixXd laplacian_over_mu(const Graph& graph, const Eigen::VectorXd& mu) {
  Eigen::MatrixXd P = graph.laplacian();
  P.array().rowwise() /= mu.transpose().array();
  return P;
}

}  // namespace

double c_hat(const LossModel& model, const Graph& graph) {
  check_pair(model, graph);
  const Eigen::MatrixXd P = laplacian_over_mu(graph, model.mu());
  const Eigen::MatrixXd PS = P * model.sigma();
  const double numerator = PS.trace();
  // tr(P Sigma P') = ||P Sigma^{1/2}||_F^2 = sum of P .* (P Sigma), strictly
  // positive whenever the graph has an edge (guaranteed: connected, n >= 2)
  // and Sigma is PD.
  const double denominator = (P.cwiseProduct(PS)).sum();
  if (!(denominator > 1e-14 * std::max(1.0, std::abs(numerator)))) {
    throw Error(ErrorKind::degenerate_denominator,
                "equal-share scale is undefined: tr(L M^-1 Sigma M^-1 L) = " +
                    std::to_string(denominator) + " is not safely positive");
  }
  return numerator / denominator;
}

EqualShareReport solve_equal_share(const LossModel& model, const Graph& graph) {
  const double c = c_hat(model, graph);
  const int n = model.size();
  const Eigen::VectorXd& mu = model.mu();

  // A = I - c L M^{-1}, evaluated entrywise as delta_ij - (c * L_ij) / mu_j so
  // tests can reconstruct it bit-for-bit from (c_hat, L, mu).
  Eigen::MatrixXd A = (c * graph.laplacian()).eval();
  A.array().rowwise() /= mu.transpose().array();
  A = Eigen::MatrixXd::Identity(n, n) - A;

  EqualShareReport report;
  report.c_hat = c;
  report.sharing = {std::move(A), ConstraintClass::equal_share};
  report.objective = objective(report.sharing.A, model.sigma());
  report.diagnostics.column_sum_residual =
      (report.sharing.A.colwise().sum() - Eigen::RowVectorXd::Ones(n)).cwiseAbs().maxCoeff();
  report.diagnostics.fairness_residual = (report.sharing.A * mu - mu).cwiseAbs().maxCoeff();
  report.diagnostics.linear_system_residual = 0.0;
  report.diagnostics.condition_estimate = 1.0;

  const double scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  if (report.diagnostics.column_sum_residual > 1e-9 ||
      report.diagnostics.fairness_residual > 1e-9 * scale) {
    throw Error(ErrorKind::internal_inconsistency,
                "equal-share matrix failed its own feasibility check: column-sum residual " +
                    std::to_string(report.diagnostics.column_sum_residual) +
                    ", fairness residual " +
                    std::to_string(report.diagnostics.fairness_residual));
  }
  return report;
}

double c_hat_uncorrelated(const Eigen::VectorXd& degrees, const Eigen::VectorXd& mu,
                          const Eigen::VectorXd& sigma_diag) {
  if (degrees.size() != mu.size() || degrees.size() != sigma_diag.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "degrees, mu, and sigma diagonals must have equal length, got " +
                    std::to_string(degrees.size()) + ", " + std::to_string(mu.size()) + ", " +
                    std::to_string(sigma_diag.size()));
  }
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (!(mu(i) > 0.0)) {
      throw Error(ErrorKind::mean_not_positive,
                  "mean of agent " + std::to_string(i + 1) + " must be strictly positive, got " +
                      std::to_string(mu(i)));
    }
    num += degrees(i) * sigma_diag(i) / mu(i);
    den += (degrees(i) * degrees(i) + degrees(i)) * sigma_diag(i) / (mu(i) * mu(i));
  }
  if (!(den > 1e-14 * std::max(1.0, std::abs(num)))) {
    throw Error(ErrorKind::degenerate_denominator,
                "equal-share scale is undefined for the given degrees/variances: denominator " +
                    std::to_string(den) + " is not safely positive");
  }
  return num / den;
}

}  // namespace riskshare
