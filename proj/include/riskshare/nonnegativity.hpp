#pragma once

#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "riskshare/graph.hpp"
#include "riskshare/loss_model.hpp"

namespace riskshare {

// Outcome of one nonnegativity criterion. Every criterion is normalized to a
// single comparison lhs <= rhs, judged with the closed-boundary tolerance
// lhs <= rhs + 1e-12 * max(1, |rhs|). witness names the offending 1-based
// entry when the check fails: (i, j) for a matrix entry, (i, i) for a
// per-agent bound.
struct NonnegVerdict {
  std::string criterion;
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<std::pair<int, int>> witness;
};

bool nonneg_boundary_holds(double lhs, double rhs) noexcept;

// Complete graph, Sigma = c I: the optimal matrix is entrywise nonnegative
// iff ||mu - mu_min 1||_1 * ||mu||_inf <= ||mu||_2^2.
NonnegVerdict check_complete_scaled_identity(const Eigen::VectorXd& mu);

// Complete graph, general PD Sigma: nonnegative iff
// max{ -a ||mu - mu_max 1||_1, b ||mu - mu_min 1||_1 } <= mu' Sigma^{-1} mu,
// where a = min_j (Sigma^{-1} mu)_j and b = max_j (Sigma^{-1} mu)_j.
NonnegVerdict check_complete_general(const LossModel& model);

// Equal-share family: nonnegative iff 0 <= c_hat d_i / mu_i <= 1 for all i.
// Encoded as lhs = max_i max(c_hat d_i/mu_i - 1, -c_hat d_i/mu_i), rhs = 0.
NonnegVerdict check_equal_share(double c_hat_value, const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& degrees);

// c_hat >= 0 iff sum over edges of Cov(X_i,X_j)(1/mu_i + 1/mu_j) is at most
// sum_i d_i sigma_i^2 / mu_i.
NonnegVerdict check_covariance_threshold(const LossModel& model, const Graph& graph);

// Two agents, single edge: the equal-share matrix is nonnegative iff
// Cov(X_1,X_2) <= (sigma_1^2 mu_2 + sigma_2^2 mu_1)/(mu_1 + mu_2) and
// c_hat <= mu_i for both agents. lhs/rhs report the covariance comparison.
NonnegVerdict check_two_agent(const LossModel& model);

// Direct oracle: holds iff every entry of A is >= -1e-12; witness is the most
// negative entry.
NonnegVerdict check_entrywise(const Eigen::MatrixXd& A);

}  // namespace riskshare
