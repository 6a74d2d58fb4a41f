#pragma once

#include "riskshare/graph.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/sharing.hpp"

namespace riskshare {

// Scale of the one-parameter family A(c) = I - c L M^{-1} (M = diag(mu)) that
// minimizes the half-sum of post-sharing variances:
//   c_hat = tr(Sigma L M^{-1}) / tr(L M^{-1} Sigma M^{-1} L).
// The denominator is ||L M^{-1} Sigma^{1/2}||_F^2 > 0 for any connected graph
// with n >= 2; a vanishing denominator is reported as a degenerate input.
double c_hat(const LossModel& model, const Graph& graph);

// Optimal matrix within the equal-share family. Column sums and fairness hold
// exactly in floating point by construction (each column adds c_hat/mu_j across
// d_j neighbours and removes c_hat d_j/mu_j on the diagonal).
EqualShareReport solve_equal_share(const LossModel& model, const Graph& graph);

// Specialized c_hat for a diagonal covariance:
//   c_hat = sum_i d_i sigma_i^2 / mu_i  /  sum_i (d_i^2 + d_i) sigma_i^2 / mu_i^2.
double c_hat_uncorrelated(const Eigen::VectorXd& degrees, const Eigen::VectorXd& mu,
                          const Eigen::VectorXd& sigma_diag);

}  // namespace riskshare
