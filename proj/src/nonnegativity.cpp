#include "riskshare/nonnegativity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "riskshare/errors.hpp"
#include "riskshare/solver_equal_share.hpp"

namespace riskshare {

namespace {

void check_mu(const Eigen::VectorXd& mu) {
  if (mu.size() < 2) {
    throw Error(ErrorKind::invalid_size,
                "nonnegativity criteria need at least 2 agents, got n = " +
                    std::to_string(mu.size()));
  }
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (!(mu(i) > 0.0)) {
      throw Error(ErrorKind::mean_not_positive,
                  "mean of agent " + std::to_string(i + 1) + " must be strictly positive, got " +
                      std::to_string(mu(i)));
    }
  }
}

}  // namespace

bool nonneg_boundary_holds(double lhs, double rhs) noexcept {
  return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}

NonnegVerdict check_complete_scaled_identity(const Eigen::VectorXd& mu) {
  check_mu(mu);
  NonnegVerdict v;
  v.criterion = "scaled-identity";
  Eigen::Index i_min = 0, j_max = 0;
  const double mu_min = mu.minCoeff(&i_min);
  const double mu_max = mu.maxCoeff(&j_max);
  v.lhs = (mu.array() - mu_min).abs().sum() * mu_max;
  v.rhs = mu.squaredNorm();
  v.holds = nonneg_boundary_holds(v.lhs, v.rhs);
  if (!v.holds) {
    // The binding entry of the optimal matrix sits at (argmin mu, argmax mu).
    v.witness = {static_cast<int>(i_min) + 1, static_cast<int>(j_max) + 1};
  }
  return v;
}

NonnegVerdict check_complete_general(const LossModel& model) {
  const Eigen::VectorXd& mu = model.mu();
  const Eigen::VectorXd s = model.solve_sigma(mu);

  Eigen::Index j_lo = 0, j_hi = 0, i_min = 0, i_max = 0;
  const double a_coef = s.minCoeff(&j_lo);
  const double b_coef = s.maxCoeff(&j_hi);
  const double mu_min = mu.minCoeff(&i_min);
  const double mu_max = mu.maxCoeff(&i_max);

  const double branch_neg = -a_coef * (mu.array() - mu_max).abs().sum();
  const double branch_pos = b_coef * (mu.array() - mu_min).abs().sum();

  NonnegVerdict v;
  v.criterion = "general-pd";
  v.lhs = std::max(branch_neg, branch_pos);
  v.rhs = model.fairness_scalar();
  v.holds = nonneg_boundary_holds(v.lhs, v.rhs);
  if (!v.holds) {
    if (branch_pos >= branch_neg) {
      v.witness = {static_cast<int>(i_min) + 1, static_cast<int>(j_hi) + 1};
    } else {
      v.witness = {static_cast<int>(i_max) + 1, static_cast<int>(j_lo) + 1};
    }
  }
  return v;
}

NonnegVerdict check_equal_share(double c_hat_value, const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& degrees) {
  check_mu(mu);
  if (degrees.size() != mu.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "degrees vector has " + std::to_string(degrees.size()) + " entries, expected " +
                    std::to_string(mu.size()));
  }
  NonnegVerdict v;
  v.criterion = "equal-share";
  v.rhs = 0.0;
  v.lhs = -std::numeric_limits<double>::infinity();
  int worst = 0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double ratio = c_hat_value * degrees(i) / mu(i);
    // 0 <= ratio <= 1 expressed as one signed margin.
    const double margin = std::max(ratio - 1.0, -ratio);
    if (margin > v.lhs) {
      v.lhs = margin;
      worst = static_cast<int>(i) + 1;
    }
  }
  v.holds = nonneg_boundary_holds(v.lhs, v.rhs);
  if (!v.holds) v.witness = {worst, worst};
  return v;
}

NonnegVerdict check_covariance_threshold(const LossModel& model, const Graph& graph) {
  if (graph.size() != model.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "graph has " + std::to_string(graph.size()) + " vertices but the loss model has " +
                    std::to_string(model.size()) + " agents");
  }
  if (!graph.is_connected()) {
    throw Error(ErrorKind::not_connected,
                "the covariance-threshold criterion is defined on a connected network");
  }
  const Eigen::VectorXd& mu = model.mu();
  const Eigen::MatrixXd& sigma = model.sigma();

  NonnegVerdict v;
  v.criterion = "covariance-threshold";
  v.lhs = 0.0;
  double worst_contribution = -std::numeric_limits<double>::infinity();
  std::pair<int, int> worst_edge{0, 0};
  for (auto [i, j] : graph.edges()) {
    const double contribution = sigma(i - 1, j - 1) * (1.0 / mu(i - 1) + 1.0 / mu(j - 1));
    v.lhs += contribution;
    if (contribution > worst_contribution) {
      worst_contribution = contribution;
      worst_edge = {i, j};
    }
  }
  v.rhs = 0.0;
  for (int i = 1; i <= graph.size(); ++i) {
    v.rhs += graph.degree(i) * sigma(i - 1, i - 1) / mu(i - 1);
  }
  v.holds = nonneg_boundary_holds(v.lhs, v.rhs);
  if (!v.holds) v.witness = worst_edge;
  return v;
}

NonnegVerdict check_two_agent(const LossModel& model) {
  if (model.size() != 2) {
    throw Error(ErrorKind::wrong_arity,
                "the two-agent criterion applies only to n = 2, got n = " +
                    std::to_string(model.size()));
  }
  const Eigen::VectorXd& mu = model.mu();
  const Eigen::MatrixXd& sigma = model.sigma();
  const double cov = sigma(0, 1);
  const double bound = (sigma(0, 0) * mu(1) + sigma(1, 1) * mu(0)) / (mu(0) + mu(1));
  const double c = c_hat(model, Graph::complete(2));

  NonnegVerdict v;
  v.criterion = "two-agent";
  v.lhs = cov;
  v.rhs = bound;
  const bool cov_ok = nonneg_boundary_holds(cov, bound);
  const bool c1_ok = nonneg_boundary_holds(c, mu(0));
  const bool c2_ok = nonneg_boundary_holds(c, mu(1));
  v.holds = cov_ok && c1_ok && c2_ok;
  if (!v.holds) {
    if (!cov_ok) {
      v.witness = {1, 2};
    } else {
      v.witness = c1_ok ? std::make_pair(2, 2) : std::make_pair(1, 1);
    }
  }
  return v;
}

NonnegVerdict check_entrywise(const Eigen::MatrixXd& A) {
  NonnegVerdict v;
  v.criterion = "entrywise";
  Eigen::Index i = 0, j = 0;
  const double min_entry = A.size() > 0 ? A.minCoeff(&i, &j) : 0.0;
  v.lhs = 0.0 - min_entry;  // 0.0 - x avoids emitting -0.0 for nonnegative matrices
  v.rhs = 0.0;
  v.holds = min_entry >= -1e-12;
  if (!v.holds) v.witness = {static_cast<int>(i) + 1, static_cast<int>(j) + 1};
  return v;
}

}  // namespace riskshare
