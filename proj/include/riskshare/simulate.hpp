#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "riskshare/loss_model.hpp"

namespace riskshare {

enum class LossDistribution { gaussian };

struct SimConfig {
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  LossDistribution distribution = LossDistribution::gaussian;
};

struct SimReport {
  double fairness_error = 0.0;    // ||mean(H) - mu||_inf
  double allocation_error = 0.0;  // max_t |sum_i H_ti - sum_i X_ti|
  double variance_sum = 0.0;      // (1/2) sum_i Var(H_i), unbiased estimator
  double predicted = 0.0;         // (1/2) tr(A Sigma A')
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

// samples x n matrix of losses X_t = mu + L z_t, where L is the Cholesky
// factor of Sigma and z_t are standard normals drawn from a single
// deterministic stream (std::mt19937_64 + polar Box-Muller; the integer
// stream is bit-exact by the standard, the float path uses only *, /, sqrt
// and log). Sample t consumes its normals in agent order before sample t+1
// starts, so results are reproducible for a given (seed, samples, model).
Eigen::MatrixXd sample_losses(const LossModel& model, const SimConfig& config);

// Pushes every sample through H = A X and compares the empirical half-sum of
// allocation variances against the analytic objective.
SimReport simulate_rule(const Eigen::MatrixXd& A, const LossModel& model,
                        const SimConfig& config);

}  // namespace riskshare
