#pragma once

#include <vector>

#include <Eigen/Dense>

namespace riskshare {

// The constraint set an allocation matrix was optimized over.
enum class ConstraintClass { friends, equal_share, complete, kkt };

const char* constraint_class_name(ConstraintClass c) noexcept;

// Row-stochastic-in-columns allocation matrix: 1'A = 1', A mu = mu, and
// A_ij = 0 whenever {i,j} is not an edge (for network-constrained classes).
struct SharingMatrix {
  Eigen::MatrixXd A;
  ConstraintClass constraint_class = ConstraintClass::friends;
};

// One off-edge multiplier; (i, j) is 1-based and follows the off_edge_pairs
// ordering of its graph.
struct GammaEntry {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

struct SolveDiagnostics {
  double column_sum_residual = 0.0;    // ||1'A - 1'||_inf
  double fairness_residual = 0.0;      // ||A mu - mu||_inf (raw, unscaled)
  double linear_system_residual = 0.0; // ||K gamma - rhs||_inf (or KKT residual)
  double condition_estimate = 1.0;     // reciprocal condition of the solved system
};

struct SolveReport {
  SharingMatrix sharing;
  double objective = 0.0;
  std::vector<GammaEntry> gamma_pairs;
  SolveDiagnostics diagnostics;
};

struct EqualShareReport {
  SharingMatrix sharing;
  double c_hat = 0.0;
  double objective = 0.0;
  SolveDiagnostics diagnostics;
};

}  // namespace riskshare
