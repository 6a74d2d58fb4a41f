#pragma once

#include <utility>
#include <vector>

#include "riskshare/graph.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/sharing.hpp"

namespace riskshare {

// The sharing problem vectorized column-major: x = vec(A), with the 1-based
// entry (i, j) of A living at vectorization index k = i + n(j-1).
//
//   minimize (1/2) x' Q x   subject to  B x = c
//
//   Q = Sigma (x) I                  (n^2 x n^2, entry ((i1,j1),(i2,j2)) =
//                                     Sigma_{j1,j2} when i1 = i2, else 0)
//   B = [B_mu; B_1; B_0], c = [mu; 1; 0]
//     B_mu row i: mu_j at column i + n(j-1)       (A mu = mu)
//     B_1  row j: ones on column block j          (1'A = 1')
//     B_0  rows:  unit rows at the off-edge vectorization indices, in
//                 off_edge_pairs order            (A_ij = 0 off the network)
//
// The fairness and column-sum blocks always share exactly one linear
// dependency — 1'(A mu) and (1'A) mu are the same functional of A — so
// rank(B) = 2n + m - 1 for every connected graph, and the KKT matrix
// [[Q, B'], [B, 0]] is singular but consistent. The minimizer x* is unique
// (Q is positive definite); the multiplier vector is unique up to the
// one-dimensional null direction (1_n, -mu, 0_m), which leaves the trailing
// m multipliers (the off-edge gammas) unique as well.
struct VectorizedQP {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd B;
  Eigen::VectorXd c;
  int n = 0;
  int m = 0;
  std::vector<std::pair<int, int>> off_pairs;
};

struct KktResiduals {
  double stationarity = 0.0;    // ||Q x + B' nu||_inf
  double fairness = 0.0;        // ||A mu - mu||_inf
  double column_sum = 0.0;      // ||1'A - 1'||_inf
  double structural_zero = 0.0; // ||x_offedge||_inf
};

struct KktSolution {
  Eigen::VectorXd x_star;
  // Multipliers as stacked in the KKT system: (-beta) ++ (-lambda) ++ gamma,
  // the minimum-norm representative of the affine solution set.
  Eigen::VectorXd nu_star;
  double objective = 0.0;
  double residual = 0.0;  // max over the residual components below
  KktResiduals residuals;
  double condition_estimate = 0.0;  // |t|_min/|t|_max over the rank-revealing triangle
  int n = 0;
  int m = 0;
  std::vector<std::pair<int, int>> off_pairs;
};

// Dense assembly. Sizes are capped: n^2 + 2n + m rows beyond 6000 are refused
// (use the network solver for large instances; this route exists to verify the
// closed forms, not to scale).
VectorizedQP build_qp(const LossModel& model, const Graph& graph);

// Rank-revealing minimum-norm solve of the (singular, consistent) KKT system.
// Rank deficiency beyond the structural one signals a disconnected graph or
// degenerate input and is reported as a rank-deficiency error.
KktSolution solve_kkt(const VectorizedQP& qp);

// Reshape x* into the sharing matrix, snap off-edge entries to exact zeros,
// and surface the trailing multipliers as gamma pairs.
SolveReport extract_sharing(const KktSolution& solution, int n, const Graph& graph);

}  // namespace riskshare
