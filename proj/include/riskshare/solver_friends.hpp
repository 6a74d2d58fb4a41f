#pragma once

#include <utility>
#include <vector>

#include "riskshare/graph.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/sharing.hpp"

namespace riskshare {

// Optimal sharing on the complete graph, in closed form:
//   A* = (1/n) 11' + (1/a) (I - (1/n) 11') mu mu' Sigma^{-1},   a = mu' Sigma^{-1} mu.
// No linear system is solved; diagnostics report the feasibility residuals of
// the assembled matrix.
SolveReport feng_complete(const LossModel& model);

// Dense m x m system determining the off-edge multipliers gamma. With
//   E = I - (1/n) 11',  s = Sigma^{-1} mu,  F = (1/a) s s' - Sigma^{-1},
//   G = -( E ((1/a) mu s') + (1/n) 11' ),
// row r / column c of K (off-edge pairs p_r = (i_r, j_r), p_c = (i_c, j_c) in
// off_edge_pairs order) is K(r,c) = F(j_c, j_r) * E(i_r, i_c), and
// rhs(r) = G(i_r, j_r). K is the principal submatrix of F' (x) E on the
// off-edge vectorization indices.
struct GammaSystem {
  Eigen::MatrixXd K;
  Eigen::VectorXd rhs;
  std::vector<std::pair<int, int>> pairs;
};

GammaSystem assemble_gamma_system(const LossModel& model, const Graph& graph);

struct GammaSolveInfo {
  double residual = 0.0;  // ||K gamma - rhs||_inf
  double rcond = 1.0;     // reciprocal condition estimate of K
  int iterations = 0;     // 0 for the dense direct path
};

// Direct dense solve (partial-pivoted LU). Reciprocal condition estimates
// below 1e-13 are rejected as singular.
Eigen::VectorXd solve_gamma(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs,
                            GammaSolveInfo* info = nullptr);

struct FriendsOptions {
  // Above this many off-edge unknowns the dense K is never formed; a matrix-free
  // MINRES iteration on gamma -> [vec(E Gamma F)]_offedge is used instead.
  int dense_limit = 4096;
  double iterative_tol = 1e-12;      // relative residual target
  int max_iterations_per_unknown = 10;
};

// Optimal sharing restricted to a connected friendship network. Reduces to
// feng_complete's formula when the graph is complete (m = 0).
SolveReport solve_friends(const LossModel& model, const Graph& graph);
SolveReport solve_friends(const LossModel& model, const Graph& graph,
                          const FriendsOptions& options);

}  // namespace riskshare
