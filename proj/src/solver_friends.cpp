#include "riskshare/solver_friends.hpp"

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

SolveDiagnostics feasibility_diagnostics(const Eigen::MatrixXd& A, const Eigen::VectorXd& mu) {
  SolveDiagnostics d;
  const int n = static_cast<int>(mu.size());
  d.column_sum_residual =
      (A.colwise().sum() - Eigen::RowVectorXd::Ones(n)).cwiseAbs().maxCoeff();
  d.fairness_residual = (A * mu - mu).cwiseAbs().maxCoeff();
  return d;
}

// E X = X - (1/n) 1 1' X: subtract each column's mean from the column.
Eigen::MatrixXd center_columns(const Eigen::MatrixXd& X) {
  return X.rowwise() - (X.colwise().sum() / static_cast<double>(X.rows()));
}

// Matrix-free application of K: gamma -> [vec(E (Gamma F))]_offedge with
// F = (1/a) s s' - Sigma^{-1}. Gamma Sigma^{-1} is evaluated as
// (Sigma^{-1} Gamma')' through the cached Cholesky factor.
struct GammaOperator {
  const LossModel& model;
  const std::vector<std::pair<int, int>>& pairs;
  const Eigen::VectorXd& s;
  double a;

  Eigen::VectorXd apply(const Eigen::VectorXd& g) const {
    const int n = model.size();
    Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(n, n);
    for (size_t r = 0; r < pairs.size(); ++r) {
      Gamma(pairs[r].first - 1, pairs[r].second - 1) = g(static_cast<Eigen::Index>(r));
    }
    const Eigen::MatrixXd Gamma_t = Gamma.transpose();
    Eigen::MatrixXd GF =
        (Gamma * s) * (s.transpose() / a) - model.solve_sigma(Gamma_t).transpose();
    Eigen::MatrixXd M = center_columns(GF);
    Eigen::VectorXd out(static_cast<Eigen::Index>(pairs.size()));
    for (size_t r = 0; r < pairs.size(); ++r) {
      out(static_cast<Eigen::Index>(r)) = M(pairs[r].first - 1, pairs[r].second - 1);
    }
    return out;
  }
};

// -(E ((1/a) mu s') + (1/n) 11') gathered at the off-edge pairs.
Eigen::VectorXd gamma_rhs(const LossModel& model, const std::vector<std::pair<int, int>>& pairs,
                          const Eigen::VectorXd& s, double a) {
  const int n = model.size();
  Eigen::MatrixXd P = (model.mu() / a) * s.transpose();
  Eigen::MatrixXd G = -(center_columns(P) + Eigen::MatrixXd::Constant(n, n, 1.0 / n));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(pairs.size()));
  for (size_t r = 0; r < pairs.size(); ++r) {
    rhs(static_cast<Eigen::Index>(r)) = G(pairs[r].first - 1, pairs[r].second - 1);
  }
  return rhs;
}

// MINRES for the symmetric (possibly indefinite) operator above. Returns the
// iterate; fills info with the true residual, the iteration count, and a
// reciprocal-condition estimate taken from the extreme Ritz values of the
// Lanczos tridiagonal.
Eigen::VectorXd minres_gamma(const GammaOperator& op, const Eigen::VectorXd& b,
                             const FriendsOptions& options, GammaSolveInfo* info) {
  const Eigen::Index m = b.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  const double beta1 = b.norm();
  GammaSolveInfo local;
  if (beta1 == 0.0) {
    if (info) *info = local;
    return x;
  }

  const long max_iters = static_cast<long>(options.max_iterations_per_unknown) * m;
  std::vector<double> alphas, betas;  // Lanczos coefficients for the condition estimate
  const size_t tracked = 256;

  Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd v = b / beta1;
  Eigen::VectorXd w_prev2 = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd w_prev1 = Eigen::VectorXd::Zero(m);
  double beta = beta1;
  double eta = beta1;
  double gamma0 = 1.0, gamma1 = 1.0;
  double sigma0 = 0.0, sigma1 = 0.0;
  bool converged = false;
  long k = 0;

  while (k < max_iters) {
    ++k;
    Eigen::VectorXd z = op.apply(v);
    const double alpha = v.dot(z);
    z -= alpha * v + beta * v_prev;
    const double beta_next = z.norm();
    if (alphas.size() < tracked) {
      alphas.push_back(alpha);
      if (betas.size() + 1 < tracked) betas.push_back(beta_next);
    }

    const double delta = gamma1 * alpha - gamma0 * sigma1 * beta;
    const double rho1 = std::sqrt(delta * delta + beta_next * beta_next);
    const double rho2 = sigma1 * alpha + gamma0 * gamma1 * beta;
    const double rho3 = sigma0 * beta;
    if (rho1 == 0.0) {
      throw Error(ErrorKind::singular_system,
                  "iterative multiplier solve broke down (zero pivot in the Lanczos QR) "
                  "after " + std::to_string(k) + " iterations");
    }
    const double gamma_new = delta / rho1;
    const double sigma_new = beta_next / rho1;
    Eigen::VectorXd w = (v - rho3 * w_prev2 - rho2 * w_prev1) / rho1;
    x += (gamma_new * eta) * w;
    eta = -sigma_new * eta;

    w_prev2.swap(w_prev1);
    w_prev1 = std::move(w);
    v_prev.swap(v);
    if (beta_next > 0.0) {
      v = z / beta_next;
    }
    gamma0 = gamma1;
    gamma1 = gamma_new;
    sigma0 = sigma1;
    sigma1 = sigma_new;
    beta = beta_next;

    if (std::abs(eta) <= options.iterative_tol * beta1 || beta_next == 0.0) {
      converged = true;
      break;
    }
  }

  local.iterations = static_cast<int>(k);
  local.residual = (op.apply(x) - b).cwiseAbs().maxCoeff();
  if (!alphas.empty()) {
    const Eigen::Index t = static_cast<Eigen::Index>(alphas.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
      T(i, i) = alphas[static_cast<size_t>(i)];
      if (i + 1 < t) {
        T(i, i + 1) = betas[static_cast<size_t>(i)];
        T(i + 1, i) = betas[static_cast<size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd mags = es.eigenvalues().cwiseAbs();
    const double lo = mags.minCoeff(), hi = mags.maxCoeff();
    local.rcond = hi > 0.0 ? lo / hi : 0.0;
  }
  if (!converged) {
    throw Error(ErrorKind::singular_system,
                "iterative multiplier solve did not reach relative residual " +
                    std::to_string(options.iterative_tol) + " within " +
                    std::to_string(max_iters) + " iterations (achieved " +
                    std::to_string(local.residual) + "); the system is singular or "
                    "extremely ill-conditioned");
  }
  if (info) *info = local;
  return x;
}

}  // namespace

SolveReport feng_complete(const LossModel& model) {
  const int n = model.size();
  const Eigen::VectorXd& mu = model.mu();
  const Eigen::VectorXd s = model.solve_sigma(mu);
  const double a = mu.dot(s);

  // E mu = mu - mean(mu) 1; the correction is the rank-one matrix (E mu) s' / a.
  Eigen::VectorXd centered = (mu.array() - mu.mean()).matrix();
  Eigen::MatrixXd A = Eigen::MatrixXd::Constant(n, n, 1.0 / n) + (centered / a) * s.transpose();

  SolveReport report;
  report.sharing = {std::move(A), ConstraintClass::complete};
  report.objective = objective(report.sharing.A, model.sigma());
  report.diagnostics = feasibility_diagnostics(report.sharing.A, mu);
  report.diagnostics.linear_system_residual = 0.0;
  report.diagnostics.condition_estimate = 1.0;
  return report;
}

GammaSystem assemble_gamma_system(const LossModel& model, const Graph& graph) {
  check_pair(model, graph);
  const int n = model.size();
  const Eigen::VectorXd& mu = model.mu();
  const Eigen::VectorXd s = model.solve_sigma(mu);
  const double a = mu.dot(s);

  GammaSystem sys;
  sys.pairs = graph.off_edge_pairs();
  const Eigen::Index m = static_cast<Eigen::Index>(sys.pairs.size());
  sys.rhs = gamma_rhs(model, sys.pairs, s, a);
  sys.K.resize(m, m);
  if (m == 0) return sys;

  // F = (1/a) s s' - Sigma^{-1}; Sigma^{-1} is materialized here (and only
  // here) by triangular solves against the identity, because the assembly
  // needs its individual entries.
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd F = (s / a) * s.transpose() - model.solve_sigma(identity);
  const double off = -1.0 / n;
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto [ir, jr] = sys.pairs[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto [ic, jc] = sys.pairs[static_cast<size_t>(c)];
      const double e = (ir == ic) ? 1.0 + off : off;
      sys.K(r, c) = F(jc - 1, jr - 1) * e;
    }
  }
  return sys;
}

Eigen::VectorXd solve_gamma(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs,
                            GammaSolveInfo* info) {
  if (K.rows() != K.cols()) {
    throw Error(ErrorKind::dimension_mismatch,
                "multiplier system matrix must be square, got " + std::to_string(K.rows()) +
                    " x " + std::to_string(K.cols()));
  }
  if (K.rows() != rhs.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "multiplier system has " + std::to_string(K.rows()) + " rows but the right-hand "
                    "side has " + std::to_string(rhs.size()) + " entries");
  }
  GammaSolveInfo local;
  if (K.rows() == 0) {
    if (info) *info = local;
    return Eigen::VectorXd();
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  const double rcond = lu.rcond();
  local.rcond = rcond;
  if (!(rcond >= 1e-13)) {
    throw Error(ErrorKind::singular_system,
                "multiplier system is numerically singular (reciprocal condition estimate " +
                    std::to_string(rcond) + " below 1e-13)");
  }
  Eigen::VectorXd gamma = lu.solve(rhs);
  local.residual = (K * gamma - rhs).cwiseAbs().maxCoeff();
  if (info) *info = local;
  return gamma;
}

SolveReport solve_friends(const LossModel& model, const Graph& graph) {
  return solve_friends(model, graph, FriendsOptions{});
}

SolveReport solve_friends(const LossModel& model, const Graph& graph,
                          const FriendsOptions& options) {
  check_pair(model, graph);
  const int n = model.size();
  const Eigen::VectorXd& mu = model.mu();
  const Eigen::VectorXd s = model.solve_sigma(mu);
  const double a = mu.dot(s);

  const std::vector<std::pair<int, int>> pairs = graph.off_edge_pairs();
  const Eigen::Index m = static_cast<Eigen::Index>(pairs.size());

  Eigen::VectorXd gamma;
  GammaSolveInfo info;
  if (m > 0) {
    if (m <= options.dense_limit) {
      GammaSystem sys = assemble_gamma_system(model, graph);
      gamma = solve_gamma(sys.K, sys.rhs, &info);
    } else {
      GammaOperator op{model, pairs, s, a};
      gamma = minres_gamma(op, gamma_rhs(model, pairs, s, a), options, &info);
    }
  }

  // A = (1/n) 11' + E T Sigma^{-1}, T = (1/a) mu mu' + Gamma ((1/a) s mu' - I).
  Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < m; ++r) {
    Gamma(pairs[static_cast<size_t>(r)].first - 1, pairs[static_cast<size_t>(r)].second - 1) =
        gamma(r);
  }
  Eigen::MatrixXd T = (mu / a) * mu.transpose() + Gamma * ((s / a) * mu.transpose() -
                                                           Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd T_t = T.transpose();
  Eigen::MatrixXd X = model.solve_sigma(T_t).transpose();
  Eigen::MatrixXd A = center_columns(X) + Eigen::MatrixXd::Constant(n, n, 1.0 / n);

  // The multipliers exist precisely to zero these entries; anything beyond
  // rounding noise means the solve went wrong, so fail loudly rather than
  // return a matrix that silently violates the network.
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto [i, j] = pairs[static_cast<size_t>(r)];
    const double v = A(i - 1, j - 1);
    if (std::abs(v) > 1e-8) {
      throw Error(ErrorKind::internal_inconsistency,
                  "off-edge entry (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") came out as " + std::to_string(v) +
                      " instead of 0; the multiplier solve is inconsistent");
    }
    A(i - 1, j - 1) = 0.0;
  }

  SolveReport report;
  report.sharing = {std::move(A), ConstraintClass::friends};
  report.objective = objective(report.sharing.A, model.sigma());
  report.diagnostics = feasibility_diagnostics(report.sharing.A, mu);
  report.diagnostics.linear_system_residual = info.residual;
  report.diagnostics.condition_estimate = info.rcond;
  report.gamma_pairs.reserve(static_cast<size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    report.gamma_pairs.push_back(
        {pairs[static_cast<size_t>(r)].first, pairs[static_cast<size_t>(r)].second, gamma(r)});
  }
  return report;
}

}  // namespace riskshare
