#include "riskshare/loss_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskshare/errors.hpp"

namespace riskshare {

LossModel LossModel::validate(Eigen::VectorXd mu, Eigen::MatrixXd sigma) {
  if (sigma.rows() != sigma.cols()) {
    throw Error(ErrorKind::sigma_not_square,
                "sigma must be square, got " + std::to_string(sigma.rows()) + " x " +
                    std::to_string(sigma.cols()));
  }
  if (mu.size() != sigma.rows()) {
    throw Error(ErrorKind::dimension_mismatch,
                "mu has " + std::to_string(mu.size()) + " entries but sigma is " +
                    std::to_string(sigma.rows()) + " x " + std::to_string(sigma.cols()));
  }
  const int n = static_cast<int>(mu.size());
  if (n < 2) {
    throw Error(ErrorKind::invalid_size,
                "risk sharing needs at least 2 agents, got n = " + std::to_string(n));
  }

  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw Error(ErrorKind::sigma_not_symmetric,
                "sigma is not symmetric: max |sigma_ij - sigma_ji| = " + std::to_string(asym) +
                    " exceeds 1e-10 * " + std::to_string(scale));
  }
  // Within tolerance: enforce exact symmetry so downstream factorizations see
  // a bitwise-symmetric matrix.
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();

  for (int i = 0; i < n; ++i) {
    if (!(mu(i) > 0.0)) {
      throw Error(ErrorKind::mean_not_positive,
                  "mean of agent " + std::to_string(i + 1) + " must be strictly positive, got " +
                      std::to_string(mu(i)));
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::sigma_not_positive_definite,
                "sigma is not positive definite (Cholesky factorization failed)");
  }
  return LossModel(std::move(mu), std::move(sigma), std::move(llt));
}

Eigen::VectorXd LossModel::solve_sigma(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != mu_.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "right-hand side has " + std::to_string(rhs.size()) + " entries, expected " +
                    std::to_string(mu_.size()));
  }
  return llt_.solve(rhs);
}

Eigen::MatrixXd LossModel::solve_sigma(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != mu_.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "right-hand side has " + std::to_string(rhs.rows()) + " rows, expected " +
                    std::to_string(mu_.size()));
  }
  return llt_.solve(rhs);
}

double LossModel::fairness_scalar() const { return mu_.dot(llt_.solve(mu_)); }

Eigen::VectorXd apply_rule(const Eigen::MatrixXd& A, const Eigen::VectorXd& x) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorKind::dimension_mismatch,
                "sharing matrix must be square, got " + std::to_string(A.rows()) + " x " +
                    std::to_string(A.cols()));
  }
  if (A.cols() != x.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "loss vector has " + std::to_string(x.size()) + " entries but the sharing matrix is " +
                    std::to_string(A.rows()) + " x " + std::to_string(A.cols()));
  }
  return A * x;
}

double objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma) {
  if (A.rows() != A.cols() || sigma.rows() != sigma.cols() || A.rows() != sigma.rows()) {
    throw Error(ErrorKind::dimension_mismatch,
                "objective needs square A and sigma of equal size, got A " +
                    std::to_string(A.rows()) + " x " + std::to_string(A.cols()) + ", sigma " +
                    std::to_string(sigma.rows()) + " x " + std::to_string(sigma.cols()));
  }
  // tr(A Sigma A') = sum over entries of (A Sigma) .* A.
  return 0.5 * ((A * sigma).cwiseProduct(A)).sum();
}

}  // namespace riskshare
