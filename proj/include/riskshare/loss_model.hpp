#pragma once

#include <Eigen/Dense>

namespace riskshare {

// Validated first two moments of the loss vector X: strictly positive means
// and a symmetric positive definite covariance, certified once by a Cholesky
// factorization that is cached and reused for every Sigma^{-1} application.
// The explicit inverse is never formed by any algorithm in this library;
// where entries of Sigma^{-1} are needed (criteria, system assembly) they are
// obtained by triangular solves against the identity.
class LossModel {
 public:
  // Validation order: square sigma, matching dimensions, n >= 2, symmetry
  // (entries differing by at most 1e-10 * max(1, max |sigma_ij|) are averaged
  // into an exactly symmetric matrix; larger asymmetry is rejected), strictly
  // positive means, positive definiteness.
  static LossModel validate(Eigen::VectorXd mu, Eigen::MatrixXd sigma);

  int size() const noexcept { return static_cast<int>(mu_.size()); }
  const Eigen::VectorXd& mu() const noexcept { return mu_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const noexcept { return llt_; }

  // Sigma^{-1} * rhs via the cached factorization.
  Eigen::VectorXd solve_sigma(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve_sigma(const Eigen::MatrixXd& rhs) const;

  // a = mu' Sigma^{-1} mu, the scalar that calibrates the fairness correction;
  // strictly positive for any valid model.
  double fairness_scalar() const;

 private:
  LossModel(Eigen::VectorXd mu, Eigen::MatrixXd sigma, Eigen::LLT<Eigen::MatrixXd> llt)
      : mu_(std::move(mu)), sigma_(std::move(sigma)), llt_(std::move(llt)) {}

  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Allocation H = A X of a realized loss vector.
Eigen::VectorXd apply_rule(const Eigen::MatrixXd& A, const Eigen::VectorXd& x);

// (1/2) tr(A Sigma A'), the half-sum of post-sharing variances.
double objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma);

}  // namespace riskshare
