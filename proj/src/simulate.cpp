#include "riskshare/simulate.hpp"

#include <cmath>
#include <random>
#include <string>

#include "riskshare/errors.hpp"

namespace riskshare {

namespace {

// Standard normals via the polar (rejection) variant of Box-Muller. Pairs are
// generated together and the spare carried over, so the draw sequence depends
// only on the seed, never on how callers batch their requests.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  // 53-bit uniform in [0, 1).
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

void check_config(const SimConfig& config) {
  if (config.samples < 1) {
    throw Error(ErrorKind::invalid_size,
                "simulation needs at least 1 sample, got " + std::to_string(config.samples));
  }
}

}  // namespace

Eigen::MatrixXd sample_losses(const LossModel& model, const SimConfig& config) {
  check_config(config);
  const int n = model.size();
  const Eigen::MatrixXd L = model.cholesky().matrixL();
  NormalSampler normals(config.seed);

  Eigen::MatrixXd X(config.samples, n);
  Eigen::VectorXd z(n);
  for (std::int64_t t = 0; t < config.samples; ++t) {
    for (int i = 0; i < n; ++i) z(i) = normals.next();
    X.row(t) = (model.mu() + L * z).transpose();
  }
  return X;
}

SimReport simulate_rule(const Eigen::MatrixXd& A, const LossModel& model,
                        const SimConfig& config) {
  const int n = model.size();
  if (A.rows() != n || A.cols() != n) {
    throw Error(ErrorKind::dimension_mismatch,
                "sharing matrix is " + std::to_string(A.rows()) + " x " +
                    std::to_string(A.cols()) + " but the loss model has " + std::to_string(n) +
                    " agents");
  }
  check_config(config);

  const Eigen::MatrixXd X = sample_losses(model, config);
  const Eigen::MatrixXd H = X * A.transpose();  // row t holds (A x_t)'

  SimReport report;
  report.samples = config.samples;
  report.seed = config.seed;
  report.predicted = objective(A, model.sigma());
  report.fairness_error =
      (H.colwise().mean().transpose() - model.mu()).cwiseAbs().maxCoeff();
  report.allocation_error =
      (H.rowwise().sum() - X.rowwise().sum()).cwiseAbs().maxCoeff();

  if (config.samples < 2) {
    report.variance_sum = 0.0;
    return report;
  }
  const Eigen::RowVectorXd mean = H.colwise().mean();
  const double denom = static_cast<double>(config.samples - 1);
  double var_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    var_sum += (H.col(i).array() - mean(i)).square().sum() / denom;
  }
  report.variance_sum = 0.5 * var_sum;
  return report;
}

}  // namespace riskshare
