#include "odesel/likelihood.hpp"

#include <cmath>

#include "odesel/errors.hpp"

namespace odesel {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

void check_theta(const ThetaVector& theta, const Dataset& data) {
  if (theta.d() != data.d() || theta.xi.size() != data.d()) {
    throw UsageError("theta dimensions do not match the dataset");
  }
  if ((theta.sigma2.array() <= 0.0).any()) {
    throw UsageError("noise variances must be strictly positive");
  }
}

}  // namespace

Eigen::VectorXd gaussian_loglik(const ThetaVector& theta, const Dataset& data,
                                const Eigen::MatrixXd& states) {
  check_theta(theta, data);
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  double base = -0.5 * static_cast<double>(d) * kLog2Pi;
  for (Eigen::Index j = 0; j < d; ++j) base -= 0.5 * std::log(theta.sigma2[j]);

  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = base;
    for (Eigen::Index j = 0; j < d; ++j) {
      double g = data.obs(i, j) - states(i, j);
      acc -= g * g / (2.0 * theta.sigma2[j]);
    }
    out[i] = acc;
  }
  return out;
}

Eigen::VectorXd gaussian_loglik(const OdeModel& model, const ThetaVector& theta,
                                const Dataset& data, const IntegratorOptions& opts) {
  Trajectory traj = integrate(model, theta.eta(), data.times, opts);
  return gaussian_loglik(theta, data, traj.states);
}

Eigen::MatrixXd score_per_obs(const ThetaVector& theta, const Dataset& data,
                              const SensitivityTrajectory& sens) {
  check_theta(theta, data);
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  const Eigen::Index m = sens.m;
  if (sens.d != d || sens.base.states.rows() != n) {
    throw UsageError("sensitivity trajectory does not match the dataset");
  }

  Eigen::MatrixXd out(n, theta.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      double g = data.obs(i, j) - sens.base.states(i, j);
      double inv = 1.0 / theta.sigma2[j];
      out(i, j) = 0.5 * (g * g * inv - 1.0) * inv;
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        double g = data.obs(i, j) - sens.base.states(i, j);
        acc += sens.s(static_cast<int>(i), static_cast<int>(j), static_cast<int>(a)) * g /
               theta.sigma2[j];
      }
      out(i, d + a) = acc;
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> hessian_per_obs(const ThetaVector& theta, const Dataset& data,
                                             const VariationalTrajectory& var) {
  check_theta(theta, data);
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  const Eigen::Index m = var.base.m;
  if (var.base.d != d || var.base.base.states.rows() != n) {
    throw UsageError("variational trajectory does not match the dataset");
  }
  const Eigen::Index dim = theta.dim();

  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    const int ii = static_cast<int>(i);
    for (Eigen::Index j = 0; j < d; ++j) {
      double s2 = theta.sigma2[j];
      double g = data.obs(i, j) - var.base.base.states(i, j);
      h(j, j) = 0.5 / (s2 * s2) - g * g / (s2 * s2 * s2);
      for (Eigen::Index a = 0; a < m; ++a) {
        double cross = -var.base.s(ii, static_cast<int>(j), static_cast<int>(a)) * g / (s2 * s2);
        h(j, d + a) = cross;
        h(d + a, j) = cross;
      }
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
          double g = data.obs(i, j) - var.base.base.states(i, j);
          double sa = var.base.s(ii, static_cast<int>(j), static_cast<int>(a));
          double sb = var.base.s(ii, static_cast<int>(j), static_cast<int>(b));
          double zab = var.z(ii, static_cast<int>(j), static_cast<int>(a), static_cast<int>(b));
          acc += (zab * g - sa * sb) / theta.sigma2[j];
        }
        h(d + a, d + b) = acc;
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sandwich_matrices(
    const Eigen::MatrixXd& scores, const std::vector<Eigen::MatrixXd>& hessians) {
  const Eigen::Index n = scores.rows();
  if (n < 1 || hessians.size() != static_cast<std::size_t>(n)) {
    throw UsageError("sandwich_matrices needs matching, nonempty scores and hessians");
  }
  const Eigen::Index dim = scores.cols();
  Eigen::MatrixXd h_hat = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd v_hat = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    h_hat += hessians[static_cast<std::size_t>(i)];
    v_hat += scores.row(i).transpose() * scores.row(i);
  }
  h_hat /= static_cast<double>(n);
  v_hat /= static_cast<double>(n);
  return {h_hat, v_hat};
}

}  // namespace odesel
