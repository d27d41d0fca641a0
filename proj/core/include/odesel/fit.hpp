#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "odesel/likelihood.hpp"

namespace odesel {

struct FitOptions {
  /// Number of optimizer starts. The first uses the caller's guess verbatim;
  /// the rest perturb it (log-uniform factor in [1/4, 4] for parameters with
  /// a nonnegative lower bound, otherwise an additive shift of up to +-50%).
  int restarts = 8;
  int max_iterations = 200;
  double gradient_tol = 1e-8;  // on |J^T r|_inf, scaled by 1 + objective
  double step_tol = 1e-10;     // on |delta|, scaled by 1 + |eta|
  std::uint64_t seed = 0x5eed;
  std::optional<Eigen::VectorXd> lower;  // optional box bounds on eta
  std::optional<Eigen::VectorXd> upper;
  IntegratorOptions integrator;
};

struct ConvergenceReport {
  bool converged = false;
  int iterations = 0;      // LM iterations summed over all starts
  int restarts_used = 0;   // starts actually attempted
  int starts_failed = 0;   // starts abandoned due to integration failure
  int best_start = -1;
  double gradient_norm = 0.0;  // |J^T r|_inf at the returned point
  double objective = 0.0;      // sum of squared residuals at the returned point
};

/// Unweighted least-squares estimate of eta = (xi, psi):
///   argmin_eta sum_j sum_i (Y_ij - x_j(t_i; eta))^2
/// via Levenberg-Marquardt with the Jacobian taken from the sensitivity
/// system (never finite differences). Integration failures at trial points
/// count as rejected steps; a start whose initial point fails is abandoned.
/// Throws FitError if every start is abandoned.
std::pair<Eigen::VectorXd, ConvergenceReport> fit_eta(const OdeModel& model, const Dataset& data,
                                                      const Eigen::VectorXd& init,
                                                      const FitOptions& opts = {});

struct FitResult {
  ThetaVector theta_hat;
  Eigen::VectorXd loglik_per_obs;
  double total_loglik = 0.0;
  Eigen::MatrixXd scores;                 // n x (2d+p)
  std::vector<Eigen::MatrixXd> hessians;  // n matrices, (2d+p) x (2d+p)
  Eigen::MatrixXd h_hat;
  Eigen::MatrixXd v_hat;
  ConvergenceReport convergence;
};

/// Full maximum-likelihood pipeline: least-squares eta, plug-in variances
/// sigma2_j = (1/n) sum_i (Y_ij - x_j(t_i; eta_hat))^2, then per-observation
/// log-densities, scores, Hessians and the sandwich matrices, all evaluated
/// through one variational integration at eta_hat.
///
/// Throws DegenerateFitError when any sigma2_j falls below
/// 1e-12 * (1 + mean Y_j^2) (a perfect fit leaves the downstream test
/// statistics undefined), and IntegrationError if the system cannot be
/// integrated at the final point.
FitResult fit_mle(const OdeModel& model, const Dataset& data, const Eigen::VectorXd& init,
                  const FitOptions& opts = {});

}  // namespace odesel
