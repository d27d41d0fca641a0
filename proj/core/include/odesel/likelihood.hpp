#pragma once

#include <Eigen/Core>
#include <vector>

#include "odesel/dataset.hpp"
#include "odesel/integrate.hpp"
#include "odesel/model.hpp"

namespace odesel {

/// Full parameter vector theta = (sigma^2, xi, psi): per-state noise
/// variances, initial values, rate parameters. Flat layout keeps that order.
struct ThetaVector {
  Eigen::VectorXd sigma2;  // length d, strictly positive
  Eigen::VectorXd xi;      // length d
  Eigen::VectorXd psi;     // length p

  Eigen::Index d() const { return sigma2.size(); }
  Eigen::Index p() const { return psi.size(); }
  Eigen::Index dim() const { return 2 * d() + p(); }

  Eigen::VectorXd eta() const {
    Eigen::VectorXd out(xi.size() + psi.size());
    out << xi, psi;
    return out;
  }

  Eigen::VectorXd flat() const {
    Eigen::VectorXd out(dim());
    out << sigma2, xi, psi;
    return out;
  }
};

/// Per-observation Gaussian log-densities
///   -(d/2) log 2 pi - 1/2 sum_j log sigma2_j - sum_j (Y_ij - x_j(t_i))^2 / (2 sigma2_j).
/// Integrates the model at theta's eta internally.
Eigen::VectorXd gaussian_loglik(const OdeModel& model, const ThetaVector& theta,
                                const Dataset& data, const IntegratorOptions& opts = {});

/// Same, reusing an existing trajectory at theta's eta.
Eigen::VectorXd gaussian_loglik(const ThetaVector& theta, const Dataset& data,
                                const Eigen::MatrixXd& states);

/// Per-observation score vectors (gradient of the log-density in theta),
/// n x (2d+p), assembled from first-order sensitivities:
///   sigma2_j : ((g_j^2 / sigma2_j) - 1) / (2 sigma2_j)
///   eta_a    : sum_j s_{j,a} g_j / sigma2_j
Eigen::MatrixXd score_per_obs(const ThetaVector& theta, const Dataset& data,
                              const SensitivityTrajectory& sens);

/// Per-observation Hessians of the log-density in theta, assembled blockwise
/// from first- and second-order sensitivities:
///   (s2_j, s2_j) : 1/(2 sigma2_j^2) - g_j^2 / sigma2_j^3   (diagonal block)
///   (s2_j, eta_a): -s_{j,a} g_j / sigma2_j^2
///   (eta_a,eta_b): sum_j [ z_{j,a,b} g_j - s_{j,a} s_{j,b} ] / sigma2_j
std::vector<Eigen::MatrixXd> hessian_per_obs(const ThetaVector& theta, const Dataset& data,
                                             const VariationalTrajectory& var);

/// H_hat = mean of per-observation Hessians, V_hat = mean of score outer
/// products.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sandwich_matrices(
    const Eigen::MatrixXd& scores, const std::vector<Eigen::MatrixXd>& hessians);

}  // namespace odesel
