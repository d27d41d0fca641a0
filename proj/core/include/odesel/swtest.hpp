#pragma once

#include <Eigen/Core>

#include "odesel/fit.hpp"

namespace odesel {

/// Centered second moments (divide-by-n) of the two per-observation
/// log-density sequences and of their difference:
///   sigma2 = sigma_p2 - 2 sigma_pq + sigma_q2.
struct VarianceComponents {
  double sigma_p2 = 0.0;
  double sigma_pq = 0.0;
  double sigma_q2 = 0.0;
  double sigma2 = 0.0;
};

VarianceComponents variance_components(const Eigen::VectorXd& logp, const Eigen::VectorXd& logq);

/// Reweighted log-likelihood ratio (1/n) sum_i (w_i logp_i - w_{i+1} logq_i)
/// with weights w_k = 1 for odd k and 1 + h for even k, k = 1..n+1. Applied
/// verbatim for odd n as well.
double reweighted_lr(const Eigen::VectorXd& logp, const Eigen::VectorXd& logq, double h);

/// Variance of sqrt(n) times the reweighted ratio:
///   (1 + h) sigma2 + (h^2 / 2)(sigma_p2 + sigma_q2).
/// Throws FitError when the result is not strictly positive (both
/// log-density sequences degenerate to constants).
double regularized_variance(const VarianceComponents& vc, double h);

struct HDiagnostics {
  double c_sd = 0.0;
  double c_pl = 0.0;
  double delta_hat = 0.0;
  double trace_p = 0.0;  // tr(H_p^-1 V_p)
  double trace_q = 0.0;
  double sigma_hat = 0.0;
  bool fallback_unit_ratio = false;  // C_SD or C_PL degenerate; used |ratio| = 1
  bool pinv_p = false;               // H_p solved by pseudo-inverse
  bool pinv_q = false;
};

/// Data-driven regularisation constant
///   h_n = |C_SD / C_PL|^(1/3) n^(-1/6) (log log n)^(1/3)
/// with
///   delta = (sigma/2)(z - sqrt(4 + z^2)),  z = Phi^-1(1 - alpha/2),
///   C_SD = phi(z - delta/sigma) delta (sigma^2 - 2(sigma_p2 + sigma_q2)) / (4 sigma^3),
///   C_PL = 2 phi(z) max{|tr(Hp^-1 Vp)|, |tr(Hq^-1 Vq)|} / sqrt((sigma_p2 + sigma_q2)/2).
/// Degenerate C_SD or C_PL (zero or non-finite) falls back to a unit ratio and
/// is flagged. Hessians with condition number above 1e12 are inverted by a
/// pseudo-inverse with eigenvalue tolerance 1e-10 |H| and flagged.
std::pair<double, HDiagnostics> optimal_h(const VarianceComponents& vc, const FitResult& fit_a,
                                          const FitResult& fit_b, double alpha, Eigen::Index n);

/// sqrt(n) * reweighted_lr / sqrt(regularized_variance).
double sw_statistic(const Eigen::VectorXd& logp, const Eigen::VectorXd& logq,
                    const VarianceComponents& vc, double h, Eigen::Index n);

enum class Decision { Retain, FavorA, FavorB };

/// Retain when |t| <= z_{1-alpha/2} (ties retain); FavorA above, FavorB below.
Decision decide(double t_stat, double alpha);

const char* to_string(Decision d);

struct SwTestResult {
  double lr_tilde = 0.0;
  double h_n = 0.0;
  double sigma_tilde2 = 0.0;
  double t_stat = 0.0;
  double alpha = 0.0;
  Decision decision = Decision::Retain;
  VarianceComponents vc;
  HDiagnostics diag;
};

/// Full pairwise test from the two fits' per-observation log-likelihoods.
SwTestResult run_sw_test(const FitResult& fit_a, const FitResult& fit_b, double alpha);

}  // namespace odesel
