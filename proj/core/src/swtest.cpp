#include "odesel/swtest.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "odesel/errors.hpp"
#include "odesel/stats.hpp"

namespace odesel {

VarianceComponents variance_components(const Eigen::VectorXd& logp, const Eigen::VectorXd& logq) {
  const Eigen::Index n = logp.size();
  if (n < 2 || logq.size() != n) {
    throw UsageError("variance_components needs two equal-length sequences with n >= 2");
  }
  const double mean_p = logp.mean();
  const double mean_q = logq.mean();
  VarianceComponents vc;
  for (Eigen::Index i = 0; i < n; ++i) {
    double dp = logp[i] - mean_p;
    double dq = logq[i] - mean_q;
    vc.sigma_p2 += dp * dp;
    vc.sigma_pq += dp * dq;
    vc.sigma_q2 += dq * dq;
  }
  vc.sigma_p2 /= static_cast<double>(n);
  vc.sigma_pq /= static_cast<double>(n);
  vc.sigma_q2 /= static_cast<double>(n);
  vc.sigma2 = vc.sigma_p2 - 2.0 * vc.sigma_pq + vc.sigma_q2;
  return vc;
}

double reweighted_lr(const Eigen::VectorXd& logp, const Eigen::VectorXd& logq, double h) {
  const Eigen::Index n = logp.size();
  if (n < 1 || logq.size() != n) {
    throw UsageError("reweighted_lr needs two equal-length sequences");
  }
  if (h < 0.0) throw UsageError("regularisation h must be >= 0");
  // w_k = 1 (odd k), 1 + h (even k); k is 1-based.
  auto weight = [h](Eigen::Index k) { return k % 2 == 0 ? 1.0 + h : 1.0; };
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += weight(i + 1) * logp[i] - weight(i + 2) * logq[i];
  }
  return acc / static_cast<double>(n);
}

double regularized_variance(const VarianceComponents& vc, double h) {
  if (h < 0.0) throw UsageError("regularisation h must be >= 0");
  double v = (1.0 + h) * vc.sigma2 + 0.5 * h * h * (vc.sigma_p2 + vc.sigma_q2);
  if (!(v > 0.0)) {
    throw FitError("regularised variance is not positive: both log-density sequences are "
                   "degenerate constants");
  }
  return v;
}

namespace {

// tr(H^-1 V) through a symmetric eigendecomposition. Eigenvalues below
// 1e-10 |H| are dropped (pseudo-inverse) and the fallback is flagged; returns
// false when every eigenvalue is below the tolerance.
bool trace_h_inv_v(const Eigen::MatrixXd& h, const Eigen::MatrixXd& v, double* trace,
                   bool* used_pinv) {
  Eigen::MatrixXd hs = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hs);
  if (eig.info() != Eigen::Success) return false;
  const Eigen::VectorXd& lam = eig.eigenvalues();
  double norm = lam.cwiseAbs().maxCoeff();
  if (!(norm > 0.0) || !std::isfinite(norm)) return false;
  double tol = 1e-10 * norm;
  double cond = norm / lam.cwiseAbs().minCoeff();
  *used_pinv = !(cond <= 1e12);

  double acc = 0.0;
  int kept = 0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (std::abs(lam[k]) <= tol) continue;
    const Eigen::VectorXd q = eig.eigenvectors().col(k);
    acc += q.dot(v * q) / lam[k];
    ++kept;
  }
  if (kept == 0) return false;
  *trace = acc;
  return true;
}

}  // namespace

std::pair<double, HDiagnostics> optimal_h(const VarianceComponents& vc, const FitResult& fit_a,
                                          const FitResult& fit_b, double alpha, Eigen::Index n) {
  if (n < 3) throw UsageError("optimal_h needs n >= 3 so that log log n > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");

  HDiagnostics diag;
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double sigma2 = std::max(vc.sigma2, 0.0);
  const double sigma = std::sqrt(sigma2);
  const double sum_pq = vc.sigma_p2 + vc.sigma_q2;
  if (!(sum_pq > 0.0)) {
    throw FitError("optimal_h: sigma_p^2 + sigma_q^2 is zero; both models are degenerate");
  }
  diag.sigma_hat = sigma;
  diag.delta_hat = 0.5 * sigma * (z - std::sqrt(4.0 + z * z));

  if (sigma > 0.0) {
    // delta/sigma is scale-free: (z - sqrt(4 + z^2)) / 2.
    double delta_over_sigma = 0.5 * (z - std::sqrt(4.0 + z * z));
    diag.c_sd = normal_pdf(z - delta_over_sigma) * diag.delta_hat *
                (sigma2 - 2.0 * sum_pq) / (4.0 * sigma2 * sigma);
  } else {
    diag.c_sd = 0.0;
  }

  double trace_a = 0.0, trace_b = 0.0;
  bool ok_a = trace_h_inv_v(fit_a.h_hat, fit_a.v_hat, &trace_a, &diag.pinv_p);
  bool ok_b = trace_h_inv_v(fit_b.h_hat, fit_b.v_hat, &trace_b, &diag.pinv_q);
  if (!ok_a && !ok_b) {
    throw FitError("optimal_h: both averaged Hessians are singular beyond pseudo-inverse rescue");
  }
  diag.trace_p = ok_a ? trace_a : 0.0;
  diag.trace_q = ok_b ? trace_b : 0.0;
  double max_trace = std::max(ok_a ? std::abs(trace_a) : 0.0, ok_b ? std::abs(trace_b) : 0.0);
  diag.c_pl = 2.0 * normal_pdf(z) * max_trace / std::sqrt(0.5 * sum_pq);

  double ratio;
  if (diag.c_sd == 0.0 || diag.c_pl == 0.0 || !std::isfinite(diag.c_sd) ||
      !std::isfinite(diag.c_pl)) {
    ratio = 1.0;
    diag.fallback_unit_ratio = true;
  } else {
    ratio = std::abs(diag.c_sd / diag.c_pl);
  }

  double nn = static_cast<double>(n);
  double h = std::cbrt(ratio) * std::pow(nn, -1.0 / 6.0) * std::cbrt(std::log(std::log(nn)));
  return {h, diag};
}

double sw_statistic(const Eigen::VectorXd& logp, const Eigen::VectorXd& logq,
                    const VarianceComponents& vc, double h, Eigen::Index n) {
  if (logp.size() != n || logq.size() != n) {
    throw UsageError("sw_statistic: sequence lengths must equal n");
  }
  double lr = reweighted_lr(logp, logq, h);
  double var = regularized_variance(vc, h);
  return std::sqrt(static_cast<double>(n)) * lr / std::sqrt(var);
}

Decision decide(double t_stat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  double z = normal_quantile(1.0 - alpha / 2.0);
  if (t_stat > z) return Decision::FavorA;
  if (t_stat < -z) return Decision::FavorB;
  return Decision::Retain;
}

const char* to_string(Decision d) {
  switch (d) {
    case Decision::Retain: return "retain";
    case Decision::FavorA: return "favor_a";
    case Decision::FavorB: return "favor_b";
  }
  return "retain";
}

SwTestResult run_sw_test(const FitResult& fit_a, const FitResult& fit_b, double alpha) {
  const Eigen::VectorXd& logp = fit_a.loglik_per_obs;
  const Eigen::VectorXd& logq = fit_b.loglik_per_obs;
  const Eigen::Index n = logp.size();

  SwTestResult out;
  out.alpha = alpha;
  out.vc = variance_components(logp, logq);
  auto [h, diag] = optimal_h(out.vc, fit_a, fit_b, alpha, n);
  out.h_n = h;
  out.diag = diag;
  out.lr_tilde = reweighted_lr(logp, logq, h);
  out.sigma_tilde2 = regularized_variance(out.vc, h);
  out.t_stat = std::sqrt(static_cast<double>(n)) * out.lr_tilde / std::sqrt(out.sigma_tilde2);
  out.decision = decide(out.t_stat, alpha);
  return out;
}

}  // namespace odesel
