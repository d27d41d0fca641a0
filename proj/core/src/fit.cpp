#include "odesel/fit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "odesel/errors.hpp"
#include "odesel/rng.hpp"

namespace odesel {

namespace {

struct StartOutcome {
  bool usable = false;
  bool converged = false;
  int iterations = 0;
  Eigen::VectorXd eta;
  double objective = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
};

Eigen::VectorXd residuals(const Dataset& data, const Eigen::MatrixXd& states) {
  const Eigen::Index n = data.n(), d = data.d();
  Eigen::VectorXd r(n * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    r.segment(j * n, n) = data.obs.col(j) - states.col(j);
  }
  return r;
}

// J[(j*n + i), a] = -s_{i,j,a}
Eigen::MatrixXd jacobian(const Dataset& data, const SensitivityTrajectory& sens) {
  const Eigen::Index n = data.n(), d = data.d(), m = sens.m;
  Eigen::MatrixXd jac(n * d, m);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index a = 0; a < m; ++a) {
        jac(j * n + i, a) =
            -sens.s(static_cast<int>(i), static_cast<int>(j), static_cast<int>(a));
      }
    }
  }
  return jac;
}

Eigen::VectorXd clamp_to_bounds(Eigen::VectorXd eta, const FitOptions& opts) {
  if (opts.lower) eta = eta.cwiseMax(*opts.lower);
  if (opts.upper) eta = eta.cwiseMin(*opts.upper);
  return eta;
}

// One Levenberg-Marquardt run from a single starting point. Returns an
// unusable outcome if the starting point cannot be integrated.
StartOutcome lm_single(const OdeModel& model, const Dataset& data, Eigen::VectorXd eta,
                       const FitOptions& opts) {
  StartOutcome out;
  eta = clamp_to_bounds(std::move(eta), opts);

  SensitivityTrajectory sens;
  try {
    sens = integrate_with_sensitivities(model, eta, data.times, opts.integrator);
  } catch (const IntegrationError&) {
    return out;
  }
  out.usable = true;

  Eigen::VectorXd r = residuals(data, sens.base.states);
  Eigen::MatrixXd jac = jacobian(data, sens);
  double objective = r.squaredNorm();

  double lambda = 0.0;  // initialised from the first normal matrix below
  double nu = 2.0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter + 1;
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;
    out.gradient_norm = g.lpNorm<Eigen::Infinity>();
    if (out.gradient_norm <= opts.gradient_tol * (1.0 + objective)) {
      out.converged = true;
      break;
    }
    if (lambda == 0.0) lambda = 1e-3 * jtj.diagonal().maxCoeff();
    if (!(lambda > 0.0) || !std::isfinite(lambda)) lambda = 1e-3;

    // Marquardt scaling with a small absolute ridge so zero-diagonal
    // directions stay solvable.
    Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-14);
    Eigen::MatrixXd a = jtj;
    a.diagonal() += lambda * diag;
    Eigen::VectorXd delta = a.ldlt().solve(-g);
    if (!delta.allFinite()) {
      lambda *= nu;
      nu *= 2.0;
      continue;
    }

    Eigen::VectorXd eta_trial = clamp_to_bounds(eta + delta, opts);
    Eigen::VectorXd step = eta_trial - eta;
    if (step.norm() <= opts.step_tol * (1.0 + eta.norm())) {
      out.converged = true;
      break;
    }

    double trial_objective = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd trial_states;
    bool trial_ok = false;
    try {
      Trajectory traj = integrate(model, eta_trial, data.times, opts.integrator);
      trial_states = std::move(traj.states);
      Eigen::VectorXd r_trial = residuals(data, trial_states);
      trial_objective = r_trial.squaredNorm();
      trial_ok = std::isfinite(trial_objective);
    } catch (const IntegrationError&) {
      trial_ok = false;
    }

    if (trial_ok && trial_objective < objective) {
      // Accept; refresh the Jacobian at the new point.
      double predicted = step.dot(lambda * diag.cwiseProduct(step) - g);
      double rho = predicted > 0.0 ? (objective - trial_objective) / predicted : 1.0;
      try {
        sens = integrate_with_sensitivities(model, eta_trial, data.times, opts.integrator);
      } catch (const IntegrationError&) {
        lambda *= nu;
        nu *= 2.0;
        continue;
      }
      eta = std::move(eta_trial);
      r = residuals(data, sens.base.states);
      jac = jacobian(data, sens);
      objective = r.squaredNorm();
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3.0));
      nu = 2.0;
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (lambda > 1e16 * (1.0 + jtj.diagonal().maxCoeff())) break;  // stalled
    }
  }

  out.eta = std::move(eta);
  out.objective = objective;
  return out;
}

Eigen::VectorXd perturb_start(const Eigen::VectorXd& init, const FitOptions& opts,
                              RngStream& stream) {
  Eigen::VectorXd eta = init;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    bool positive = opts.lower && (*opts.lower)[k] >= 0.0;
    if (positive) {
      eta[k] = init[k] * std::exp(stream.uniform(std::log(0.25), std::log(4.0)));
    } else {
      double scale = std::abs(init[k]) > 0.0 ? std::abs(init[k]) : 1.0;
      eta[k] = init[k] + stream.uniform(-0.5, 0.5) * scale;
    }
  }
  return clamp_to_bounds(std::move(eta), opts);
}

}  // namespace

std::pair<Eigen::VectorXd, ConvergenceReport> fit_eta(const OdeModel& model, const Dataset& data,
                                                      const Eigen::VectorXd& init,
                                                      const FitOptions& opts) {
  validate(data);
  if (data.d() != model.state_count()) {
    throw UsageError("dataset dimension does not match the model");
  }
  if (init.size() != model.state_count() + model.param_count()) {
    throw UsageError("initial guess length must be d + p");
  }
  if (!init.allFinite()) throw UsageError("initial guess must be finite");
  if (opts.restarts < 1) throw UsageError("restarts must be >= 1");

  ConvergenceReport report;
  StartOutcome best;
  int total_iterations = 0;
  for (int start = 0; start < opts.restarts; ++start) {
    Eigen::VectorXd eta0 = init;
    if (start > 0) {
      RngStream stream(opts.seed, 0xf17u, static_cast<std::uint64_t>(start));
      eta0 = perturb_start(init, opts, stream);
    }
    StartOutcome outcome = lm_single(model, data, std::move(eta0), opts);
    report.restarts_used = start + 1;
    if (!outcome.usable) {
      ++report.starts_failed;
      continue;
    }
    total_iterations += outcome.iterations;
    bool better = outcome.objective < best.objective ||
                  (outcome.objective == best.objective && !best.usable);
    if (better) {
      best = std::move(outcome);
      report.best_start = start;
    }
  }
  if (!best.usable) {
    throw FitError("every optimizer start failed to integrate; model '" + model.name() +
                   "' cannot be evaluated near the initial guess");
  }
  report.converged = best.converged;
  report.iterations = total_iterations;
  report.gradient_norm = best.gradient_norm;
  report.objective = best.objective;
  return {best.eta, report};
}

FitResult fit_mle(const OdeModel& model, const Dataset& data, const Eigen::VectorXd& init,
                  const FitOptions& opts) {
  auto [eta_hat, report] = fit_eta(model, data, init, opts);

  // Integration failure here (at the accepted optimum) is a real error, not a
  // rejected trial step.
  VariationalTrajectory var =
      integrate_with_variations(model, eta_hat, data.times, opts.integrator);

  const Eigen::Index n = data.n(), d = data.d();
  ThetaVector theta;
  theta.xi = eta_hat.head(d);
  theta.psi = eta_hat.tail(model.param_count());
  theta.sigma2.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double ss = (data.obs.col(j) - var.base.base.states.col(j)).squaredNorm();
    theta.sigma2[j] = ss / static_cast<double>(n);
    double floor = 1e-12 * (1.0 + data.obs.col(j).squaredNorm() / static_cast<double>(n));
    if (theta.sigma2[j] < floor) {
      throw DegenerateFitError("fitted variance for state '" +
                               model.state_names()[static_cast<std::size_t>(j)] +
                               "' is numerically zero (perfect fit); the likelihood is degenerate");
    }
  }

  FitResult out;
  out.theta_hat = std::move(theta);
  out.loglik_per_obs = gaussian_loglik(out.theta_hat, data, var.base.base.states);
  out.total_loglik = out.loglik_per_obs.sum();
  out.scores = score_per_obs(out.theta_hat, data, var.base);
  out.hessians = hessian_per_obs(out.theta_hat, data, var);
  auto [h_hat, v_hat] = sandwich_matrices(out.scores, out.hessians);
  out.h_hat = std::move(h_hat);
  out.v_hat = std::move(v_hat);
  out.convergence = report;
  return out;
}

}  // namespace odesel
