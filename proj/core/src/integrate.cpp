#include "odesel/integrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>

#include "odesel/errors.hpp"

namespace odesel {

namespace {

std::atomic<std::int64_t> g_integration_calls{0};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// 5th-minus-4th order error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

using Rhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

// Adaptive DOPRI5 driver with a PI step controller. Walks the sorted output
// times, clamping the step so each one is hit exactly, and calls `emit` with
// the solution there. Throws IntegrationError on step underflow, persistent
// non-finite right-hand sides, or step budget exhaustion.
void dopri5(const Rhs& rhs, std::vector<double> y, std::span<const double> out_times,
            const IntegratorOptions& opts,
            const std::function<void(std::size_t, const std::vector<double>&)>& emit) {
  const std::size_t n_out = out_times.size();
  if (n_out == 0) return;
  const std::size_t dim = y.size();

  double t = 0.0;
  std::size_t next_out = 0;
  if (out_times[0] <= 0.0) {
    emit(0, y);
    next_out = 1;
  }
  if (next_out >= n_out) return;

  const double t_end = out_times[n_out - 1];
  const double span = t_end - t;
  const double min_step = opts.min_step > 0 ? opts.min_step : 1e-12 * span;

  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  std::vector<double> y_stage(dim), y_new(dim);

  auto finite = [](const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };

  rhs(t, y, k1);
  if (!finite(k1)) {
    throw IntegrationError("non-finite right-hand side at the initial point", t);
  }

  // Initial step: limited by the first output interval and a crude curvature
  // probe in the style of Hairer's starting-step heuristic.
  double h;
  if (opts.initial_step > 0) {
    h = opts.initial_step;
  } else {
    double ynorm = 0, fnorm = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      double sc = opts.abs_tol + opts.rel_tol * std::abs(y[i]);
      ynorm = std::max(ynorm, std::abs(y[i]) / sc);
      fnorm = std::max(fnorm, std::abs(k1[i]) / sc);
    }
    h = (fnorm > 1e-10) ? 0.01 * std::max(ynorm, 1.0) / fnorm : 1e-6 * span;
    h = std::min(h, span / 10.0);
    h = std::max(h, min_step);
  }

  double facold = 1e-4;
  bool last_rejected = false;
  std::int64_t steps = 0;

  while (next_out < n_out) {
    const double t_target = out_times[next_out];
    // Clamp so the output time is hit exactly; a clamped step may be
    // arbitrarily short without signalling underflow.
    bool clamped = t + h >= t_target;
    double h_try = clamped ? t_target - t : h;
    if (++steps > opts.max_steps) {
      throw IntegrationError("maximum step count exceeded", t);
    }
    if (!clamped && h_try < min_step) {
      throw IntegrationError("step size underflow", t);
    }

    auto stage = [&](std::vector<double>& k, double c, auto&&... aw) {
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = y[i];
        ((acc += aw.first * aw.second[i]), ...);
        y_stage[i] = acc;
      }
      rhs(t + c * h_try, y_stage, k);
    };
    auto w = [&](double a, const std::vector<double>& k) {
      return std::pair<double, const std::vector<double>&>(a * h_try, k);
    };

    stage(k2, c2, w(a21, k1));
    stage(k3, c3, w(a31, k1), w(a32, k2));
    stage(k4, c4, w(a41, k1), w(a42, k2), w(a43, k3));
    stage(k5, c5, w(a51, k1), w(a52, k2), w(a53, k3), w(a54, k4));
    stage(k6, 1.0, w(a61, k1), w(a62, k2), w(a63, k3), w(a64, k4), w(a65, k5));
    for (std::size_t i = 0; i < dim; ++i) {
      y_new[i] = y[i] + h_try * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    rhs(t + h_try, y_new, k7);

    double err_sq = 0.0;
    bool ok = finite(y_new) && finite(k7);
    if (ok) {
      for (std::size_t i = 0; i < dim; ++i) {
        double e = h_try * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
        double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        err_sq += (e / sc) * (e / sc);
      }
      if (!std::isfinite(err_sq)) ok = false;
    }
    double err = ok ? std::sqrt(err_sq / static_cast<double>(dim)) : std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      t = clamped ? t_target : t + h_try;
      y.swap(y_new);
      k1.swap(k7);  // FSAL
      if (clamped) {
        emit(next_out, y);
        ++next_out;
      }
      double fac11 = std::pow(std::max(err, 1e-16), 0.17);  // 1/5 - 0.75 * beta, beta = 0.04
      double fac = fac11 / std::pow(facold, 0.04);
      fac = std::max(0.2, std::min(5.0, fac / 0.9));
      double h_new = h_try / fac;
      if (last_rejected) h_new = std::min(h_new, h_try);
      // A clamped step says nothing about the natural scale; keep the larger
      // of the controller proposal and the previous suggestion.
      h = clamped ? std::max(h, h_new) : h_new;
      facold = std::max(err, 1e-4);
      last_rejected = false;
    } else {
      double fac11 = std::isfinite(err) ? std::pow(err, 0.17) : 10.0;
      h = h_try / std::min(10.0, fac11 / 0.9);
      last_rejected = true;
    }
  }
}

void validate_times(const Eigen::VectorXd& times) {
  if (times.size() == 0) throw UsageError("integration needs at least one output time");
  if (times[0] < 0.0) throw UsageError("output times must satisfy t >= 0");
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw UsageError("output times must be strictly increasing");
    }
  }
  if (!times.allFinite()) throw UsageError("output times must be finite");
}

void validate_eta(const OdeModel& model, const Eigen::VectorXd& eta) {
  if (eta.size() != model.state_count() + model.param_count()) {
    throw UsageError("eta length must equal state count + parameter count");
  }
  if (!eta.allFinite()) throw UsageError("eta must be finite");
}

}  // namespace

std::int64_t integration_call_count() { return g_integration_calls.load(); }

Trajectory integrate(const OdeModel& model, const Eigen::VectorXd& eta,
                     const Eigen::VectorXd& times, const IntegratorOptions& opts) {
  g_integration_calls.fetch_add(1, std::memory_order_relaxed);
  validate_times(times);
  validate_eta(model, eta);
  const int d = model.state_count();
  const int p = model.param_count();
  const std::vector<double> psi(eta.data() + d, eta.data() + d + p);

  Trajectory out;
  out.times = times;
  out.states.resize(times.size(), d);

  Rhs rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
    std::span<const double> x(y.data(), static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      dy[static_cast<std::size_t>(j)] = evaluate(*model.rhs(j), x, psi, t);
    }
  };

  std::vector<double> y0(eta.data(), eta.data() + d);
  dopri5(rhs, std::move(y0), std::span<const double>(times.data(), static_cast<std::size_t>(times.size())),
         opts, [&](std::size_t i, const std::vector<double>& y) {
           for (int j = 0; j < d; ++j) out.states(static_cast<Eigen::Index>(i), j) = y[static_cast<std::size_t>(j)];
         });
  return out;
}

SensitivityTrajectory integrate_with_sensitivities(const OdeModel& model,
                                                   const Eigen::VectorXd& eta,
                                                   const Eigen::VectorXd& times,
                                                   const IntegratorOptions& opts) {
  g_integration_calls.fetch_add(1, std::memory_order_relaxed);
  validate_times(times);
  validate_eta(model, eta);
  const int d = model.state_count();
  const int p = model.param_count();
  const int m = d + p;
  const std::vector<double> psi(eta.data() + d, eta.data() + d + p);
  const std::size_t n = static_cast<std::size_t>(times.size());

  SensitivityTrajectory out;
  out.base.times = times;
  out.base.states.resize(times.size(), d);
  out.d = d;
  out.m = m;
  out.sens.assign(n * static_cast<std::size_t>(d) * static_cast<std::size_t>(m), 0.0);

  // Flattened layout: x (d entries), then s_{j,a} at d + j*m + a.
  auto s_at = [m, d](int j, int a) { return static_cast<std::size_t>(d + j * m + a); };

  std::vector<double> jac(static_cast<std::size_t>(d) * d);
  std::vector<double> dfp(static_cast<std::size_t>(d) * std::max(p, 1));

  Rhs rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
    std::span<const double> x(y.data(), static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      dy[static_cast<std::size_t>(j)] = evaluate(*model.rhs(j), x, psi, t);
      for (int k = 0; k < d; ++k) {
        jac[static_cast<std::size_t>(j * d + k)] = evaluate(*model.df_dx(j, k), x, psi, t);
      }
      for (int q = 0; q < p; ++q) {
        dfp[static_cast<std::size_t>(j * p + q)] = evaluate(*model.df_dpsi(j, q), x, psi, t);
      }
    }
    for (int j = 0; j < d; ++j) {
      for (int a = 0; a < m; ++a) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
          acc += jac[static_cast<std::size_t>(j * d + k)] * y[s_at(k, a)];
        }
        if (a >= d) acc += dfp[static_cast<std::size_t>(j * p + (a - d))];
        dy[s_at(j, a)] = acc;
      }
    }
  };

  std::vector<double> y0(static_cast<std::size_t>(d) + static_cast<std::size_t>(d) * m, 0.0);
  for (int j = 0; j < d; ++j) {
    y0[static_cast<std::size_t>(j)] = eta[j];
    y0[s_at(j, j)] = 1.0;  // dx_j(0)/dxi_j; the psi block starts at zero
  }

  dopri5(rhs, std::move(y0), std::span<const double>(times.data(), static_cast<std::size_t>(times.size())),
         opts, [&](std::size_t i, const std::vector<double>& y) {
           for (int j = 0; j < d; ++j) {
             out.base.states(static_cast<Eigen::Index>(i), j) = y[static_cast<std::size_t>(j)];
             for (int a = 0; a < m; ++a) {
               out.sens[(i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)) * m +
                        static_cast<std::size_t>(a)] = y[s_at(j, a)];
             }
           }
         });
  return out;
}

VariationalTrajectory integrate_with_variations(const OdeModel& model, const Eigen::VectorXd& eta,
                                                const Eigen::VectorXd& times,
                                                const IntegratorOptions& opts) {
  g_integration_calls.fetch_add(1, std::memory_order_relaxed);
  validate_times(times);
  validate_eta(model, eta);
  const int d = model.state_count();
  const int p = model.param_count();
  const int m = d + p;
  const std::vector<double> psi(eta.data() + d, eta.data() + d + p);
  const std::size_t n = static_cast<std::size_t>(times.size());

  VariationalTrajectory out;
  out.base.base.times = times;
  out.base.base.states.resize(times.size(), d);
  out.base.d = d;
  out.base.m = m;
  out.base.sens.assign(n * static_cast<std::size_t>(d) * static_cast<std::size_t>(m), 0.0);
  out.var2.assign(n * static_cast<std::size_t>(d) * static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);

  auto s_at = [m, d](int j, int a) { return static_cast<std::size_t>(d + j * m + a); };
  auto z_at = [m, d](int j, int a, int b) {
    return static_cast<std::size_t>(d + d * m + (j * m + a) * m + b);
  };

  std::vector<double> jac(static_cast<std::size_t>(d) * d);
  std::vector<double> dfp(static_cast<std::size_t>(d) * std::max(p, 1));
  std::vector<double> fxx(static_cast<std::size_t>(d) * d * d);
  std::vector<double> fxp(static_cast<std::size_t>(d) * d * std::max(p, 1));
  std::vector<double> fpp(static_cast<std::size_t>(d) * std::max(p, 1) * std::max(p, 1));

  Rhs rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
    std::span<const double> x(y.data(), static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      dy[static_cast<std::size_t>(j)] = evaluate(*model.rhs(j), x, psi, t);
      for (int k = 0; k < d; ++k) {
        jac[static_cast<std::size_t>(j * d + k)] = evaluate(*model.df_dx(j, k), x, psi, t);
        for (int l = 0; l < d; ++l) {
          fxx[static_cast<std::size_t>((j * d + k) * d + l)] =
              evaluate(*model.d2f_dx_dx(j, k, l), x, psi, t);
        }
        for (int q = 0; q < p; ++q) {
          fxp[static_cast<std::size_t>((j * d + k) * p + q)] =
              evaluate(*model.d2f_dx_dpsi(j, k, q), x, psi, t);
        }
      }
      for (int q = 0; q < p; ++q) {
        dfp[static_cast<std::size_t>(j * p + q)] = evaluate(*model.df_dpsi(j, q), x, psi, t);
        for (int mm = 0; mm < p; ++mm) {
          fpp[static_cast<std::size_t>((j * p + q) * p + mm)] =
              evaluate(*model.d2f_dpsi_dpsi(j, q, mm), x, psi, t);
        }
      }
    }

    for (int j = 0; j < d; ++j) {
      for (int a = 0; a < m; ++a) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += jac[static_cast<std::size_t>(j * d + k)] * y[s_at(k, a)];
        if (a >= d) acc += dfp[static_cast<std::size_t>(j * p + (a - d))];
        dy[s_at(j, a)] = acc;
      }
    }

    // dz_{j,ab}/dt = sum_{k,l} F_{x_k x_l} s_{k,a} s_{l,b}
    //             + sum_k F_{x_k psi_b} s_{k,a}   (when b is a psi index)
    //             + sum_k F_{x_k psi_a} s_{k,b}   (when a is a psi index)
    //             + F_{psi_a psi_b}               (when both are)
    //             + sum_k F_{x_k} z_{k,ab}
    for (int j = 0; j < d; ++j) {
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          double acc = 0.0;
          for (int k = 0; k < d; ++k) {
            double sk_a = y[s_at(k, a)];
            if (sk_a != 0.0) {
              double inner = 0.0;
              for (int l = 0; l < d; ++l) {
                inner += fxx[static_cast<std::size_t>((j * d + k) * d + l)] * y[s_at(l, b)];
              }
              acc += inner * sk_a;
            }
            if (b >= d) acc += fxp[static_cast<std::size_t>((j * d + k) * p + (b - d))] * sk_a;
            if (a >= d) acc += fxp[static_cast<std::size_t>((j * d + k) * p + (a - d))] * y[s_at(k, b)];
            acc += jac[static_cast<std::size_t>(j * d + k)] * y[z_at(k, a, b)];
          }
          if (a >= d && b >= d) {
            acc += fpp[static_cast<std::size_t>((j * p + (a - d)) * p + (b - d))];
          }
          dy[z_at(j, a, b)] = acc;
        }
      }
    }
  };

  std::size_t dim = static_cast<std::size_t>(d) * (1 + m + static_cast<std::size_t>(m) * m);
  std::vector<double> y0(dim, 0.0);
  for (int j = 0; j < d; ++j) {
    y0[static_cast<std::size_t>(j)] = eta[j];
    y0[s_at(j, j)] = 1.0;
  }

  dopri5(rhs, std::move(y0), std::span<const double>(times.data(), static_cast<std::size_t>(times.size())),
         opts, [&](std::size_t i, const std::vector<double>& y) {
           for (int j = 0; j < d; ++j) {
             out.base.base.states(static_cast<Eigen::Index>(i), j) = y[static_cast<std::size_t>(j)];
             for (int a = 0; a < m; ++a) {
               out.base.sens[(i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)) * m +
                             static_cast<std::size_t>(a)] = y[s_at(j, a)];
               for (int b = 0; b < m; ++b) {
                 out.var2[((i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)) * m +
                           static_cast<std::size_t>(a)) * m + static_cast<std::size_t>(b)] =
                     y[z_at(j, a, b)];
               }
             }
           }
         });
  return out;
}

}  // namespace odesel
