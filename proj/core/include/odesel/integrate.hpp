#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "odesel/model.hpp"

namespace odesel {

struct IntegratorOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::int64_t max_steps = 1'000'000;
  double initial_step = 0.0;  // 0 = choose automatically
  double min_step = 0.0;      // 0 = 1e-12 * (t_n - t_0)
};

/// Solution values at the requested output times.
struct Trajectory {
  Eigen::VectorXd times;   // strictly increasing
  Eigen::MatrixXd states;  // n x d, row i = x(times[i])
};

/// Trajectory plus first-order sensitivities s_{i,j,a} = dx_j(t_i)/deta_a,
/// where eta = (xi, psi) has length m = d + p (xi block first).
struct SensitivityTrajectory {
  Trajectory base;
  int d = 0;
  int m = 0;
  std::vector<double> sens;  // n * d * m, index (i*d + j)*m + a

  double s(int i, int j, int a) const {
    return sens[(static_cast<std::size_t>(i) * d + j) * m + static_cast<std::size_t>(a)];
  }
};

/// Sensitivities plus second derivatives z_{i,j,a,b} = d2 x_j(t_i)/deta_a deta_b.
struct VariationalTrajectory {
  SensitivityTrajectory base;
  std::vector<double> var2;  // n * d * m * m, index ((i*d + j)*m + a)*m + b

  double z(int i, int j, int a, int b) const {
    int m = base.m;
    return var2[((static_cast<std::size_t>(i) * base.d + j) * m + a) * m +
                static_cast<std::size_t>(b)];
  }
};

/// Integrates dx/dt = F(x, psi, t) from x(0) = xi (eta packs xi then psi) and
/// reports the state at each requested time. Output times are hit exactly by
/// clamping the adaptive step. times must be strictly increasing with
/// times[0] >= 0; if times[0] == 0 the first row equals xi exactly.
Trajectory integrate(const OdeModel& model, const Eigen::VectorXd& eta,
                     const Eigen::VectorXd& times, const IntegratorOptions& opts = {});

/// Jointly integrates the state with the linear sensitivity system
/// ds/dt = (dF/dx) s + dF/deta, s(0) = (I, 0).
SensitivityTrajectory integrate_with_sensitivities(const OdeModel& model,
                                                   const Eigen::VectorXd& eta,
                                                   const Eigen::VectorXd& times,
                                                   const IntegratorOptions& opts = {});

/// Additionally integrates the second-order system for z = d2x/deta2 with
/// z(0) = 0; all three blocks share one adaptive step sequence.
VariationalTrajectory integrate_with_variations(const OdeModel& model,
                                                const Eigen::VectorXd& eta,
                                                const Eigen::VectorXd& times,
                                                const IntegratorOptions& opts = {});

/// Number of integrate* calls made by this process so far. Diagnostic hook
/// used to verify that fits are shared rather than redone per model pair.
std::int64_t integration_call_count();

}  // namespace odesel
