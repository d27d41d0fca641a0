#include <benchmark/benchmark.h>

#include "odesel/fit.hpp"
#include "odesel/rng.hpp"
#include "odesel/simulation.hpp"
#include "odesel/swtest.hpp"

using namespace odesel;

namespace {

OdeModel lv_model() { return lv_plain_model(); }

Eigen::VectorXd lv_eta() {
  Eigen::VectorXd eta(6);
  eta << 101.2, 116.0, 0.66, 0.012, 1.45, 1.122;
  return eta;
}

void bm_expr_eval(benchmark::State& state) {
  OdeModel m = lv_model();
  std::vector<double> x = {101.2, 116.0};
  std::vector<double> psi = {0.66, 0.012, 1.45, 1.122};
  for (auto _ : state) {
    double v = evaluate(*m.rhs(0), x, psi, 0.0) + evaluate(*m.rhs(1), x, psi, 0.0);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(bm_expr_eval);

void bm_integrate(benchmark::State& state) {
  OdeModel m = lv_model();
  Eigen::VectorXd eta = lv_eta();
  Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(20, 0.0, 18.0);
  for (auto _ : state) {
    Trajectory traj = integrate(m, eta, times);
    benchmark::DoNotOptimize(traj.states.sum());
  }
}
BENCHMARK(bm_integrate);

void bm_integrate_sensitivities(benchmark::State& state) {
  OdeModel m = lv_model();
  Eigen::VectorXd eta = lv_eta();
  Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(20, 0.0, 18.0);
  for (auto _ : state) {
    SensitivityTrajectory sens = integrate_with_sensitivities(m, eta, times);
    benchmark::DoNotOptimize(sens.sens.back());
  }
}
BENCHMARK(bm_integrate_sensitivities);

void bm_integrate_variations(benchmark::State& state) {
  OdeModel m = lv_model();
  Eigen::VectorXd eta = lv_eta();
  Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(20, 0.0, 18.0);
  for (auto _ : state) {
    VariationalTrajectory var = integrate_with_variations(m, eta, times);
    benchmark::DoNotOptimize(var.var2.back());
  }
}
BENCHMARK(bm_integrate_variations);

void bm_fit_linear_shift(benchmark::State& state) {
  DgpSpec spec;
  spec.model = size_dgp_model();
  spec.theta_true.sigma2 = Eigen::VectorXd::Constant(1, 49.0);
  spec.theta_true.xi = Eigen::VectorXd::Constant(1, 100.0);
  spec.theta_true.psi = Eigen::VectorXd(0);
  spec.n = 300;
  spec.sampling = TimeSampling::UniformRandom;
  spec.tau = 150.0;
  spec.seed = 99;
  Dataset data = simulate_dataset(spec);
  OdeModel model = size_candidate_model(0.9);
  Eigen::VectorXd init = Eigen::VectorXd::Constant(1, data.obs(0, 0));
  FitOptions opts;
  opts.restarts = 1;
  for (auto _ : state) {
    FitResult fit = fit_mle(model, data, init, opts);
    benchmark::DoNotOptimize(fit.total_loglik);
  }
}
BENCHMARK(bm_fit_linear_shift);

void bm_sw_pipeline(benchmark::State& state) {
  // Statistic assembly on precomputed log-density sequences.
  const int n = 300;
  RngStream rng(1);
  Eigen::VectorXd logp(n), logq(n);
  for (int i = 0; i < n; ++i) {
    logp[i] = rng.normal();
    logq[i] = 0.8 * rng.normal() + 0.1;
  }
  VarianceComponents vc = variance_components(logp, logq);
  for (auto _ : state) {
    double t = sw_statistic(logp, logq, vc, 0.25, n);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(bm_sw_pipeline);

}  // namespace

BENCHMARK_MAIN();
