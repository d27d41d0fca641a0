#include <doctest.h>

#include <cmath>

#include "odesel/errors.hpp"
#include "odesel/simulation.hpp"

using namespace odesel;

namespace {

DgpSpec linear_spec(std::uint64_t seed, int n, TimeSampling sampling, double sigma2) {
  DgpSpec spec;
  spec.model = size_dgp_model();
  spec.theta_true.sigma2 = Eigen::VectorXd::Constant(1, sigma2);
  spec.theta_true.xi = Eigen::VectorXd::Constant(1, 100.0);
  spec.theta_true.psi = Eigen::VectorXd(0);
  spec.n = n;
  spec.sampling = sampling;
  spec.tau = 150.0;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("simulate_dataset: zero noise returns the trajectory exactly") {
  DgpSpec spec = linear_spec(5, 20, TimeSampling::Equispaced, 0.0);
  Dataset data = simulate_dataset(spec);
  Trajectory traj = integrate(spec.model, spec.theta_true.eta(), data.times);
  CHECK((data.obs - traj.states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate_dataset: equispaced grid hits the stated points") {
  DgpSpec spec = linear_spec(5, 4, TimeSampling::Equispaced, 0.0);
  spec.tau = 3.0;
  Dataset data = simulate_dataset(spec);
  CHECK(data.times[0] == 0.0);
  CHECK(data.times[1] == doctest::Approx(1.0));
  CHECK(data.times[2] == doctest::Approx(2.0));
  CHECK(data.times[3] == doctest::Approx(3.0));
}

TEST_CASE("simulate_dataset: uniform sampling is sorted and in range") {
  DgpSpec spec = linear_spec(17, 100, TimeSampling::UniformRandom, 49.0);
  Dataset data = simulate_dataset(spec);
  for (int i = 1; i < 100; ++i) CHECK(data.times[i] > data.times[i - 1]);
  CHECK(data.times[0] >= 0.0);
  CHECK(data.times[99] <= 150.0);
}

TEST_CASE("simulate_dataset: residual sample mean is near zero (sd 7, n 300)") {
  DgpSpec spec = linear_spec(99, 300, TimeSampling::UniformRandom, 49.0);
  Dataset data = simulate_dataset(spec);
  Trajectory traj = integrate(spec.model, spec.theta_true.eta(), data.times);
  double mean_residual = (data.obs.col(0) - traj.states.col(0)).mean();
  CHECK(std::abs(mean_residual) <= 3.0 * 7.0 / std::sqrt(300.0));
}

TEST_CASE("simulate_dataset: identical seeds give bit-identical datasets") {
  Dataset a = simulate_dataset(linear_spec(1234, 50, TimeSampling::UniformRandom, 49.0));
  Dataset b = simulate_dataset(linear_spec(1234, 50, TimeSampling::UniformRandom, 49.0));
  CHECK(a.times == b.times);
  CHECK(a.obs == b.obs);
  Dataset c = simulate_dataset(linear_spec(1235, 50, TimeSampling::UniformRandom, 49.0));
  CHECK(a.obs != c.obs);
}

TEST_CASE("kl_linear: zero shift, quadratic scaling, trapezoid oracle") {
  CHECK(kl_linear(0.0, 7.0, -0.05, 150.0) == 0.0);

  // KL(2 delta) / KL(delta) = 4 exactly (the shift factors out).
  for (double delta : {0.02, 0.1, 0.27}) {
    double r = kl_linear(2.0 * delta, 7.0, -0.05, 150.0) / kl_linear(delta, 7.0, -0.05, 150.0);
    CHECK(std::abs(r - 4.0) <= 4.0 * 1e-10);
  }

  // Dense-trapezoid oracle with 1e6 nodes.
  const double delta = 0.1, sigma = 7.0, psi1 = -0.05, T = 150.0;
  const int nodes = 1000000;
  double acc = 0.0;
  for (int i = 0; i <= nodes; ++i) {
    double t = T * static_cast<double>(i) / nodes;
    double u = 1.0 - std::exp(psi1 * t);
    double w = (i == 0 || i == nodes) ? 0.5 : 1.0;
    acc += w * u * u;
  }
  double integral = acc * (T / nodes);
  double oracle = delta * delta / (2.0 * sigma * sigma * psi1 * psi1) * integral / T;
  CHECK(kl_linear(delta, sigma, psi1, T) == doctest::Approx(oracle).epsilon(1e-8));

  CHECK_THROWS_AS(kl_linear(0.1, 7.0, 0.0, 150.0), UsageError);
  CHECK_THROWS_AS(kl_linear(0.1, 7.0, -0.05, 0.0), UsageError);
}

TEST_CASE("size_study: validation errors") {
  SizeStudyConfig config;
  config.alpha = 0.0;
  CHECK_THROWS_AS(size_study(config), UsageError);
  SizeStudyConfig zero_reps;
  zero_reps.reps = 0;
  CHECK_THROWS_AS(size_study(zero_reps), UsageError);
  SizeStudyConfig bad_delta;
  bad_delta.deltas = {-0.1};
  CHECK_THROWS_AS(size_study(bad_delta), UsageError);
}

TEST_CASE("size_study: seed determinism, bit for bit") {
  SizeStudyConfig config;
  config.deltas = {0.3};
  config.reps = 12;
  config.n = 60;
  config.seed = 77;
  config.threads = 2;
  StudyResult a = size_study(config);
  config.threads = 1;  // thread count must not change anything
  StudyResult b = size_study(config);
  REQUIRE(a.cells.size() == 1);
  CHECK(a.cells[0].rejections == b.cells[0].rejections);
  CHECK(a.cells[0].favor_a == b.cells[0].favor_a);
  CHECK(a.cells[0].favor_b == b.cells[0].favor_b);
  CHECK(a.cells[0].rate == b.cells[0].rate);
  CHECK(a.cells[0].replications + a.cells[0].failures == 12);
}

TEST_CASE("size_study: desk-scale rejection rate and directional symmetry" *
          doctest::timeout(900)) {
  SizeStudyConfig config;
  config.deltas = {0.1};
  config.reps = 200;
  config.n = 300;
  config.tau = 150.0;
  config.alpha = 0.05;
  config.seed = 2027;
  StudyResult result = size_study(config);
  REQUIRE(result.cells.size() == 1);
  const StudyCell& cell = result.cells[0];
  CHECK(cell.replications >= 195);  // integration failures should be rare
  CHECK(cell.rate >= 0.02);
  CHECK(cell.rate <= 0.09);

  // The two models sit at equal KL distance, so rejections split evenly.
  double ra = static_cast<double>(cell.favor_a) / cell.replications;
  double rb = static_cast<double>(cell.favor_b) / cell.replications;
  double se = std::sqrt((ra * (1 - ra) + rb * (1 - rb)) / cell.replications);
  CHECK(std::abs(ra - rb) <= 3.0 * std::max(se, 1e-3));
}

TEST_CASE("power models coincide at psi5 = 0") {
  OdeModel plain = lv_plain_model();
  OdeModel logistic = lv_logistic_prey_model();
  Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(10, 0.0, 20.0);
  Eigen::VectorXd eta_plain(6);
  eta_plain << 1.0, 2.0, 1.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd eta_logistic(7);
  eta_logistic << 1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 0.0;
  Trajectory a = integrate(plain, eta_plain, times);
  Trajectory b = integrate(logistic, eta_logistic, times);
  CHECK((a.states - b.states).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("power_study: structure and determinism at a small scale" * doctest::timeout(900)) {
  PowerStudyConfig config;
  config.grid = PowerGrid::Psi5;
  config.psi5_values = {0.25};
  config.reps = 6;
  config.n = 20;
  config.seed = 5;
  config.threads = 2;
  StudyResult a = power_study(config);
  REQUIRE(a.cells.size() == 1);
  CHECK(a.cells[0].replications + a.cells[0].failures == 6);
  CHECK(a.cells[0].rate == doctest::Approx(static_cast<double>(a.cells[0].favor_b) /
                                           a.cells[0].replications));

  StudyResult b = power_study(config);
  CHECK(a.cells[0].favor_b == b.cells[0].favor_b);
  CHECK(a.cells[0].rejections == b.cells[0].rejections);
}
