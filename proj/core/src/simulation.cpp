#include "odesel/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include "odesel/errors.hpp"
#include "odesel/rng.hpp"
#include "odesel/swtest.hpp"

namespace odesel {

namespace {

std::string format_constant(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

// Runs fn(0..count-1) on worker threads. Callers store results by index, so
// the outcome is identical whatever the thread count.
void run_parallel(int threads, int count, const std::function<void(int)>& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

enum class RepOutcome : int { Retain = 0, FavorA = 1, FavorB = 2, Failed = 3 };

struct CellTally {
  int completed = 0, rejections = 0, favor_a = 0, favor_b = 0, failures = 0;
};

StudyCell make_cell(double grid_value, const CellTally& tally, double rate_numerator) {
  StudyCell cell;
  cell.grid_value = grid_value;
  cell.replications = tally.completed;
  cell.rejections = tally.rejections;
  cell.favor_a = tally.favor_a;
  cell.favor_b = tally.favor_b;
  cell.failures = tally.failures;
  if (tally.completed > 0) {
    cell.rate = rate_numerator / static_cast<double>(tally.completed);
    cell.mc_se = std::sqrt(cell.rate * (1.0 - cell.rate) / static_cast<double>(tally.completed));
  }
  return cell;
}

}  // namespace

OdeModel size_dgp_model() {
  return parse_model("name: linear_dgp\nstates: x\nparams:\nx' = -0.05 * x + 1\n");
}

OdeModel size_candidate_model(double psi2) {
  std::ostringstream text;
  text << "name: linear_shift\nstates: x\nparams:\n"
       << "x' = -0.05 * x + " << format_constant(psi2) << "\n";
  return parse_model(text.str());
}

OdeModel lv_plain_model() {
  return parse_model(
      "name: lv_plain\n"
      "states: x1, x2\n"
      "params: psi1, psi2, psi3, psi4\n"
      "x1' = psi2 * psi3 * x1 * x2 - psi4 * x1\n"
      "x2' = psi1 * x2 - psi2 * x1 * x2\n");
}

OdeModel lv_logistic_prey_model() {
  return parse_model(
      "name: lv_logistic_prey\n"
      "states: x1, x2\n"
      "params: psi1, psi2, psi3, psi4, psi5\n"
      "x1' = psi2 * psi3 * x1 * x2 - psi4 * x1\n"
      "x2' = psi1 * x2 * (1 - psi5 * x2) - psi2 * x1 * x2\n");
}

Dataset simulate_dataset(const DgpSpec& spec, const IntegratorOptions& opts) {
  if (spec.n < 2) throw UsageError("simulate_dataset needs n >= 2");
  if (!(spec.tau > 0.0)) throw UsageError("simulate_dataset needs tau > 0");
  if ((spec.theta_true.sigma2.array() < 0.0).any()) {
    throw UsageError("noise variances must be nonnegative");
  }

  const int d = spec.model.state_count();
  Eigen::VectorXd times(spec.n);
  if (spec.sampling == TimeSampling::Equispaced) {
    for (int i = 0; i < spec.n; ++i) {
      times[i] = spec.tau * static_cast<double>(i) / static_cast<double>(spec.n - 1);
    }
  } else {
    RngStream stream(spec.seed, 1);
    std::vector<double> draws(static_cast<std::size_t>(spec.n));
    for (auto& v : draws) v = stream.uniform(0.0, spec.tau);
    std::sort(draws.begin(), draws.end());
    for (int i = 0; i < spec.n; ++i) times[i] = draws[static_cast<std::size_t>(i)];
  }

  Trajectory traj = integrate(spec.model, spec.theta_true.eta(), times, opts);

  Dataset data;
  data.times = std::move(times);
  data.obs = traj.states;
  data.names = spec.model.state_names();
  RngStream noise(spec.seed, 2);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < d; ++j) {
      double sd = std::sqrt(spec.theta_true.sigma2[j]);
      if (sd > 0.0) data.obs(i, j) += sd * noise.normal();
    }
  }
  return data;
}

StudyResult size_study(const SizeStudyConfig& config) {
  if (config.deltas.empty()) throw UsageError("size_study needs at least one delta");
  for (double d : config.deltas) {
    if (!(d > 0.0)) throw UsageError("size_study deltas must be > 0");
  }
  if (config.reps < 1) throw UsageError("size_study needs reps >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");

  const OdeModel dgp = size_dgp_model();

  StudyResult result;
  result.grid_name = "delta";
  result.alpha = config.alpha;
  result.requested_reps = config.reps;
  result.seed = config.seed;
  result.notes = config.sampling == TimeSampling::Equispaced
                     ? "linear DGP, equispaced observation times"
                     : "linear DGP, uniform-random observation times";

  ThetaVector theta_true;
  theta_true.sigma2 = Eigen::VectorXd::Constant(1, 49.0);
  theta_true.xi = Eigen::VectorXd::Constant(1, 100.0);
  theta_true.psi = Eigen::VectorXd(0);

  for (std::size_t cell_idx = 0; cell_idx < config.deltas.size(); ++cell_idx) {
    const double delta = config.deltas[cell_idx];
    const OdeModel model_a = size_candidate_model(1.0 - delta);
    const OdeModel model_b = size_candidate_model(1.0 + delta);

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(config.reps));
    run_parallel(config.threads, config.reps, [&](int rep) {
      DgpSpec spec{dgp, theta_true, config.n, config.sampling, config.tau,
                   RngStream(config.seed, cell_idx, static_cast<std::uint64_t>(rep)).next_u64()};
      try {
        Dataset data = simulate_dataset(spec, config.fit.integrator);
        Eigen::VectorXd init = Eigen::VectorXd::Constant(1, data.obs(0, 0));
        FitResult fit_a = fit_mle(model_a, data, init, config.fit);
        FitResult fit_b = fit_mle(model_b, data, init, config.fit);
        SwTestResult test = run_sw_test(fit_a, fit_b, config.alpha);
        outcomes[static_cast<std::size_t>(rep)] = static_cast<RepOutcome>(test.decision);
      } catch (...) {
        outcomes[static_cast<std::size_t>(rep)] = RepOutcome::Failed;
      }
    });

    CellTally tally;
    for (RepOutcome o : outcomes) {
      if (o == RepOutcome::Failed) {
        ++tally.failures;
        continue;
      }
      ++tally.completed;
      if (o == RepOutcome::FavorA) ++tally.favor_a;
      if (o == RepOutcome::FavorB) ++tally.favor_b;
      if (o != RepOutcome::Retain) ++tally.rejections;
    }
    result.cells.push_back(make_cell(delta, tally, static_cast<double>(tally.rejections)));
  }
  return result;
}

StudyResult power_study(const PowerStudyConfig& config) {
  if (config.reps < 1) throw UsageError("power_study needs reps >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  const bool over_psi5 = config.grid == PowerGrid::Psi5;
  if (over_psi5 && config.psi5_values.empty()) {
    throw UsageError("power_study needs at least one psi5 value");
  }
  if (!over_psi5 && config.n_values.empty()) {
    throw UsageError("power_study needs at least one sample size");
  }

  const OdeModel model_a = lv_plain_model();
  const OdeModel model_b = lv_logistic_prey_model();

  StudyResult result;
  result.grid_name = over_psi5 ? "psi5" : "n";
  result.alpha = config.alpha;
  result.requested_reps = config.reps;
  result.seed = config.seed;
  {
    std::ostringstream notes;
    notes << "logistic-prey DGP, equispaced times on [0, " << config.tau
          << "], equal noise on both states (sd " << config.sigma
          << "); rate = share of decisions favoring the logistic-prey model";
    result.notes = notes.str();
  }

  const std::size_t cells = over_psi5 ? config.psi5_values.size() : config.n_values.size();
  for (std::size_t cell_idx = 0; cell_idx < cells; ++cell_idx) {
    const double psi5 = over_psi5 ? config.psi5_values[cell_idx] : config.psi5;
    const int n = over_psi5 ? config.n : config.n_values[cell_idx];

    ThetaVector theta_true;
    theta_true.sigma2 = Eigen::VectorXd::Constant(2, config.sigma * config.sigma);
    theta_true.xi = Eigen::VectorXd(2);
    theta_true.xi << 1.0, 2.0;
    theta_true.psi = Eigen::VectorXd(5);
    theta_true.psi << 1.0, 1.0, 1.0, 1.0, psi5;

    Eigen::VectorXd init_b = theta_true.eta();
    Eigen::VectorXd init_a(6);
    init_a << 1.0, 2.0, 1.0, 1.0, 1.0, 1.0;

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(config.reps));
    run_parallel(config.threads, config.reps, [&](int rep) {
      DgpSpec spec{model_b, theta_true, n, config.sampling, config.tau,
                   RngStream(config.seed, 0x9e3777u, cell_idx, static_cast<std::uint64_t>(rep))
                       .next_u64()};
      try {
        Dataset data = simulate_dataset(spec, config.fit.integrator);
        FitResult fit_a = fit_mle(model_a, data, init_a, config.fit);
        FitResult fit_b = fit_mle(model_b, data, init_b, config.fit);
        SwTestResult test = run_sw_test(fit_a, fit_b, config.alpha);
        outcomes[static_cast<std::size_t>(rep)] = static_cast<RepOutcome>(test.decision);
      } catch (...) {
        outcomes[static_cast<std::size_t>(rep)] = RepOutcome::Failed;
      }
    });

    CellTally tally;
    for (RepOutcome o : outcomes) {
      if (o == RepOutcome::Failed) {
        ++tally.failures;
        continue;
      }
      ++tally.completed;
      if (o == RepOutcome::FavorA) ++tally.favor_a;
      if (o == RepOutcome::FavorB) ++tally.favor_b;
      if (o != RepOutcome::Retain) ++tally.rejections;
    }
    result.cells.push_back(make_cell(over_psi5 ? psi5 : static_cast<double>(n), tally,
                                     static_cast<double>(tally.favor_b)));
  }
  return result;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double fa, double b,
                        double fb, double m, double fm, double whole, double eps, int depth) {
  if (depth > 60) {
    throw Error("kl_linear: adaptive quadrature failed to converge");
  }
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, fa, m, fm, flm);
  double right = simpson(m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth + 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth + 1);
}

}  // namespace

double kl_linear(double delta, double sigma, double psi1, double T) {
  if (psi1 == 0.0) throw UsageError("kl_linear needs psi1 != 0");
  if (!(T > 0.0)) throw UsageError("kl_linear needs T > 0");
  if (!(sigma > 0.0)) throw UsageError("kl_linear needs sigma > 0");
  if (delta == 0.0) return 0.0;

  std::function<double(double)> f = [psi1](double t) {
    double u = 1.0 - std::exp(psi1 * t);
    return u * u;
  };
  double fa = f(0.0), fb = f(T), fm = f(0.5 * T);
  double whole = simpson(0.0, fa, T, fb, fm);
  double integral = adaptive_simpson(f, 0.0, fa, T, fb, 0.5 * T, fm, whole,
                                     1e-13 * std::max(std::abs(whole), 1.0), 0);
  // f_T is the uniform density 1/T.
  double factor = delta * delta / (2.0 * sigma * sigma * psi1 * psi1);
  return factor * integral / T;
}

}  // namespace odesel
