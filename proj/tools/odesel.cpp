// odesel: fit competing ODE models to noisy time series and rank them with a
// regularized likelihood-ratio test.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "odesel/errors.hpp"
#include "odesel/io.hpp"
#include "odesel/report.hpp"

namespace {

using namespace odesel;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitNoConvergence = 3;

struct CliOptions {
  std::string data_path;
  std::vector<std::string> model_paths;
  std::vector<std::string> init_specs;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string format = "json";
  bool bonferroni = false;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int restarts = 8;

  // simulate
  std::string study;
  std::vector<double> deltas = {0.1, 0.3};
  int reps = 0;
  int n = 0;
  double tau = 0.0;
  std::string sampling = "uniform";
  std::string power_grid = "psi5";
  std::vector<double> psi5_values = {0.0025, 0.05, 0.1, 0.25};
  std::vector<int> n_values = {20, 60, 110};
  double psi5 = 0.1;
  double sigma = 0.1;
  int threads = 0;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt, bool with_data) {
  if (with_data) {
    cmd->add_option("--data", opt.data_path, "Observation CSV (header: t,<state>,...)")
        ->required();
    cmd->add_option("--model", opt.model_paths, "Model definition file (repeatable)")
        ->required();
    cmd->add_option("--init", opt.init_specs,
                    "Initial guess NAME=VALUE or MODEL:NAME=VALUE (repeatable); NAME is a "
                    "state (sets the initial-value guess) or a parameter");
  }
  cmd->add_option("--alpha", opt.alpha, "Test level in (0,1)")->capture_default_str();
  cmd->add_option("--seed", opt.seed, "Seed for multi-start perturbations / simulations")
      ->capture_default_str();
  cmd->add_option("--out", opt.out_path, "Write the report here instead of stdout");
  cmd->add_option("--format", opt.format, "Report format")
      ->check(CLI::IsMember({"json", "markdown"}))
      ->capture_default_str();
  cmd->add_option("--rel-tol", opt.rel_tol, "Integrator relative tolerance")
      ->capture_default_str();
  cmd->add_option("--abs-tol", opt.abs_tol, "Integrator absolute tolerance")
      ->capture_default_str();
  cmd->add_option("--restarts", opt.restarts, "Optimizer multi-start count")
      ->capture_default_str();
}

RunConfig base_config(const CliOptions& opt, const std::string& subcommand) {
  RunConfig config;
  config.subcommand = subcommand;
  config.data_path = opt.data_path;
  config.model_paths = opt.model_paths;
  config.alpha = opt.alpha;
  config.seed = opt.seed;
  config.bonferroni = opt.bonferroni;
  config.integrator.rel_tol = opt.rel_tol;
  config.integrator.abs_tol = opt.abs_tol;
  config.restarts = opt.restarts;
  config.out_path = opt.out_path;
  config.format = opt.format;
  return config;
}

FitOptions fit_options(const CliOptions& opt) {
  FitOptions fit;
  fit.restarts = opt.restarts;
  fit.seed = opt.seed;
  fit.integrator.rel_tol = opt.rel_tol;
  fit.integrator.abs_tol = opt.abs_tol;
  return fit;
}

struct InitSpec {
  std::string model;  // empty = applies to every model
  std::string name;
  double value = 0.0;
};

std::vector<InitSpec> parse_init_specs(const std::vector<std::string>& specs) {
  std::vector<InitSpec> out;
  for (const std::string& raw : specs) {
    auto eq = raw.rfind('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("--init expects NAME=VALUE or MODEL:NAME=VALUE, got '" + raw + "'");
    }
    InitSpec spec;
    std::string key = raw.substr(0, eq);
    try {
      std::size_t used = 0;
      spec.value = std::stod(raw.substr(eq + 1), &used);
      if (used != raw.size() - eq - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError("--init value in '" + raw + "' is not a number");
    }
    if (auto colon = key.find(':'); colon != std::string::npos) {
      spec.model = key.substr(0, colon);
      spec.name = key.substr(colon + 1);
    } else {
      spec.name = key;
    }
    if (spec.name.empty()) throw UsageError("--init has an empty name in '" + raw + "'");
    out.push_back(std::move(spec));
  }
  return out;
}

// Initial eta for one model: file defaults, then the aligned first
// observation row for still-unset initial values, parameter guess 1.0 when
// nothing better is known, finally --init overrides.
Eigen::VectorXd resolve_init(const OdeModel& model, const Dataset& aligned,
                             const std::vector<InitSpec>& specs, RunConfig* config) {
  const int d = model.state_count();
  const int p = model.param_count();
  Eigen::VectorXd eta(d + p);
  for (int j = 0; j < d; ++j) {
    eta[j] = model.init_guess().empty() ? aligned.obs(0, j)
                                        : model.init_guess()[static_cast<std::size_t>(j)];
  }
  for (int q = 0; q < p; ++q) {
    const auto& guess = model.param_guess()[static_cast<std::size_t>(q)];
    eta[d + q] = guess.value_or(1.0);
  }
  for (const InitSpec& spec : specs) {
    if (!spec.model.empty() && spec.model != model.name()) continue;
    bool found = false;
    for (int j = 0; j < d; ++j) {
      if (model.state_names()[static_cast<std::size_t>(j)] == spec.name) {
        eta[j] = spec.value;
        found = true;
      }
    }
    for (int q = 0; q < p; ++q) {
      if (model.param_names()[static_cast<std::size_t>(q)] == spec.name) {
        eta[d + q] = spec.value;
        found = true;
      }
    }
    if (!found && (spec.model == model.name() || spec.model.empty())) {
      if (!spec.model.empty()) {
        throw UsageError("--init: model '" + spec.model + "' has no state or parameter named '" +
                         spec.name + "'");
      }
      // A global name may legitimately target another model; skip silently.
    }
  }
  // Record the resolved values for reproducibility.
  for (int j = 0; j < d; ++j) {
    config->inits.emplace_back(model.name() + ":" + model.state_names()[static_cast<std::size_t>(j)],
                               eta[j]);
  }
  for (int q = 0; q < p; ++q) {
    config->inits.emplace_back(model.name() + ":" + model.param_names()[static_cast<std::size_t>(q)],
                               eta[d + q]);
  }
  return eta;
}

void emit(const Report& report) {
  std::string text =
      report.config.format == "markdown" ? render_markdown(report) : render_json(report);
  if (report.config.out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(report.config.out_path, text);
  }
}

int run_fit(const CliOptions& opt) {
  if (opt.model_paths.size() != 1) {
    throw UsageError("fit expects exactly one --model");
  }
  RunConfig config = base_config(opt, "fit");
  OdeModel model = read_model_file(opt.model_paths[0]);
  Dataset data = read_dataset_csv(opt.data_path);
  Dataset aligned = align_to_model(data, model);
  auto specs = parse_init_specs(opt.init_specs);
  Eigen::VectorXd init = resolve_init(model, aligned, specs, &config);

  FitResult fit = fit_mle(model, aligned, init, fit_options(opt));
  std::string name = model.name().empty() ? opt.model_paths[0] : model.name();
  emit(make_fit_report(std::move(config), name, model, fit));
  return fit.convergence.converged ? kExitOk : kExitNoConvergence;
}

int run_test(const CliOptions& opt) {
  if (opt.model_paths.size() != 2) {
    throw UsageError("test expects exactly two --model options");
  }
  RunConfig config = base_config(opt, "test");
  OdeModel model_a = read_model_file(opt.model_paths[0]);
  OdeModel model_b = read_model_file(opt.model_paths[1]);
  Dataset data = read_dataset_csv(opt.data_path);
  Dataset aligned_a = align_to_model(data, model_a);
  Dataset aligned_b = align_to_model(data, model_b);
  auto specs = parse_init_specs(opt.init_specs);
  Eigen::VectorXd init_a = resolve_init(model_a, aligned_a, specs, &config);
  Eigen::VectorXd init_b = resolve_init(model_b, aligned_b, specs, &config);

  FitOptions fopts = fit_options(opt);
  FitResult fit_a = fit_mle(model_a, aligned_a, init_a, fopts);
  FitResult fit_b = fit_mle(model_b, aligned_b, init_b, fopts);
  SwTestResult test = run_sw_test(fit_a, fit_b, opt.alpha);
  emit(make_test_report(std::move(config), model_a, fit_a, model_b, fit_b, test));
  bool converged = fit_a.convergence.converged && fit_b.convergence.converged;
  return converged ? kExitOk : kExitNoConvergence;
}

int run_tournament(const CliOptions& opt) {
  if (opt.model_paths.size() < 2) {
    throw UsageError("tournament expects at least two --model options");
  }
  RunConfig config = base_config(opt, "tournament");
  std::vector<OdeModel> models;
  models.reserve(opt.model_paths.size());
  for (const auto& path : opt.model_paths) models.push_back(read_model_file(path));
  Dataset data = read_dataset_csv(opt.data_path);
  auto specs = parse_init_specs(opt.init_specs);

  std::vector<Eigen::VectorXd> inits;
  inits.reserve(models.size());
  for (const OdeModel& model : models) {
    Dataset aligned = align_to_model(data, model);
    inits.push_back(resolve_init(model, aligned, specs, &config));
  }

  TournamentOptions topts;
  topts.fit = fit_options(opt);
  topts.bonferroni = opt.bonferroni;
  TournamentReport tournament = run_tournament(models, data, inits, opt.alpha, topts);
  emit(make_tournament_report(std::move(config), models, tournament));

  bool converged = true;
  for (const ModelSummary& s : tournament.models) {
    if (s.fitted && !s.fit.convergence.converged) converged = false;
  }
  return converged ? kExitOk : kExitNoConvergence;
}

int run_simulate(const CliOptions& opt, bool restarts_given) {
  RunConfig config = base_config(opt, "simulate");
  config.study = opt.study;
  config.threads = opt.threads;
  config.sampling = opt.sampling;

  StudyResult result;
  if (opt.study == "size") {
    SizeStudyConfig study;
    study.deltas = opt.deltas;
    study.reps = opt.reps;
    if (opt.n > 0) study.n = opt.n;
    if (opt.tau > 0) study.tau = opt.tau;
    study.alpha = opt.alpha;
    study.seed = opt.seed;
    study.threads = opt.threads;
    study.sampling =
        opt.sampling == "equispaced" ? TimeSampling::Equispaced : TimeSampling::UniformRandom;
    if (restarts_given) study.fit.restarts = opt.restarts;
    study.fit.integrator.rel_tol = opt.rel_tol;
    study.fit.integrator.abs_tol = opt.abs_tol;
    study.fit.seed = opt.seed;
    config.restarts = study.fit.restarts;
    config.reps = study.reps;
    config.deltas = study.deltas;
    config.n = study.n;
    config.tau = study.tau;
    result = size_study(study);
  } else if (opt.study == "power") {
    PowerStudyConfig study;
    study.grid = opt.power_grid == "n" ? PowerGrid::SampleSize : PowerGrid::Psi5;
    study.psi5_values = opt.psi5_values;
    study.n_values = opt.n_values;
    study.reps = opt.reps;
    if (opt.n > 0) study.n = opt.n;
    if (opt.tau > 0) study.tau = opt.tau;
    study.psi5 = opt.psi5;
    study.sigma = opt.sigma;
    study.alpha = opt.alpha;
    study.seed = opt.seed;
    study.threads = opt.threads;
    if (restarts_given) study.fit.restarts = opt.restarts;
    study.fit.integrator.rel_tol = opt.rel_tol;
    study.fit.integrator.abs_tol = opt.abs_tol;
    study.fit.seed = opt.seed;
    config.restarts = study.fit.restarts;
    config.reps = study.reps;
    config.power_grid = opt.power_grid;
    config.psi5_values = study.psi5_values;
    config.n_values = study.n_values;
    config.n = study.n;
    config.tau = study.tau;
    config.psi5 = study.psi5;
    config.sigma = study.sigma;
    result = power_study(study);
  } else {
    throw UsageError("--study must be 'size' or 'power'");
  }
  emit(make_study_report(std::move(config), result));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"odesel: ODE model selection by regularized likelihood-ratio testing"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* fit = app.add_subcommand("fit", "Maximum-likelihood fit of one model");
  add_common_flags(fit, opt, true);

  CLI::App* test = app.add_subcommand("test", "Pairwise test of two models");
  add_common_flags(test, opt, true);

  CLI::App* tournament =
      app.add_subcommand("tournament", "All-pairs testing across N models");
  add_common_flags(tournament, opt, true);
  tournament->add_flag("--bonferroni", opt.bonferroni,
                       "Also report Bonferroni-adjusted decisions");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo size/power studies");
  add_common_flags(simulate, opt, false);
  simulate->add_option("--study", opt.study, "Which study: size or power")->required();
  simulate->add_option("--reps", opt.reps, "Replications per grid cell")->required();
  simulate->add_option("--n", opt.n, "Observations per replication");
  simulate->add_option("--tau", opt.tau, "Observation window length");
  simulate->add_option("--deltas", opt.deltas, "Size study: shift grid")->delimiter(',');
  simulate->add_option("--sampling", opt.sampling, "Size study: time design")
      ->check(CLI::IsMember({"uniform", "equispaced"}));
  simulate->add_option("--grid", opt.power_grid, "Power study: grid variable")
      ->check(CLI::IsMember({"psi5", "n"}));
  simulate->add_option("--psi5-values", opt.psi5_values, "Power study: psi5 grid")
      ->delimiter(',');
  simulate->add_option("--n-values", opt.n_values, "Power study: sample-size grid")
      ->delimiter(',');
  simulate->add_option("--psi5", opt.psi5, "Power study: fixed psi5 for the n grid");
  simulate->add_option("--sigma", opt.sigma, "Power study: noise sd");
  simulate->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(fit)) return run_fit(opt);
    if (app.got_subcommand(test)) return run_test(opt);
    if (app.got_subcommand(tournament)) return run_tournament(opt);
    return run_simulate(opt, simulate->count("--restarts") > 0);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IntegrationError& e) {
    std::cerr << "error: integration failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DegenerateFitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
