#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "odesel/io.hpp"
#include "odesel/report.hpp"
#include "odesel/simulation.hpp"
#include "support/json_schema_lite.hpp"

using namespace odesel;

namespace {

nlohmann::json load_schema() {
  return nlohmann::json::parse(read_text_file(std::string(ODESEL_ROOT) +
                                              "/schemas/report.schema.json"));
}

Report sample_tournament_report() {
  DgpSpec spec;
  spec.model = size_dgp_model();
  spec.theta_true.sigma2 = Eigen::VectorXd::Constant(1, 25.0);
  spec.theta_true.xi = Eigen::VectorXd::Constant(1, 100.0);
  spec.theta_true.psi = Eigen::VectorXd(0);
  spec.n = 30;
  spec.sampling = TimeSampling::Equispaced;
  spec.tau = 120.0;
  spec.seed = 3;
  Dataset data = simulate_dataset(spec);

  std::vector<OdeModel> models;
  models.push_back(size_candidate_model(0.9));
  models.push_back(size_candidate_model(1.1));
  std::vector<Eigen::VectorXd> inits(2, Eigen::VectorXd::Constant(1, 100.0));
  TournamentOptions opts;
  opts.fit.restarts = 1;
  opts.bonferroni = true;
  TournamentReport tournament = run_tournament(models, data, inits, 0.05, opts);

  RunConfig config;
  config.subcommand = "tournament";
  config.data_path = "synthetic.csv";
  config.model_paths = {"a.ode", "b.ode"};
  config.bonferroni = true;
  return make_tournament_report(config, models, tournament);
}

}  // namespace

TEST_CASE("json report validates against the shipped schema") {
  Report report = sample_tournament_report();
  nlohmann::json parsed = nlohmann::json::parse(render_json(report));
  auto errors = schema_lite::check(parsed, load_schema());
  for (const auto& e : errors) CAPTURE(e);
  CHECK(errors.empty());

  CHECK(parsed["version"] == "1");
  CHECK(parsed["config"]["subcommand"] == "tournament");
  CHECK(parsed["tests"].size() == 1);
  CHECK(parsed["fits"].size() == 2);
  CHECK(parsed.contains("adjusted_alpha"));
}

TEST_CASE("study report validates against the shipped schema") {
  SizeStudyConfig config;
  config.deltas = {0.3};
  config.reps = 5;
  config.n = 40;
  config.seed = 9;
  StudyResult study = size_study(config);

  RunConfig run;
  run.subcommand = "simulate";
  run.study = "size";
  run.reps = 5;
  run.n = 40;
  run.tau = 150.0;
  run.deltas = {0.3};
  Report report = make_study_report(run, study);
  nlohmann::json parsed = nlohmann::json::parse(render_json(report));
  auto errors = schema_lite::check(parsed, load_schema());
  for (const auto& e : errors) CAPTURE(e);
  CHECK(errors.empty());
  CHECK(parsed["study"]["cells"].size() == 1);
}

TEST_CASE("markdown numbers agree with json numbers at 6 significant digits") {
  Report report = sample_tournament_report();
  nlohmann::json parsed = nlohmann::json::parse(render_json(report));
  std::string markdown = render_markdown(report);

  auto fmt6 = [](double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
  };
  double t_stat = parsed["tests"][0]["t_stat"].get<double>();
  double h_n = parsed["tests"][0]["h_n"].get<double>();
  CHECK(markdown.find(fmt6(t_stat)) != std::string::npos);
  CHECK(markdown.find(fmt6(h_n)) != std::string::npos);
  double sigma2 = parsed["fits"][0]["theta"]["sigma2"][0].get<double>();
  CHECK(markdown.find(fmt6(sigma2)) != std::string::npos);
}

TEST_CASE("render_json is deterministic for identical inputs") {
  Report a = sample_tournament_report();
  Report b = sample_tournament_report();
  CHECK(render_json(a) == render_json(b));
}

TEST_CASE("reports embed the resolved configuration") {
  Report report = sample_tournament_report();
  nlohmann::json parsed = nlohmann::json::parse(render_json(report));
  const auto& config = parsed["config"];
  CHECK(config.contains("alpha"));
  CHECK(config.contains("seed"));
  CHECK(config.contains("integrator"));
  CHECK(config["integrator"].contains("rel_tol"));
  CHECK(config.contains("restarts"));
  CHECK(config["models"].size() == 2);
}
