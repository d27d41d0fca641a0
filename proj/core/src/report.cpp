#include "odesel/report.hpp"

#include <iomanip>
#include <json.hpp>
#include <sstream>

namespace odesel {

namespace {

using Json = nlohmann::ordered_json;

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Json config_json(const RunConfig& c) {
  Json out;
  out["subcommand"] = c.subcommand;
  if (!c.data_path.empty()) out["data"] = c.data_path;
  if (!c.model_paths.empty()) out["models"] = c.model_paths;
  if (!c.inits.empty()) {
    Json inits;
    for (const auto& [key, value] : c.inits) inits[key] = value;
    out["inits"] = std::move(inits);
  }
  out["alpha"] = c.alpha;
  out["seed"] = c.seed;
  out["bonferroni"] = c.bonferroni;
  out["integrator"] = Json{{"rel_tol", c.integrator.rel_tol},
                           {"abs_tol", c.integrator.abs_tol},
                           {"max_steps", c.integrator.max_steps}};
  out["restarts"] = c.restarts;
  out["format"] = c.format;
  if (!c.out_path.empty()) out["out"] = c.out_path;
  if (c.subcommand == "simulate") {
    Json study;
    study["study"] = c.study;
    study["reps"] = c.reps;
    study["threads"] = c.threads;
    if (c.study == "size") {
      study["deltas"] = c.deltas;
      study["n"] = c.n;
      study["tau"] = c.tau;
      study["sampling"] = c.sampling;
    } else if (c.study == "power") {
      study["grid"] = c.power_grid;
      if (c.power_grid == "psi5") {
        study["psi5_values"] = c.psi5_values;
        study["n"] = c.n;
      } else {
        study["n_values"] = c.n_values;
        study["psi5"] = c.psi5;
      }
      study["sigma"] = c.sigma;
      study["tau"] = c.tau;
    }
    out["study"] = std::move(study);
  }
  return out;
}

Json fit_json(const FitEntry& entry) {
  Json out;
  out["model"] = entry.model;
  out["fitted"] = entry.fitted;
  if (!entry.fitted) {
    out["error"] = entry.error;
    return out;
  }
  const FitResult& fit = entry.result;
  out["states"] = entry.state_names;
  out["params"] = entry.param_names;
  out["theta"] = Json{{"sigma2", to_json(fit.theta_hat.sigma2)},
                      {"xi", to_json(fit.theta_hat.xi)},
                      {"psi", to_json(fit.theta_hat.psi)}};
  out["total_loglik"] = fit.total_loglik;
  out["convergence"] = Json{{"converged", fit.convergence.converged},
                            {"iterations", fit.convergence.iterations},
                            {"restarts_used", fit.convergence.restarts_used},
                            {"starts_failed", fit.convergence.starts_failed},
                            {"best_start", fit.convergence.best_start},
                            {"gradient_norm", fit.convergence.gradient_norm},
                            {"objective", fit.convergence.objective}};
  out["H_hat"] = to_json(fit.h_hat);
  out["V_hat"] = to_json(fit.v_hat);
  return out;
}

Json test_json(const TestEntry& entry) {
  const SwTestResult& r = entry.result;
  Json out;
  out["model_a"] = entry.model_a;
  out["model_b"] = entry.model_b;
  out["t_stat"] = r.t_stat;
  out["h_n"] = r.h_n;
  out["lr_tilde"] = r.lr_tilde;
  out["sigma_tilde2"] = r.sigma_tilde2;
  out["alpha"] = r.alpha;
  out["decision"] = to_string(r.decision);
  if (entry.adjusted_decision) out["adjusted_decision"] = to_string(*entry.adjusted_decision);
  out["variance_components"] = Json{{"sigma_p2", r.vc.sigma_p2},
                                    {"sigma_pq", r.vc.sigma_pq},
                                    {"sigma_q2", r.vc.sigma_q2},
                                    {"sigma2", r.vc.sigma2}};
  out["diagnostics"] = Json{{"c_sd", r.diag.c_sd},
                            {"c_pl", r.diag.c_pl},
                            {"delta_hat", r.diag.delta_hat},
                            {"trace_p", r.diag.trace_p},
                            {"trace_q", r.diag.trace_q},
                            {"sigma_hat", r.diag.sigma_hat},
                            {"fallback_unit_ratio", r.diag.fallback_unit_ratio},
                            {"pinv_p", r.diag.pinv_p},
                            {"pinv_q", r.diag.pinv_q}};
  return out;
}

Json study_json(const StudyResult& s) {
  Json cells = Json::array();
  for (const StudyCell& c : s.cells) {
    cells.push_back(Json{{"value", c.grid_value},
                         {"replications", c.replications},
                         {"rejections", c.rejections},
                         {"favor_a", c.favor_a},
                         {"favor_b", c.favor_b},
                         {"failures", c.failures},
                         {"rate", c.rate},
                         {"mc_se", c.mc_se}});
  }
  return Json{{"grid", s.grid_name},  {"alpha", s.alpha}, {"requested_reps", s.requested_reps},
              {"seed", s.seed},       {"notes", s.notes}, {"cells", std::move(cells)}};
}

// 6 significant digits for the human-readable rendering.
std::string fmt6(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

std::string favor_label(const TestEntry& entry, Decision d) {
  switch (d) {
    case Decision::Retain: return "-";
    case Decision::FavorA: return entry.model_a;
    case Decision::FavorB: return entry.model_b;
  }
  return "-";
}

}  // namespace

std::string render_json(const Report& report) {
  Json out;
  out["version"] = kReportVersion;
  out["config"] = config_json(report.config);
  if (!report.fits.empty()) {
    Json fits = Json::array();
    for (const FitEntry& f : report.fits) fits.push_back(fit_json(f));
    out["fits"] = std::move(fits);
  }
  if (!report.tests.empty()) {
    Json tests = Json::array();
    for (const TestEntry& t : report.tests) tests.push_back(test_json(t));
    out["tests"] = std::move(tests);
    if (report.adjusted_alpha) out["adjusted_alpha"] = *report.adjusted_alpha;
    if (!report.ranking.empty()) out["ranking"] = report.ranking;
  }
  if (report.study) out["study"] = study_json(*report.study);
  return out.dump(2) + "\n";
}

std::string render_markdown(const Report& report) {
  std::ostringstream out;
  out << "# odesel " << report.config.subcommand << " report\n\n";
  out << "- alpha: " << fmt6(report.config.alpha) << "\n";
  out << "- seed: " << report.config.seed << "\n";
  if (!report.config.data_path.empty()) out << "- data: " << report.config.data_path << "\n";
  for (const auto& path : report.config.model_paths) out << "- model: " << path << "\n";
  out << "\n";

  if (!report.fits.empty()) {
    out << "## Fits\n\n";
    for (const FitEntry& f : report.fits) {
      out << "### " << f.model << "\n\n";
      if (!f.fitted) {
        out << "fit failed: " << f.error << "\n\n";
        continue;
      }
      out << "| parameter | estimate |\n|---|---|\n";
      for (std::size_t j = 0; j < f.state_names.size(); ++j) {
        out << "| sigma2(" << f.state_names[j] << ") | "
            << fmt6(f.result.theta_hat.sigma2[static_cast<Eigen::Index>(j)]) << " |\n";
      }
      for (std::size_t j = 0; j < f.state_names.size(); ++j) {
        out << "| xi(" << f.state_names[j] << ") | "
            << fmt6(f.result.theta_hat.xi[static_cast<Eigen::Index>(j)]) << " |\n";
      }
      for (std::size_t q = 0; q < f.param_names.size(); ++q) {
        out << "| " << f.param_names[q] << " | "
            << fmt6(f.result.theta_hat.psi[static_cast<Eigen::Index>(q)]) << " |\n";
      }
      out << "\n- total log-likelihood: " << fmt6(f.result.total_loglik) << "\n";
      out << "- converged: " << (f.result.convergence.converged ? "yes" : "no")
          << " (iterations " << f.result.convergence.iterations << ", gradient norm "
          << fmt6(f.result.convergence.gradient_norm) << ")\n\n";
    }
  }

  if (!report.tests.empty()) {
    out << "## Pairwise tests\n\n";
    out << "| Model A | Model B | S-W statistic | h_n | In favor |";
    bool adjusted = report.adjusted_alpha.has_value();
    if (adjusted) out << " In favor (adjusted) |";
    out << "\n|---|---|---|---|---|";
    if (adjusted) out << "---|";
    out << "\n";
    for (const TestEntry& t : report.tests) {
      out << "| " << t.model_a << " | " << t.model_b << " | " << fmt6(t.result.t_stat) << " | "
          << fmt6(t.result.h_n) << " | " << favor_label(t, t.result.decision) << " |";
      if (adjusted) {
        out << " "
            << (t.adjusted_decision ? favor_label(t, *t.adjusted_decision) : std::string("-"))
            << " |";
      }
      out << "\n";
    }
    out << "\n";
    if (adjusted) {
      out << "Bonferroni-adjusted alpha: " << fmt6(*report.adjusted_alpha) << "\n\n";
    }
    if (!report.ranking.empty()) {
      out << "Ranking (wins, then fewer losses, then log-likelihood): ";
      for (std::size_t i = 0; i < report.ranking.size(); ++i) {
        if (i) out << ", ";
        out << i + 1 << ". " << report.ranking[i];
      }
      out << "\n\n";
    }
  }

  if (report.study) {
    const StudyResult& s = *report.study;
    out << "## Study (" << s.grid_name << " grid)\n\n";
    out << s.notes << "\n\n";
    out << "| " << s.grid_name << " | replications | rate | MC s.e. | favor A | favor B | "
           "failures |\n|---|---|---|---|---|---|---|\n";
    for (const StudyCell& c : s.cells) {
      out << "| " << fmt6(c.grid_value) << " | " << c.replications << " | " << fmt6(c.rate)
          << " | " << fmt6(c.mc_se) << " | " << c.favor_a << " | " << c.favor_b << " | "
          << c.failures << " |\n";
    }
    out << "\n";
  }
  return out.str();
}

Report make_fit_report(RunConfig config, const std::string& model_name, const OdeModel& model,
                       const FitResult& fit) {
  Report report;
  report.config = std::move(config);
  FitEntry entry;
  entry.model = model_name;
  entry.fitted = true;
  entry.state_names = model.state_names();
  entry.param_names = model.param_names();
  entry.result = fit;
  report.fits.push_back(std::move(entry));
  return report;
}

Report make_test_report(RunConfig config, const OdeModel& model_a, const FitResult& fit_a,
                        const OdeModel& model_b, const FitResult& fit_b,
                        const SwTestResult& test) {
  Report report = make_fit_report(std::move(config), model_a.name(), model_a, fit_a);
  FitEntry entry;
  entry.model = model_b.name();
  entry.fitted = true;
  entry.state_names = model_b.state_names();
  entry.param_names = model_b.param_names();
  entry.result = fit_b;
  report.fits.push_back(std::move(entry));

  TestEntry t;
  t.model_a = model_a.name();
  t.model_b = model_b.name();
  t.result = test;
  report.tests.push_back(std::move(t));
  return report;
}

Report make_tournament_report(RunConfig config, const std::vector<OdeModel>& models,
                              const TournamentReport& tournament) {
  Report report;
  report.config = std::move(config);
  for (std::size_t k = 0; k < tournament.models.size(); ++k) {
    const ModelSummary& s = tournament.models[k];
    FitEntry entry;
    entry.model = s.name;
    entry.fitted = s.fitted;
    entry.error = s.error;
    if (s.fitted) {
      entry.state_names = models[k].state_names();
      entry.param_names = models[k].param_names();
      entry.result = s.fit;
    }
    report.fits.push_back(std::move(entry));
  }
  for (const PairOutcome& pair : tournament.pairs) {
    if (!pair.completed) continue;
    TestEntry t;
    t.model_a = tournament.models[static_cast<std::size_t>(pair.a)].name;
    t.model_b = tournament.models[static_cast<std::size_t>(pair.b)].name;
    t.result = pair.test;
    t.adjusted_decision = pair.adjusted_decision;
    report.tests.push_back(std::move(t));
  }
  report.adjusted_alpha = tournament.adjusted_alpha;
  for (int idx : tournament.ranking) {
    report.ranking.push_back(tournament.models[static_cast<std::size_t>(idx)].name);
  }
  return report;
}

Report make_study_report(RunConfig config, const StudyResult& study) {
  Report report;
  report.config = std::move(config);
  report.study = study;
  return report;
}

}  // namespace odesel
