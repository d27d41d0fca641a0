#include "odesel/tournament.hpp"

#include <algorithm>

#include "odesel/errors.hpp"

namespace odesel {

TournamentReport run_tournament(const std::vector<OdeModel>& models, const Dataset& data,
                                const std::vector<Eigen::VectorXd>& inits, double alpha,
                                const TournamentOptions& opts) {
  const int n_models = static_cast<int>(models.size());
  if (n_models < 2) throw UsageError("a tournament needs at least two models");
  if (inits.size() != models.size()) {
    throw UsageError("a tournament needs one initial guess per model");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");

  TournamentReport report;
  report.alpha = alpha;
  report.models.resize(models.size());

  // Each model is fitted exactly once; pairs reuse these fits.
  for (int k = 0; k < n_models; ++k) {
    ModelSummary& summary = report.models[static_cast<std::size_t>(k)];
    summary.name = models[static_cast<std::size_t>(k)].name();
    if (summary.name.empty()) summary.name = "model_" + std::to_string(k + 1);
    try {
      Dataset aligned = align_to_model(data, models[static_cast<std::size_t>(k)]);
      summary.fit = fit_mle(models[static_cast<std::size_t>(k)], aligned,
                            inits[static_cast<std::size_t>(k)], opts.fit);
      summary.fitted = true;
    } catch (const Error& e) {
      summary.error = e.what();
    }
  }

  int fittable = 0;
  for (const auto& s : report.models) fittable += s.fitted ? 1 : 0;
  if (fittable < 2) {
    throw FitError("fewer than two models could be fitted; no pairs to test");
  }

  for (int a = 0; a < n_models; ++a) {
    for (int b = a + 1; b < n_models; ++b) {
      PairOutcome pair;
      pair.a = a;
      pair.b = b;
      ModelSummary& ma = report.models[static_cast<std::size_t>(a)];
      ModelSummary& mb = report.models[static_cast<std::size_t>(b)];
      if (!ma.fitted || !mb.fitted) {
        pair.error = !ma.fitted ? "model '" + ma.name + "' was not fitted"
                                : "model '" + mb.name + "' was not fitted";
      } else {
        pair.test = run_sw_test(ma.fit, mb.fit, alpha);
        pair.completed = true;
        switch (pair.test.decision) {
          case Decision::Retain:
            ++ma.retains;
            ++mb.retains;
            break;
          case Decision::FavorA:
            ++ma.wins;
            ++mb.losses;
            break;
          case Decision::FavorB:
            ++mb.wins;
            ++ma.losses;
            break;
        }
      }
      report.pairs.push_back(std::move(pair));
    }
  }

  report.ranking.resize(models.size());
  for (int k = 0; k < n_models; ++k) report.ranking[static_cast<std::size_t>(k)] = k;
  std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](int lhs, int rhs) {
    const ModelSummary& l = report.models[static_cast<std::size_t>(lhs)];
    const ModelSummary& r = report.models[static_cast<std::size_t>(rhs)];
    if (l.fitted != r.fitted) return l.fitted;
    if (l.wins != r.wins) return l.wins > r.wins;
    if (l.losses != r.losses) return l.losses < r.losses;
    if (l.fitted && r.fitted) return l.fit.total_loglik > r.fit.total_loglik;
    return false;
  });

  if (opts.bonferroni) report = bonferroni_adjust(std::move(report), alpha);
  return report;
}

TournamentReport bonferroni_adjust(TournamentReport report, double alpha) {
  int completed = 0;
  for (const auto& pair : report.pairs) completed += pair.completed ? 1 : 0;
  if (completed == 0) return report;
  double adjusted = alpha / static_cast<double>(completed);
  report.adjusted_alpha = adjusted;
  for (auto& pair : report.pairs) {
    if (pair.completed) pair.adjusted_decision = decide(pair.test.t_stat, adjusted);
  }
  return report;
}

}  // namespace odesel
