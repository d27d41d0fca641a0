#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odesel/swtest.hpp"

namespace odesel {

struct TournamentOptions {
  FitOptions fit;
  bool bonferroni = false;
};

struct ModelSummary {
  std::string name;
  bool fitted = false;
  std::string error;  // why the fit was excluded, when !fitted
  FitResult fit;      // valid only when fitted
  int wins = 0;
  int losses = 0;
  int retains = 0;
};

struct PairOutcome {
  int a = 0;  // indices into the model list, a < b
  int b = 0;
  bool completed = false;
  std::string error;  // set when skipped (a side failed to fit)
  SwTestResult test;
  std::optional<Decision> adjusted_decision;
};

struct TournamentReport {
  std::vector<ModelSummary> models;
  std::vector<PairOutcome> pairs;  // lexicographic by (a, b); (N^2 - N)/2 rows
  double alpha = 0.05;
  std::optional<double> adjusted_alpha;
  std::vector<int> ranking;  // model indices, best first
};

/// Fits every model once, forms all index-ordered pairs, and runs the
/// pairwise test on the shared fits. A model whose fit fails is excluded and
/// its pairs are reported as skipped; fewer than two fittable models is an
/// error. The ranking orders models by (wins, fewer losses, total
/// log-likelihood) and is presentation only.
TournamentReport run_tournament(const std::vector<OdeModel>& models, const Dataset& data,
                                const std::vector<Eigen::VectorXd>& inits, double alpha,
                                const TournamentOptions& opts = {});

/// Recomputes decisions at alpha / (completed pair count), storing them in
/// each pair's adjusted_decision and the report's adjusted_alpha. Tallies and
/// ranking stay based on the unadjusted decisions.
TournamentReport bonferroni_adjust(TournamentReport report, double alpha);

}  // namespace odesel
