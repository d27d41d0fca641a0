#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odesel/simulation.hpp"
#include "odesel/tournament.hpp"

namespace odesel {

inline constexpr const char* kReportVersion = "1";

/// Fully resolved run configuration. Every report embeds one of these so a
/// run can be reproduced from its output alone.
struct RunConfig {
  std::string subcommand;
  std::string data_path;
  std::vector<std::string> model_paths;
  std::vector<std::pair<std::string, double>> inits;  // "param" or "model:param" -> value
  double alpha = 0.05;
  std::uint64_t seed = 1;
  bool bonferroni = false;
  IntegratorOptions integrator;
  int restarts = 8;
  std::string out_path;  // empty = stdout
  std::string format = "json";

  // simulate settings (meaningful when subcommand == "simulate")
  std::string study;     // "size" or "power"
  std::string sampling = "uniform";
  std::vector<double> deltas;
  std::string power_grid;  // "psi5" or "n"
  std::vector<double> psi5_values;
  std::vector<int> n_values;
  int reps = 0;
  int n = 0;
  double tau = 0.0;
  double psi5 = 0.1;
  double sigma = 0.1;
  int threads = 0;
};

struct FitEntry {
  std::string model;
  bool fitted = false;
  std::string error;  // set when !fitted
  std::vector<std::string> state_names;
  std::vector<std::string> param_names;
  FitResult result;  // valid when fitted
};

struct TestEntry {
  std::string model_a;
  std::string model_b;
  SwTestResult result;
  std::optional<Decision> adjusted_decision;
};

/// Everything a run wants to persist. Sections not applicable to the
/// subcommand stay empty and are omitted from the serialised output.
struct Report {
  RunConfig config;
  std::vector<FitEntry> fits;
  std::vector<TestEntry> tests;
  std::optional<double> adjusted_alpha;
  std::vector<std::string> ranking;  // tournament only, best first
  std::optional<StudyResult> study;
};

/// Machine-readable report; full double precision, stable key order, so a
/// fixed-seed run serialises byte-identically.
std::string render_json(const Report& report);

/// Human-readable report; numbers at 6 significant digits.
std::string render_markdown(const Report& report);

Report make_fit_report(RunConfig config, const std::string& model_name, const OdeModel& model,
                       const FitResult& fit);
Report make_test_report(RunConfig config, const OdeModel& model_a, const FitResult& fit_a,
                        const OdeModel& model_b, const FitResult& fit_b,
                        const SwTestResult& test);
Report make_tournament_report(RunConfig config, const std::vector<OdeModel>& models,
                              const TournamentReport& tournament);
Report make_study_report(RunConfig config, const StudyResult& study);

}  // namespace odesel
