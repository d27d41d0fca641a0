#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odesel/expr.hpp"

namespace odesel {

/// An ODE system dx_j/dt = F_j(x, psi, t) together with symbolic first and
/// second partial derivatives of the right-hand side. Immutable once created;
/// instances are safe to share across threads.
class OdeModel {
 public:
  /// Empty model; replace it via create()/parse_model() before use.
  OdeModel() = default;

  /// Builds the model and its derivative cache. Validates that every
  /// state/parameter index referenced by `rhs` is within range.
  static OdeModel create(std::string name, std::vector<std::string> state_names,
                         std::vector<std::string> param_names, std::vector<ExprPtr> rhs,
                         std::vector<double> init_guess = {},
                         std::vector<std::optional<double>> param_guess = {});

  const std::string& name() const { return name_; }
  int state_count() const { return static_cast<int>(state_names_.size()); }
  int param_count() const { return static_cast<int>(param_names_.size()); }
  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& param_names() const { return param_names_; }

  /// Default initial-value guesses from the model file's `init:` line;
  /// empty when the file did not provide them.
  const std::vector<double>& init_guess() const { return init_guess_; }
  /// Per-parameter default guesses from `params: name=value`; entries without
  /// a default are empty.
  const std::vector<std::optional<double>>& param_guess() const { return param_guess_; }

  const ExprPtr& rhs(int j) const { return rhs_[idx(j)]; }
  /// dF_j / dx_k
  const ExprPtr& df_dx(int j, int k) const { return df_dx_[idx(j) * d() + idx(k)]; }
  /// dF_j / dpsi_q
  const ExprPtr& df_dpsi(int j, int q) const { return df_dpsi_[idx(j) * p() + idx(q)]; }
  /// d2F_j / dx_k dx_l
  const ExprPtr& d2f_dx_dx(int j, int k, int l) const {
    return d2f_dx_dx_[(idx(j) * d() + idx(k)) * d() + idx(l)];
  }
  /// d2F_j / dx_k dpsi_q
  const ExprPtr& d2f_dx_dpsi(int j, int k, int q) const {
    return d2f_dx_dpsi_[(idx(j) * d() + idx(k)) * p() + idx(q)];
  }
  /// d2F_j / dpsi_q dpsi_m
  const ExprPtr& d2f_dpsi_dpsi(int j, int q, int m) const {
    return d2f_dpsi_dpsi_[(idx(j) * p() + idx(q)) * p() + idx(m)];
  }

 private:
  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }
  std::size_t d() const { return state_names_.size(); }
  std::size_t p() const { return param_names_.size(); }

  std::string name_;
  std::vector<std::string> state_names_;
  std::vector<std::string> param_names_;
  std::vector<ExprPtr> rhs_;
  std::vector<double> init_guess_;
  std::vector<std::optional<double>> param_guess_;

  std::vector<ExprPtr> df_dx_;
  std::vector<ExprPtr> df_dpsi_;
  std::vector<ExprPtr> d2f_dx_dx_;
  std::vector<ExprPtr> d2f_dx_dpsi_;
  std::vector<ExprPtr> d2f_dpsi_dpsi_;
};

/// Parses the line-oriented model text:
///
///     name: <identifier>                       # optional
///     states: <id> [, <id> ...]
///     params: <id>[=<num>] [, <id>[=<num>]...] # optional, may be empty
///     init: <num>|<state>=<num> [, ...]        # optional default xi guesses
///     <state-id>' = <expression>               # one line per state
///
/// `#` starts a comment. Expressions use + - * / ^ ( ), decimal literals,
/// exp/log/sqrt/sin/cos, the reserved time variable `t`, and the declared
/// state/parameter identifiers. Throws ParseError with line/column on any
/// syntax or reference problem.
OdeModel parse_model(const std::string& text);

/// Debug printer; parse_model(render(m)) is evaluation-equivalent to m.
std::string render(const OdeModel& m);

}  // namespace odesel
