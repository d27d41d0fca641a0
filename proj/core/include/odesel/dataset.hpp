#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace odesel {

class OdeModel;

/// Observed time series: n rows of d-dimensional measurements at strictly
/// increasing times.
struct Dataset {
  Eigen::VectorXd times;    // length n
  Eigen::MatrixXd obs;      // n x d
  std::vector<std::string> names;  // column names, length d

  Eigen::Index n() const { return times.size(); }
  Eigen::Index d() const { return obs.cols(); }
};

/// Throws UsageError unless n >= 2, times are strictly increasing and
/// nonnegative, and all observations are finite.
void validate(const Dataset& data);

/// Returns `data` with columns reordered to the model's state order,
/// matching by name. Throws UsageError when a state has no matching column
/// (the message names both sides of the mismatch).
Dataset align_to_model(const Dataset& data, const OdeModel& model);

}  // namespace odesel
