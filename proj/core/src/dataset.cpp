#include "odesel/dataset.hpp"

#include <sstream>

#include "odesel/errors.hpp"
#include "odesel/model.hpp"

namespace odesel {

void validate(const Dataset& data) {
  if (data.n() < 2) throw UsageError("dataset needs at least two observations");
  if (data.obs.rows() != data.n()) {
    throw UsageError("dataset times and observations disagree on the row count");
  }
  if (data.names.size() != static_cast<std::size_t>(data.d())) {
    throw UsageError("dataset needs one column name per observed state");
  }
  if (data.times[0] < 0.0) throw UsageError("dataset times must satisfy t >= 0");
  for (Eigen::Index i = 1; i < data.n(); ++i) {
    if (!(data.times[i] > data.times[i - 1])) {
      throw UsageError("dataset times must be strictly increasing");
    }
  }
  if (!data.obs.allFinite() || !data.times.allFinite()) {
    throw UsageError("dataset contains non-finite values");
  }
}

Dataset align_to_model(const Dataset& data, const OdeModel& model) {
  if (data.d() != model.state_count()) {
    std::ostringstream msg;
    msg << "model '" << model.name() << "' has " << model.state_count()
        << " state(s) but the dataset has " << data.d() << " observation column(s)";
    throw UsageError(msg.str());
  }
  Dataset out;
  out.times = data.times;
  out.obs.resize(data.n(), data.d());
  out.names = model.state_names();
  for (int j = 0; j < model.state_count(); ++j) {
    const std::string& want = model.state_names()[static_cast<std::size_t>(j)];
    bool found = false;
    for (Eigen::Index c = 0; c < data.d(); ++c) {
      if (data.names[static_cast<std::size_t>(c)] == want) {
        out.obs.col(j) = data.obs.col(c);
        found = true;
        break;
      }
    }
    if (!found) {
      std::ostringstream msg;
      msg << "dataset has no column named '" << want << "' required by model '" << model.name()
          << "' (columns:";
      for (const auto& nm : data.names) msg << " " << nm;
      msg << ")";
      throw UsageError(msg.str());
    }
  }
  return out;
}

}  // namespace odesel
