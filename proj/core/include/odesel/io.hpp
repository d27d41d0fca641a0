#pragma once

#include <string>

#include "odesel/dataset.hpp"
#include "odesel/model.hpp"

namespace odesel {

/// Reads a model definition file (see parse_model for the grammar).
/// Throws IoError when the file cannot be read; ParseError on bad content.
OdeModel read_model_file(const std::string& path);

/// Reads an observation CSV: a header row whose first column is `t`, then one
/// named column per observed state; comma separator, decimal point, no
/// locale handling. Throws IoError/UsageError with the offending path/line.
Dataset read_dataset_csv(const std::string& path);

/// Writes text to a file, creating or truncating it.
void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace odesel
