#include "odesel/io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "odesel/errors.hpp"

namespace odesel {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

OdeModel read_model_file(const std::string& path) { return parse_model(read_text_file(path)); }

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file: " + path);

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw UsageError(path + ": empty data file");
  ++line_no;
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t") {
    throw UsageError(path + ": the header must start with a 't' column followed by one column "
                            "per observed state");
  }

  std::vector<double> times;
  std::vector<std::vector<double>> columns(header.size() - 1);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double value;
      try {
        std::size_t used = 0;
        value = std::stod(fields[c], &used);
        if (used != fields[c].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw UsageError(path + ":" + std::to_string(line_no) + ": cannot parse '" + fields[c] +
                         "' as a number");
      }
      if (c == 0) {
        times.push_back(value);
      } else {
        columns[c - 1].push_back(value);
      }
    }
  }

  Dataset data;
  data.times = Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
  data.obs.resize(static_cast<Eigen::Index>(times.size()),
                  static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    data.obs.col(static_cast<Eigen::Index>(c)) = Eigen::Map<Eigen::VectorXd>(
        columns[c].data(), static_cast<Eigen::Index>(columns[c].size()));
    data.names.push_back(header[c + 1]);
  }
  validate(data);
  return data;
}

}  // namespace odesel
