#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "memgmm/mixture.hpp"
#include "memgmm/types.hpp"

namespace memgmm::io {

inline constexpr int kFormatVersion = 1;

/// Numeric table read from CSV. Header names are empty when the file has no
/// header row.
struct CsvTable {
  std::vector<std::string> header;
  Matrix<double> values;
};

/// Comma-separated, decimal point only. The first non-empty line is a header
/// if any of its fields is not a number. Errors name the file, line and column.
CsvTable read_csv(const std::string& path);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

void write_text_file(const std::string& path, const std::string& contents);

/// Model file:
///   { "format_version": 1, "d": int, "G": int, "model": "VVV",
///     "weights": [G], "means": [G][d], "covariances": [G][d][d],
///     "spec": [ { "volume": x, "shape": [d], "orientation": [d][d] } x G ] }
/// "spec" is optional on input; when "covariances" is absent the matrices are
/// rebuilt from it. Validation failures carry a JSON-pointer style path.
nlohmann::json model_to_json(const GaussianMixtured& mixture);
GaussianMixtured model_from_json(const nlohmann::json& j);

GaussianMixtured read_model(const std::string& path);
void write_model(const std::string& path, const GaussianMixtured& mixture);

/// Pretty-printed with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace memgmm::io
