#include "memgmm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "memgmm/covariance.hpp"
#include "memgmm/errors.hpp"

namespace memgmm::io {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(path + "/" + key, "missing");
  return j.at(key);
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "non-finite number");
  return v;
}

Vector<double> vector_at(const json& j, Index size, const std::string& path) {
  if (!j.is_array() || static_cast<Index>(j.size()) != size) {
    fail(path, "expected an array of length " + std::to_string(size));
  }
  Vector<double> v(size);
  for (Index i = 0; i < size; ++i) v(i) = number_at(j[static_cast<size_t>(i)], path + "/" + std::to_string(i));
  return v;
}

Matrix<double> matrix_at(const json& j, Index rows, Index cols, const std::string& path) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    fail(path, "expected an array of " + std::to_string(rows) + " rows");
  }
  Matrix<double> m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    m.row(r) = vector_at(j[static_cast<size_t>(r)], cols, path + "/" + std::to_string(r)).transpose();
  }
  return m;
}

json matrix_json(const Matrix<double>& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector<double>& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

int positive_int_at(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) fail(path, "expected a positive integer");
  return j.get<int>();
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw ValidationError("failed writing " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);

  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_no = 0;
  size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> values(fields.size());
    size_t bad = fields.size();
    for (size_t c = 0; c < fields.size(); ++c) {
      if (!parse_number(fields[c], values[c])) {
        bad = c;
        break;
      }
    }
    if (first) {
      first = false;
      width = fields.size();
      if (bad < fields.size()) {
        for (auto f : fields) table.header.emplace_back(f);
        continue;
      }
    }
    if (fields.size() != width) {
      throw ValidationError(path + ": line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                            " fields, found " + std::to_string(fields.size()));
    }
    if (bad < fields.size()) {
      throw ValidationError(path + ": line " + std::to_string(line_no) + ", column " + std::to_string(bad + 1) +
                            ": '" + std::string(fields[bad]) + "' is not a number");
    }
    for (size_t c = 0; c < values.size(); ++c) {
      if (!std::isfinite(values[c])) {
        throw ValidationError(path + ": line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                              ": non-finite value");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ValidationError(path + ": no numeric rows");

  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < width; ++c) table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return table;
}

json model_to_json(const GaussianMixtured& mixture) {
  json j;
  j["format_version"] = kFormatVersion;
  j["d"] = mixture.dim();
  j["G"] = mixture.components();
  j["model"] = std::string(to_string(mixture.model()));
  j["weights"] = vector_json(mixture.weights());
  j["means"] = matrix_json(mixture.means());
  json covs = json::array();
  json specs = json::array();
  for (Index k = 0; k < mixture.components(); ++k) {
    covs.push_back(matrix_json(mixture.covariance(k)));
    const CovarianceSpec<double> spec = decompose_covariance(mixture.covariance(k));
    specs.push_back({{"volume", spec.volume},
                     {"shape", vector_json(spec.shape)},
                     {"orientation", matrix_json(spec.orientation)}});
  }
  j["covariances"] = std::move(covs);
  j["spec"] = std::move(specs);
  return j;
}

GaussianMixtured model_from_json(const json& j) {
  if (!j.is_object()) fail("", "model file must be a JSON object");
  if (j.contains("format_version")) {
    const json& v = j.at("format_version");
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
      fail("/format_version", "unsupported version (expected " + std::to_string(kFormatVersion) + ")");
    }
  }
  const Index d = positive_int_at(member(j, "d", ""), "/d");
  const Index G = positive_int_at(member(j, "G", ""), "/G");
  const json& model_j = member(j, "model", "");
  if (!model_j.is_string()) fail("/model", "expected a string");
  const auto model = parse_model_name(model_j.get<std::string>());
  if (!model) fail("/model", "unknown model code '" + model_j.get<std::string>() + "'");

  Vector<double> weights = vector_at(member(j, "weights", ""), G, "/weights");
  Matrix<double> means = matrix_at(member(j, "means", ""), G, d, "/means");

  std::vector<CovarianceSpec<double>> specs;
  if (j.contains("spec")) {
    const json& sj = j.at("spec");
    if (!sj.is_array() || static_cast<Index>(sj.size()) != G) fail("/spec", "expected one entry per component");
    for (Index k = 0; k < G; ++k) {
      const std::string path = "/spec/" + std::to_string(k);
      const json& e = sj[static_cast<size_t>(k)];
      CovarianceSpec<double> spec;
      spec.volume = number_at(member(e, "volume", path), path + "/volume");
      spec.shape = vector_at(member(e, "shape", path), d, path + "/shape");
      spec.orientation = matrix_at(member(e, "orientation", path), d, d, path + "/orientation");
      try {
        spec.validate();
      } catch (const ValidationError& err) {
        fail(path, err.what());
      }
      specs.push_back(std::move(spec));
    }
  }

  std::vector<Matrix<double>> covs;
  if (j.contains("covariances")) {
    const json& cj = j.at("covariances");
    if (!cj.is_array() || static_cast<Index>(cj.size()) != G) fail("/covariances", "expected one matrix per component");
    for (Index k = 0; k < G; ++k) {
      covs.push_back(matrix_at(cj[static_cast<size_t>(k)], d, d, "/covariances/" + std::to_string(k)));
    }
    for (size_t k = 0; k < specs.size(); ++k) {
      const Matrix<double> rebuilt = build_covariance(specs[k]);
      const double scale = std::max(1.0, covs[k].cwiseAbs().maxCoeff());
      if ((rebuilt - covs[k]).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        fail("/spec/" + std::to_string(k), "does not reproduce the listed covariance");
      }
    }
  } else if (!specs.empty()) {
    for (const auto& spec : specs) covs.push_back(build_covariance(spec));
  } else {
    fail("/covariances", "missing (and no spec block to build them from)");
  }

  try {
    return GaussianMixtured(std::move(weights), std::move(means), std::move(covs), *model);
  } catch (const ValidationError& err) {
    fail("", err.what());
  }
}

GaussianMixtured read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_model(const std::string& path, const GaussianMixtured& mixture) {
  write_text_file(path, dump_json(model_to_json(mixture)));
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace memgmm::io
