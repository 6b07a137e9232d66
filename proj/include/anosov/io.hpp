#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "anosov/coarse_chart.hpp"
#include "anosov/fourier.hpp"
#include "anosov/local_model.hpp"
#include "anosov/maps.hpp"
#include "anosov/torus.hpp"

namespace anosov {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Throws IoError, SchemaError (bad JSON or schema_version != kSchemaVersion).
Json read_json_file(const std::string& path);
/// Throws IoError.
void write_text_file(const std::string& path, const std::string& text);
/// Two-space indented dump with a trailing newline.
std::string dump_json(const Json& j);
/// %.17g, the round-trip format used for every CSV number.
std::string format_double(double x);

/// Header plus rows; a result set without rows still yields the header line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string str() const;
};

/// Throws SchemaError naming the first key not in allowed.
void expect_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& context);

IntMat2 int_matrix_from_json(const Json& j);
Json to_json(const IntMat2& m);
Json to_json(const Eigen::Vector2d& v);
Json to_json(const Eigen::Vector4d& v);
Json to_json(const Eigen::Matrix4d& m);

/// {"basis", "truncation_eps", "terms": [{"k", "re", "im"}], "modes": [{"k", "cos", "sin"}]}.
/// "terms" hold raw coefficients (the conjugate at -k is implied); "modes" add real
/// cosine/sine amplitude vectors. Throws SchemaError, RealityViolation.
TrigMap trigmap_from_json(const Json& j);
/// Every stored frequency, in ascending key order.
Json to_json(const TrigMap& f);
/// One entry per +-k pair with k the lexicographically larger representative.
Json modes_json(const TrigMap& f);

Bump bump_from_json(const Json& j);
Json to_json(const Bump& b);

/// Skew-product data file: A, B, phi, optional phi1, g and bumps.
struct SystemSpec {
  IntMat2 a;
  IntMat2 b;
  TrigMap phi;
  std::optional<TrigMap> phi1;
  std::optional<TrigMap> g;
  std::vector<Bump> bumps;
};
SystemSpec system_from_json(const Json& j);

LocalModel local_model_from_json(const Json& j);
Json to_json(const LocalModel& m);
ModelFamily family_from_json(const Json& j);
Shear shear_from_json(const Json& j);
Json to_json(const Shear& s);

}  // namespace anosov
