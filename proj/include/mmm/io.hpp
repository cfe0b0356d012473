#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmm/cv.hpp"
#include "mmm/estimator.hpp"
#include "mmm/types.hpp"

namespace mmm::io {

using Json = nlohmann::json;

struct CsvTable {
  std::vector<std::string> header;      // numeric column names (label column excluded)
  std::vector<std::string> row_labels;  // filled only when a label column was requested
  Matrix data;
};

/// Comma-separated, header row first. With `label_column` the first field of
/// every row is kept as a string label. ParseError carries "source:line:column".
CsvTable parse_csv(std::string_view text, const std::string& source, bool label_column = false);
CsvTable read_csv(const std::filesystem::path& path, bool label_column = false);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::string to_csv(const std::vector<std::string>& header, const Matrix& data);
/// Label column named `label_header` followed by the numeric columns.
std::string to_csv_labeled(const std::string& label_header, const std::vector<std::string>& labels,
                           const std::vector<std::string>& header, const Matrix& data);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

Json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// 2-space indented, keys sorted, trailing newline.
std::string dump(const Json& j);

struct FittedModel {
  CoefficientSet coef;
  PenaltyConfig penalties;
  ScalingRecord scaling;
  MmmFitOptions options;
  std::string selection = "fixed";  // "fixed" or "cv"
  int folds = 0;
  std::uint64_t seed = 0;
};

Json model_to_json(const FittedModel& model);
FittedModel model_from_json(const Json& j);
FittedModel read_model(const std::filesystem::path& path);

/// {"mediator": [[l1, l2], ...], "outcome": [[l1, l2], ...]}
std::pair<std::vector<LambdaPair>, std::vector<LambdaPair>> parse_grid(const Json& j);

}  // namespace mmm::io
