#include "mmm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace mmm::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

Error parse_error(const std::string& source, std::size_t line, std::size_t column,
                  const std::string& what) {
  return Error(ErrorCode::ParseError,
               source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
}

Json require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string("missing JSON field \"") + key + "\"");
  }
  return j.at(key);
}

Json names_to_json(const std::vector<std::string>& names) { return Json(names); }

}  // namespace

CsvTable parse_csv(std::string_view text, const std::string& source, bool label_column) {
  CsvTable out;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t expected = 0;
  bool have_header = false;

  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;

    const auto fields = split_fields(line);
    if (!have_header) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c].empty()) throw parse_error(source, line_no, c + 1, "empty column name");
        if (label_column && c == 0) continue;
        out.header.emplace_back(fields[c]);
      }
      expected = fields.size();
      if (out.header.empty()) throw parse_error(source, line_no, 1, "no data columns in header");
      have_header = true;
      continue;
    }
    if (fields.size() != expected) {
      throw parse_error(source, line_no, std::min(fields.size(), expected) + 1,
                        "expected " + std::to_string(expected) + " fields, found " +
                            std::to_string(fields.size()));
    }
    std::vector<double> values;
    values.reserve(expected);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (label_column && c == 0) {
        out.row_labels.emplace_back(fields[c]);
        continue;
      }
      const std::string_view f = fields[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size()) {
        throw parse_error(source, line_no, c + 1, "not a number: \"" + std::string(f) + "\"");
      }
      if (!std::isfinite(v)) throw parse_error(source, line_no, c + 1, "non-finite value");
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  if (!have_header) throw parse_error(source, 1, 1, "missing header row");

  out.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(out.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      out.data(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
  return out;
}

CsvTable read_csv(const std::filesystem::path& path, bool label_column) {
  return parse_csv(read_file(path), path.string(), label_column);
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(ErrorCode::IoError, "float formatting failed");
  return std::string(buf, ptr);
}

std::string to_csv(const std::vector<std::string>& header, const Matrix& data) {
  return to_csv_labeled("", {}, header, data);
}

std::string to_csv_labeled(const std::string& label_header, const std::vector<std::string>& labels,
                           const std::vector<std::string>& header, const Matrix& data) {
  const bool labeled = !label_header.empty();
  if (static_cast<Index>(header.size()) != data.cols() ||
      (labeled && static_cast<Index>(labels.size()) != data.rows())) {
    throw Error(ErrorCode::ShapeMismatch, "CSV header does not match the data");
  }
  std::string out;
  if (labeled) out += label_header + (header.empty() ? "" : ",");
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    if (labeled) out += labels[static_cast<std::size_t>(i)] + (data.cols() ? "," : "");
    for (Index c = 0; c < data.cols(); ++c) {
      if (c) out += ',';
      out += format_double(data(i, c));
    }
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename into " + path.string() + ": " + ec.message());
}

Json matrix_to_json(const Matrix& a) {
  Json rows = Json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Index c = 0; c < a.cols(); ++c) row.push_back(a(i, c));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const Json& j) {
  try {
    const Index r = require(j, "rows").get<Index>();
    const Index c = require(j, "cols").get<Index>();
    const Json& data = j.at("data");
    if (r < 0 || c < 0 || !data.is_array() || static_cast<Index>(data.size()) != r) {
      throw Error(ErrorCode::ParseError, "matrix data does not match rows/cols");
    }
    Matrix out(r, c);
    for (Index i = 0; i < r; ++i) {
      const Json& row = data[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Index>(row.size()) != c) {
        throw Error(ErrorCode::ParseError, "matrix row " + std::to_string(i) + " has wrong length");
      }
      for (Index k = 0; k < c; ++k) out(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad matrix JSON: ") + e.what());
  }
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected a JSON array");
  Vector v(static_cast<Index>(j.size()));
  try {
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad vector JSON: ") + e.what());
  }
  return v;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json model_to_json(const FittedModel& model) {
  const CoefficientSet& c = model.coef;
  auto diag = [](const std::vector<ColumnDiagnostics>& d) {
    Json out = Json::array();
    for (const auto& x : d) {
      out.push_back({{"iterations", x.iterations}, {"objective", x.objective}, {"converged", x.converged}});
    }
    return out;
  };
  Json j;
  j["format_version"] = 1;
  j["coefficients"] = {{"alpha", matrix_to_json(c.alpha)}, {"zeta", matrix_to_json(c.zeta)},
                       {"beta", matrix_to_json(c.beta)},   {"gamma", matrix_to_json(c.gamma)},
                       {"eta", matrix_to_json(c.eta)}};
  j["columns"] = {{"x", names_to_json(c.names.x)}, {"m", names_to_json(c.names.m)},
                  {"y", names_to_json(c.names.y)}, {"z", names_to_json(c.names.z)}};
  j["penalties"] = {{"lambda_m1", model.penalties.lambda_m1},
                    {"lambda_m2", model.penalties.lambda_m2},
                    {"lambda_y1", model.penalties.lambda_y1},
                    {"lambda_y2", model.penalties.lambda_y2}};
  j["scaling"] = {{"applied", model.scaling.applied},
                  {"x_mean", vector_to_json(model.scaling.x_mean)},
                  {"x_scale", vector_to_json(model.scaling.x_scale)},
                  {"m_mean", vector_to_json(model.scaling.m_mean)},
                  {"m_scale", vector_to_json(model.scaling.m_scale)}};
  j["diagnostics"] = {{"mediator_stage", diag(c.diagnostics.mediator_stage)},
                      {"outcome_stage", diag(c.diagnostics.outcome_stage)},
                      {"all_converged", c.diagnostics.all_converged()}};
  j["options"] = {{"scale", model.options.scale},
                  {"penalize_intercept", model.options.penalize_intercept},
                  {"tolerance", model.options.solver.tolerance},
                  {"max_iterations", model.options.solver.max_iterations}};
  j["selection"] = {{"method", model.selection}, {"folds", model.folds}, {"seed", model.seed}};
  return j;
}

FittedModel model_from_json(const Json& j) {
  try {
    if (require(j, "format_version").get<int>() != 1) {
      throw Error(ErrorCode::ParseError, "unsupported format_version");
    }
    FittedModel m;
    const Json coef = require(j, "coefficients");
    m.coef.alpha = matrix_from_json(require(coef, "alpha"));
    m.coef.zeta = matrix_from_json(require(coef, "zeta"));
    m.coef.beta = matrix_from_json(require(coef, "beta"));
    m.coef.gamma = matrix_from_json(require(coef, "gamma"));
    m.coef.eta = matrix_from_json(require(coef, "eta"));
    const Json cols = require(j, "columns");
    m.coef.names.x = require(cols, "x").get<std::vector<std::string>>();
    m.coef.names.m = require(cols, "m").get<std::vector<std::string>>();
    m.coef.names.y = require(cols, "y").get<std::vector<std::string>>();
    m.coef.names.z = require(cols, "z").get<std::vector<std::string>>();
    const Json pen = require(j, "penalties");
    m.penalties = {require(pen, "lambda_m1").get<double>(), require(pen, "lambda_m2").get<double>(),
                   require(pen, "lambda_y1").get<double>(), require(pen, "lambda_y2").get<double>()};
    if (j.contains("scaling")) {
      const Json& s = j.at("scaling");
      m.scaling.applied = require(s, "applied").get<bool>();
      m.scaling.x_mean = vector_from_json(require(s, "x_mean"));
      m.scaling.x_scale = vector_from_json(require(s, "x_scale"));
      m.scaling.m_mean = vector_from_json(require(s, "m_mean"));
      m.scaling.m_scale = vector_from_json(require(s, "m_scale"));
    }
    if (j.contains("diagnostics")) {
      auto diag = [](const Json& arr) {
        std::vector<ColumnDiagnostics> out;
        for (const auto& d : arr) {
          out.push_back({d.at("iterations").get<int>(), d.at("objective").get<double>(),
                         d.at("converged").get<bool>()});
        }
        return out;
      };
      m.coef.diagnostics.mediator_stage = diag(j.at("diagnostics").at("mediator_stage"));
      m.coef.diagnostics.outcome_stage = diag(j.at("diagnostics").at("outcome_stage"));
    }
    if (j.contains("options")) {
      const Json& o = j.at("options");
      m.options.scale = o.value("scale", true);
      m.options.penalize_intercept = o.value("penalize_intercept", true);
      m.options.solver.tolerance = o.value("tolerance", m.options.solver.tolerance);
      m.options.solver.max_iterations = o.value("max_iterations", m.options.solver.max_iterations);
    }
    if (j.contains("selection")) {
      const Json& s = j.at("selection");
      m.selection = s.value("method", std::string("fixed"));
      m.folds = s.value("folds", 0);
      m.seed = s.value("seed", std::uint64_t{0});
    }
    m.coef.validate();
    const auto& nm = m.coef.names;
    if (static_cast<Index>(nm.x.size()) != m.coef.q() || static_cast<Index>(nm.m.size()) != m.coef.p() ||
        static_cast<Index>(nm.y.size()) != m.coef.outcomes() ||
        static_cast<Index>(nm.z.size()) != m.coef.s()) {
      throw Error(ErrorCode::ParseError, "column names do not match coefficient shapes");
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad model JSON: ") + e.what());
  }
}

FittedModel read_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, path.string() + ": invalid JSON");
  try {
    return model_from_json(j);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::pair<std::vector<LambdaPair>, std::vector<LambdaPair>> parse_grid(const Json& j) {
  auto stage = [&](const char* key) {
    std::vector<LambdaPair> out;
    const Json arr = require(j, key);
    if (!arr.is_array()) throw Error(ErrorCode::ParseError, std::string(key) + " must be an array");
    try {
      for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2) {
          throw Error(ErrorCode::ParseError, std::string(key) + " entries must be [lambda1, lambda2]");
        }
        out.push_back({e[0].get<double>(), e[1].get<double>()});
      }
    } catch (const Json::exception& ex) {
      throw Error(ErrorCode::ParseError, std::string("bad grid JSON: ") + ex.what());
    }
    return out;
  };
  return {stage("mediator"), stage("outcome")};
}

}  // namespace mmm::io
