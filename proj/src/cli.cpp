#include "mmm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "mmm/cv.hpp"
#include "mmm/estimator.hpp"
#include "mmm/inference.hpp"
#include "mmm/io.hpp"
#include "mmm/predict.hpp"
#include "mmm/sim.hpp"

namespace mmm::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataPaths {
  std::string x, m, y, z;
};

struct LambdaFlags {
  std::optional<double> m1, m2, y1, y2;

  bool any() const { return m1 || m2 || y1 || y2; }
  PenaltyConfig require_all() const {
    if (!(m1 && m2 && y1 && y2)) {
      throw InputError("--lambda-m1, --lambda-m2, --lambda-y1 and --lambda-y2 must be given together");
    }
    return {*m1, *m2, *y1, *y2};
  }
};

struct SolverFlags {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  bool no_scale = false;
  bool penalize_intercept = false;

  MmmFitOptions options(int threads) const {
    MmmFitOptions o;
    o.solver.tolerance = tolerance;
    o.solver.max_iterations = max_iterations;
    o.solver.threads = threads;
    o.scale = !no_scale;
    o.penalize_intercept = penalize_intercept;
    return o;
  }
};

void add_lambda_flags(CLI::App* app, LambdaFlags& f) {
  app->add_option("--lambda-m1", f.m1, "mediator-stage l1 penalty");
  app->add_option("--lambda-m2", f.m2, "mediator-stage l2 penalty");
  app->add_option("--lambda-y1", f.y1, "outcome-stage l1 penalty");
  app->add_option("--lambda-y2", f.y2, "outcome-stage l2 penalty");
}

void add_solver_flags(CLI::App* app, SolverFlags& f) {
  app->add_option("--tolerance", f.tolerance, "coordinate-descent tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-iterations", f.max_iterations, "sweep limit per column")->check(CLI::PositiveNumber);
  app->add_flag("--no-scale", f.no_scale, "fit on unnormalized columns");
  app->add_flag("--penalize-intercept", f.penalize_intercept, "include the intercept in the penalty");
}

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw InputError("--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("MMM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
    throw InputError(std::string("MMM_THREADS must be a positive integer, got \"") + env + "\"");
  }
  return 1;
}

struct LoadedData {
  Dataset ds;
  std::vector<std::string> z_covariate_names;
};

std::optional<io::CsvTable> maybe_read(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return io::read_csv(path);
}

void check_rows(const io::CsvTable& t, Index n, const std::string& path) {
  if (t.data.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, path + ": " + std::to_string(t.data.rows()) +
                                                  " rows, expected " + std::to_string(n));
  }
}

LoadedData load_data(const DataPaths& paths, bool need_m, bool need_y) {
  const io::CsvTable x = io::read_csv(paths.x);
  const auto m = maybe_read(paths.m);
  const auto y = maybe_read(paths.y);
  const auto z = maybe_read(paths.z);
  if (need_m && !m) throw InputError("--m is required");
  if (need_y && !y) throw InputError("--y is required");
  const Index n = x.data.rows();
  ColumnNames names;
  names.x = x.header;
  std::optional<Matrix> mm, yy, zz;
  if (m) {
    check_rows(*m, n, paths.m);
    names.m = m->header;
    mm = m->data;
  }
  if (y) {
    check_rows(*y, n, paths.y);
    names.y = y->header;
    yy = y->data;
  }
  std::vector<std::string> zn;
  if (z) {
    check_rows(*z, n, paths.z);
    zn = z->header;
    names.z = z->header;
    zz = z->data;
  }
  return {assemble_dataset(x.data, mm, yy, zz, names), zn};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
}

void write(const std::string& dir, const std::string& name, const std::string& content) {
  io::write_file_atomic(fs::path(dir) / name, content);
}

Json penalties_json(const PenaltyConfig& p) {
  return {{"lambda_m1", p.lambda_m1}, {"lambda_m2", p.lambda_m2},
          {"lambda_y1", p.lambda_y1}, {"lambda_y2", p.lambda_y2}};
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  DataPaths data;
  LambdaFlags lambdas;
  SolverFlags solver;
  std::string cv_grid;
  std::string cv_mode = "observed";
  int folds = 5;
  std::uint64_t seed = 0;
  std::optional<int> threads;
  std::string out_dir;
  std::size_t top = 20;
  bool allow_nonconverged = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const int threads = resolve_threads(a.threads);
  const LoadedData loaded = load_data(a.data, true, true);
  const Dataset& ds = loaded.ds;
  const MmmFitOptions opts = a.solver.options(threads);

  io::FittedModel model;
  model.options = opts;
  model.seed = a.seed;
  if (a.lambdas.any()) {
    model.penalties = a.lambdas.require_all();
    model.selection = "fixed";
  } else {
    std::vector<LambdaPair> gm, gy;
    if (!a.cv_grid.empty()) {
      const Json j = Json::parse(io::read_file(a.cv_grid), nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::ParseError, a.cv_grid + ": invalid JSON");
      std::tie(gm, gy) = io::parse_grid(j);
    } else {
      gm = default_lambda_grid(ds, Stage::Mediator);
      gy = default_lambda_grid(ds, Stage::Outcome);
    }
    CvOptions cv;
    cv.folds = a.folds;
    cv.seed = a.seed;
    cv.mode = a.cv_mode == "mediated" ? CvMode::Mediated : CvMode::Observed;
    cv.fit = opts;
    model.penalties = cv_select(ds, gm, gy, cv).penalties;
    model.selection = "cv";
    model.folds = a.folds;
  }

  model.coef = fit_mmm(ds, model.penalties, opts);
  if (!model.coef.diagnostics.all_converged() && !a.allow_nonconverged) {
    throw ConvergenceFailure("solver did not converge; rerun with --allow-nonconverged to keep the fit");
  }
  model.scaling = opts.scale ? scale_columns(ds).second : ScalingRecord::identity(ds.q(), ds.p());

  ensure_dir(a.out_dir);
  write(a.out_dir, "coefficients.json", io::dump(io::model_to_json(model)));

  const MediationEffects effects(model.coef);
  const auto& names = model.coef.names;
  write(a.out_dir, "indirect.csv",
        io::to_csv_labeled("exposure", names.x, names.y, effects.indirect()));

  std::string paths = "exposure,mediator,outcome,exposure_index,mediator_index,outcome_index,effect\n";
  for (const PathEffect& p : top_paths(effects, a.top)) {
    paths += (names.x[static_cast<std::size_t>(p.exposure)]) + "," +
             (names.m[static_cast<std::size_t>(p.mediator)]) + "," +
             (names.y[static_cast<std::size_t>(p.outcome)]) + "," +
             std::to_string(p.exposure) + "," + std::to_string(p.mediator) + "," +
             std::to_string(p.outcome) + "," + io::format_double(p.value) + "\n";
  }
  write(a.out_dir, "paths.csv", paths);

  out << "fit: n=" << ds.n() << " q=" << ds.q() << " p=" << ds.p() << " T=" << ds.outcomes()
      << " selection=" << model.selection << " converged="
      << (model.coef.diagnostics.all_converged() ? "yes" : "no") << "\n";
  return kOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string coef;
  std::string x, z, truth;
  std::string out_dir;
};

void require_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                    const std::string& path) {
  if (got != want) {
    std::string expected;
    for (std::size_t i = 0; i < want.size(); ++i) expected += (i ? "," : "") + want[i];
    throw InputError(path + ": header does not match training columns (expected " + expected + ")");
  }
}

bool is_binary(const Vector& v) {
  return (v.array() == 0.0 || v.array() == 1.0).all();
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const io::FittedModel model = io::read_model(a.coef);
  const auto& names = model.coef.names;
  const io::CsvTable x = io::read_csv(a.x);
  require_header(x.header, names.x, a.x);
  const Index n = x.data.rows();

  const std::vector<std::string> z_cov(names.z.begin() + 1, names.z.end());
  Matrix z(n, model.coef.s());
  z.col(0).setOnes();
  if (!z_cov.empty()) {
    if (a.z.empty()) throw InputError("model has covariates; --z is required");
    const io::CsvTable zt = io::read_csv(a.z);
    require_header(zt.header, z_cov, a.z);
    check_rows(zt, n, a.z);
    z.rightCols(zt.data.cols()) = zt.data;
  } else if (!a.z.empty()) {
    throw InputError(a.z + ": model was fitted without covariates");
  }

  const PredictionResult pred = predict_outcomes(model.coef, x.data, z);
  ensure_dir(a.out_dir);
  write(a.out_dir, "predicted_mediators.csv", io::to_csv(names.m, pred.predicted_mediators));
  write(a.out_dir, "predicted_outcomes.csv", io::to_csv(names.y, pred.predicted_outcomes));

  if (!a.truth.empty()) {
    const io::CsvTable truth = io::read_csv(a.truth);
    require_header(truth.header, names.y, a.truth);
    check_rows(truth, n, a.truth);
    Json metrics;
    metrics["format_version"] = 1;
    metrics["n"] = n;
    Json per = Json::array();
    const auto reg = evaluate_regression(pred.predicted_outcomes, truth.data);
    for (Index l = 0; l < truth.data.cols(); ++l) {
      Json e;
      e["outcome"] = names.y[static_cast<std::size_t>(l)];
      e["rmse"] = reg[static_cast<std::size_t>(l)].rmse;
      const auto& r = reg[static_cast<std::size_t>(l)].pearson;
      e["pearson"] = r ? Json(*r) : Json(nullptr);
      if (is_binary(truth.data.col(l))) {
        const BinaryMetrics b = evaluate_binary(pred.predicted_outcomes.col(l), truth.data.col(l));
        e["accuracy"] = b.accuracy;
        e["auc"] = b.auc ? Json(*b.auc) : Json(nullptr);
      }
      per.push_back(std::move(e));
    }
    metrics["outcomes"] = std::move(per);
    write(a.out_dir, "metrics.json", io::dump(metrics));
  }
  out << "predict: " << n << " rows\n";
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::vector<Index> n_list{100, 1000};
  std::vector<double> sigma_list{50.0};
  Index q = 20, p = 20, t = 10;
  double rho = 0.5;
  int replicates = 5;
  int bootstrap_b = 10;
  int folds = 5;
  double threshold = 1e-6;
  bool no_qq = false;
  LambdaFlags lambdas;
  SolverFlags solver;
  std::uint64_t seed = 0;
  std::optional<int> threads;
  std::string out_dir;
};

void metric_rows(std::string& csv, const SimCell& c, const char* name, const MetricSummary& m) {
  if (!m.defined()) return;
  csv += std::to_string(c.n) + "," + io::format_double(c.sigma) + "," + name + "," +
         io::format_double(m.mean) + "," + io::format_double(m.median) + "," +
         std::to_string(m.values.size()) + "\n";
}

void scalar_row(std::string& csv, const SimCell& c, const char* name, double v) {
  csv += std::to_string(c.n) + "," + io::format_double(c.sigma) + "," + name + "," +
         io::format_double(v) + "," + io::format_double(v) + ",1\n";
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  SimConfig cfg;
  cfg.q = a.q;
  cfg.p = a.p;
  cfg.outcomes = a.t;
  cfg.rho = a.rho;
  cfg.seed = a.seed;
  cfg.sigma = a.sigma_list.empty() ? 1.0 : a.sigma_list.front();
  cfg.n = a.n_list.empty() ? 2 : a.n_list.front();

  CellOptions opts;
  opts.replicates = a.replicates;
  opts.bootstrap_b = a.bootstrap_b;
  opts.folds = a.folds;
  opts.threshold = a.threshold;
  opts.collect_qq = !a.no_qq;
  opts.threads = resolve_threads(a.threads);
  opts.fit = a.solver.options(1);
  if (a.lambdas.any()) opts.penalties = a.lambdas.require_all();

  const GroundTruth truth = generate_truth(cfg);
  const GridResult grid = run_grid(truth, cfg, a.n_list, a.sigma_list, opts);

  std::string results = "n,sigma,metric,mean,median,count\n";
  std::string qq = "n,sigma,statistic,index,value\n";
  for (const SimCell& c : grid.cells) {
    if (c.aborted) {
      scalar_row(results, c, "aborted", 1.0);
      err << "cell n=" << c.n << " sigma=" << c.sigma << " aborted: " << c.abort_reason << "\n";
      continue;
    }
    metric_rows(results, c, "nrmse_alpha", c.nrmse_alpha);
    metric_rows(results, c, "nrmse_beta", c.nrmse_beta);
    metric_rows(results, c, "nrmse_indirect", c.nrmse_indirect);
    metric_rows(results, c, "corr_alpha", c.corr_alpha);
    metric_rows(results, c, "corr_beta", c.corr_beta);
    metric_rows(results, c, "corr_indirect", c.corr_indirect);
    metric_rows(results, c, "type1_alpha", c.type1_alpha);
    metric_rows(results, c, "type1_beta", c.type1_beta);
    if (c.stability) scalar_row(results, c, "stability", *c.stability);
    scalar_row(results, c, "failed_replicates", c.failed);
    scalar_row(results, c, "lambda_m1", c.penalties.lambda_m1);
    scalar_row(results, c, "lambda_m2", c.penalties.lambda_m2);
    scalar_row(results, c, "lambda_y1", c.penalties.lambda_y1);
    scalar_row(results, c, "lambda_y2", c.penalties.lambda_y2);
    auto dump_qq = [&](const char* name, const std::vector<double>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        qq += std::to_string(c.n) + "," + io::format_double(c.sigma) + "," + name + "," +
              std::to_string(i) + "," + io::format_double(v[i]) + "\n";
      }
    };
    dump_qq("beta", c.qq_beta);
    dump_qq("mediation", c.qq_mediation);
    for (const auto& f : c.failures) err << "cell n=" << c.n << " sigma=" << c.sigma << ": " << f << "\n";
  }

  std::string trends = "sigma,metric,holds,inversions\n";
  for (const TrendCheck& t : grid.trends) {
    trends += io::format_double(t.sigma) + "," + t.metric + "," + (t.holds ? "1" : "0") + "," +
              std::to_string(t.inversions) + "\n";
  }

  Json tj;
  tj["format_version"] = 1;
  tj["alpha"] = io::matrix_to_json(truth.alpha);
  tj["beta"] = io::matrix_to_json(truth.beta);
  tj["gamma"] = io::matrix_to_json(truth.gamma);
  tj["zeta"] = io::matrix_to_json(truth.zeta);
  tj["eta"] = io::matrix_to_json(truth.eta);
  tj["indirect"] = io::matrix_to_json(truth.indirect);
  tj["config"] = {{"q", cfg.q}, {"p", cfg.p}, {"outcomes", cfg.outcomes}, {"covariates", cfg.covariates},
                  {"rho", cfg.rho}, {"seed", cfg.seed}, {"replicates", a.replicates},
                  {"bootstrap_b", a.bootstrap_b}, {"threshold", a.threshold}};

  ensure_dir(a.out_dir);
  write(a.out_dir, "grid_results.csv", results);
  write(a.out_dir, "qq_samples.csv", qq);
  write(a.out_dir, "trends.csv", trends);
  write(a.out_dir, "truth.json", io::dump(tj));

  out << "simulate: " << grid.cells.size() << " cells\n";
  return grid.any_aborted() ? kSimulationError : kOk;
}

// ---------------------------------------------------------------- bootstrap

struct BootstrapArgs {
  DataPaths data;
  std::string coef;
  LambdaFlags lambdas;
  SolverFlags solver;
  int replicates = 100;
  std::optional<double> threshold;
  std::uint64_t seed = 0;
  std::optional<int> threads;
  std::string out_dir;
};

int cmd_bootstrap(const BootstrapArgs& a, std::ostream& out) {
  const int threads = resolve_threads(a.threads);
  const LoadedData loaded = load_data(a.data, true, true);
  MmmFitOptions opts = a.solver.options(threads);
  PenaltyConfig pen;
  if (a.lambdas.any()) {
    pen = a.lambdas.require_all();
  } else if (!a.coef.empty()) {
    const io::FittedModel model = io::read_model(a.coef);
    pen = model.penalties;
    opts.scale = model.options.scale;
    opts.penalize_intercept = model.options.penalize_intercept;
  } else {
    throw InputError("bootstrap needs --coef or all four --lambda flags");
  }

  const BootstrapResult br = bootstrap_indirect(loaded.ds, pen, opts, a.replicates, a.seed);
  const double threshold = a.threshold ? *a.threshold : default_stability_threshold(br);
  Json j;
  j["format_version"] = 1;
  j["penalties"] = penalties_json(pen);
  j["seed"] = a.seed;
  j["replicates"] = a.replicates;
  j["replicate_count"] = br.replicate_count;
  j["failed_count"] = br.failed_count;
  j["threshold"] = threshold;
  j["stability_index"] = stability_index(br, threshold);
  j["mean"] = io::matrix_to_json(br.mean);
  j["sd"] = io::matrix_to_json(br.sd);
  j["sign_agreement"] = io::matrix_to_json(br.sign_agreement);
  j["exposures"] = loaded.ds.names().x;
  j["outcomes"] = loaded.ds.names().y;

  ensure_dir(a.out_dir);
  write(a.out_dir, "bootstrap.json", io::dump(j));
  out << "bootstrap: " << br.replicate_count << " replicates, stability "
      << j["stability_index"].get<double>() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  DataPaths data;
  std::string coef;
  std::vector<std::string> eic_pairs;  // "k:l"
  std::string out_dir;
};

std::pair<Index, Index> parse_pair(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InputError("--eic expects outcome:mediator, got " + s);
  try {
    return {std::stol(s.substr(0, colon)), std::stol(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw InputError("--eic expects integer indices, got " + s);
  }
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const io::FittedModel model = io::read_model(a.coef);
  const LoadedData loaded = load_data(a.data, true, false);
  const Dataset& ds = loaded.ds;
  const auto& names = model.coef.names;
  require_header(ds.names().x, names.x, a.data.x);
  require_header(ds.names().m, names.m, a.data.m);
  if (ds.s() != model.coef.s()) throw InputError("covariate count differs from the fitted model");

  Json j;
  j["format_version"] = 1;
  j["n"] = ds.n();
  j["penalties"] = penalties_json(model.penalties);

  Json bounds = Json::array();
  for (Index k = 0; k < model.coef.outcomes(); ++k) {
    Json e;
    e["outcome"] = names.y[static_cast<std::size_t>(k)];
    try {
      e["bound"] = mse_bound_beta(ds, model.coef.beta.col(k), model.penalties);
    } catch (const Error& ex) {
      e["bound"] = nullptr;
      e["error"] = ex.what();
    }
    bounds.push_back(std::move(e));
  }
  j["mse_bound_beta"] = std::move(bounds);

  std::vector<std::pair<Index, Index>> pairs;
  for (const auto& s : a.eic_pairs) pairs.push_back(parse_pair(s));
  if (pairs.empty()) {
    for (Index k = 0; k < model.coef.outcomes(); ++k)
      for (Index l = 0; l < model.coef.p(); ++l) pairs.emplace_back(k, l);
  }
  Json eic = Json::array();
  for (const auto& [k, l] : pairs) {
    Json e;
    e["outcome"] = k;
    e["mediator"] = l;
    try {
      const EicReport r = check_eic(ds, model.coef, model.penalties, k, l);
      e["value_beta"] = optional_json(r.value_beta);
      e["value_alpha"] = optional_json(r.value_alpha);
      e["psi_margin"] = optional_json(r.psi_margin);
      e["satisfied"] = r.satisfied();
      e["support_beta"] = r.support_beta;
      e["support_alpha"] = r.support_alpha;
    } catch (const Error& ex) {
      if (ex.code() == ErrorCode::IndexOutOfRange) throw InputError(ex.what());
      e["error"] = ex.what();
    }
    eic.push_back(std::move(e));
  }
  j["eic"] = std::move(eic);

  const LambdaScaling ls = lambda_scaling(model.penalties, ds.n());
  j["lambda_scaling"] = {{"lambda_m1_over_sqrt_n", ls.m1_over_sqrt_n},
                         {"lambda_m2_over_n", ls.m2_over_n},
                         {"lambda_m2_over_sqrt_n", ls.m2_over_sqrt_n},
                         {"lambda_y1_over_sqrt_n", ls.y1_over_sqrt_n},
                         {"lambda_y2_over_n", ls.y2_over_n},
                         {"lambda_y2_over_sqrt_n", ls.y2_over_sqrt_n}};

  ensure_dir(a.out_dir);
  write(a.out_dir, "diagnostics.json", io::dump(j));
  out << "diagnose: " << pairs.size() << " EIC checks\n";
  return kOk;
}

void add_data_flags(CLI::App* app, DataPaths& d, bool need_m, bool need_y) {
  app->add_option("--x", d.x, "exposure CSV")->required();
  auto* m = app->add_option("--m", d.m, "mediator CSV");
  auto* y = app->add_option("--y", d.y, "outcome CSV");
  if (need_m) m->required();
  if (need_y) y->required();
  app->add_option("--z", d.z, "covariate CSV (no intercept column)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multivariate mediation model: two-stage elastic-net fitting and tools", "mmm"};
  app.require_subcommand(1);
  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit the two-stage model");
  add_data_flags(fit_cmd, fit.data, true, true);
  add_lambda_flags(fit_cmd, fit.lambdas);
  add_solver_flags(fit_cmd, fit.solver);
  fit_cmd->add_option("--cv-grid", fit.cv_grid, "JSON penalty grid for cross-validation");
  fit_cmd->add_option("--cv-mode", fit.cv_mode, "outcome-stage CV scoring")
      ->check(CLI::IsMember({"observed", "mediated"}));
  fit_cmd->add_option("--folds", fit.folds, "CV folds")->check(CLI::Range(2, 1000000));
  fit_cmd->add_option("--seed", fit.seed, "seed for fold assignment");
  fit_cmd->add_option("--threads", fit.threads, "worker threads (default MMM_THREADS or 1)");
  fit_cmd->add_option("--top-paths", fit.top, "rows in paths.csv");
  fit_cmd->add_option("--out-dir", fit.out_dir, "output directory")->required();
  fit_cmd->add_flag("--allow-nonconverged", fit.allow_nonconverged, "write outputs even without convergence");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "predict mediators and outcomes for new rows");
  pred_cmd->add_option("--coef", pred.coef, "coefficients.json from fit")->required();
  pred_cmd->add_option("--x", pred.x, "exposure CSV")->required();
  pred_cmd->add_option("--z", pred.z, "covariate CSV");
  pred_cmd->add_option("--truth", pred.truth, "observed outcomes CSV for metrics.json");
  pred_cmd->add_option("--out-dir", pred.out_dir, "output directory")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run the simulation grid");
  sim_cmd->add_option("--n-list", sim.n_list, "sample sizes")->delimiter(',');
  sim_cmd->add_option("--sigma-list", sim.sigma_list, "noise scales")->delimiter(',');
  sim_cmd->add_option("--q", sim.q, "exposures")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--p", sim.p, "mediators")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--t", sim.t, "outcomes")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--rho", sim.rho, "exposure correlation decay");
  sim_cmd->add_option("--replicates", sim.replicates, "replicates per cell")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--bootstrap-b", sim.bootstrap_b, "bootstrap runs for the stability index")
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--folds", sim.folds, "CV folds")->check(CLI::Range(2, 1000000));
  sim_cmd->add_option("--threshold", sim.threshold, "type-I and stability threshold")
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_flag("--no-qq", sim.no_qq, "skip normality statistics");
  add_lambda_flags(sim_cmd, sim.lambdas);
  add_solver_flags(sim_cmd, sim.solver);
  sim_cmd->add_option("--seed", sim.seed, "base seed");
  sim_cmd->add_option("--threads", sim.threads, "worker threads (default MMM_THREADS or 1)");
  sim_cmd->add_option("--out-dir", sim.out_dir, "output directory")->required();

  BootstrapArgs boot;
  auto* boot_cmd = app.add_subcommand("bootstrap", "pairs bootstrap of the indirect effects");
  add_data_flags(boot_cmd, boot.data, true, true);
  boot_cmd->add_option("--coef", boot.coef, "take penalties and options from a fit");
  add_lambda_flags(boot_cmd, boot.lambdas);
  add_solver_flags(boot_cmd, boot.solver);
  boot_cmd->add_option("--bootstrap-b,--replicates", boot.replicates, "bootstrap replicates")
      ->check(CLI::Range(2, 100000000));
  boot_cmd->add_option("--threshold", boot.threshold, "sign threshold for the stability index")
      ->check(CLI::NonNegativeNumber);
  boot_cmd->add_option("--seed", boot.seed, "resampling seed");
  boot_cmd->add_option("--threads", boot.threads, "worker threads (default MMM_THREADS or 1)");
  boot_cmd->add_option("--out-dir", boot.out_dir, "output directory")->required();

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "MSE bounds, EIC and penalty scaling");
  diag_cmd->add_option("--coef", diag.coef, "coefficients.json from fit")->required();
  add_data_flags(diag_cmd, diag.data, true, false);
  diag_cmd->add_option("--eic", diag.eic_pairs, "outcome:mediator pairs (default all)")->delimiter(',');
  diag_cmd->add_option("--out-dir", diag.out_dir, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*pred_cmd) return cmd_predict(pred, out);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*boot_cmd) return cmd_bootstrap(boot, out);
    if (*diag_cmd) return cmd_diagnose(diag, out);
  } catch (const ConvergenceFailure& e) {
    err << "error: " << e.what() << "\n";
    return kConvergenceError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::TooManyFailures ? kConvergenceError : kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace mmm::cli
