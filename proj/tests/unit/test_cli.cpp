#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "mmm/cli.hpp"
#include "mmm/io.hpp"

using namespace mmm;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = MMM_FIXTURE_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mmm_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> fixture_args() {
  return {"--x", (kFixtures / "x.csv").string(), "--m", (kFixtures / "m.csv").string(),
          "--y", (kFixtures / "y.csv").string(), "--z", (kFixtures / "z.csv").string()};
}

std::vector<std::string> fixed_penalties() {
  return {"--lambda-m1", "1", "--lambda-m2", "0.5", "--lambda-y1", "1", "--lambda-y2", "0.5"};
}

Run fit(const fs::path& dir, std::vector<std::string> extra = {}) {
  std::vector<std::string> args{"fit"};
  for (auto& a : fixture_args()) args.push_back(a);
  args.insert(args.end(), extra.begin(), extra.end());
  args.push_back("--out-dir");
  args.push_back(dir.string());
  return run(args);
}

}  // namespace

TEST_CASE("fit writes coefficients, indirect effects and paths") {
  const fs::path dir = scratch("fit");
  const Run r = fit(dir, fixed_penalties());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir / "coefficients.json"));
  const auto ind = io::read_csv(dir / "indirect.csv", true);
  CHECK(ind.row_labels.front() == "snp1");
  CHECK(ind.header.size() == 3);
  const auto model = io::read_model(dir / "coefficients.json");
  CHECK(model.penalties == PenaltyConfig{1, 0.5, 1, 0.5});
  CHECK(model.selection == "fixed");
  fs::remove_all(dir);
}

TEST_CASE("fit with cross-validation records the selection") {
  const fs::path dir = scratch("cv");
  const Run r = fit(dir, {"--folds", "3", "--seed", "4"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto model = io::read_model(dir / "coefficients.json");
  CHECK(model.selection == "cv");
  CHECK(model.folds == 3);
  fs::remove_all(dir);
}

TEST_CASE("partial penalty flags are an input error") {
  const fs::path dir = scratch("partial");
  CHECK(fit(dir, {"--lambda-m1", "1"}).code == cli::kInputError);
}

TEST_CASE("non-convergence exits 3 unless allowed") {
  const fs::path dir = scratch("nonconv");
  auto args = fixed_penalties();
  args.insert(args.end(), {"--max-iterations", "1", "--tolerance", "1e-300"});
  CHECK(fit(dir, args).code == cli::kConvergenceError);
  args.push_back("--allow-nonconverged");
  CHECK(fit(dir, args).code == cli::kOk);
  fs::remove_all(dir);
}

TEST_CASE("missing files and bad headers exit 2") {
  const fs::path dir = scratch("bad");
  CHECK(run({"fit", "--x", "/nonexistent.csv", "--out-dir", dir.string()}).code == cli::kInputError);
  CHECK(run({"nonsense"}).code == cli::kInputError);

  REQUIRE(fit(dir, fixed_penalties()).code == 0);
  const Run p = run({"predict", "--coef", (dir / "coefficients.json").string(), "--x",
                     (kFixtures / "x_bad_header.csv").string(), "--z",
                     (kFixtures / "z_new.csv").string(), "--out-dir", (dir / "p").string()});
  CHECK(p.code == cli::kInputError);
  fs::remove_all(dir);
}

TEST_CASE("predict writes metrics against truth") {
  const fs::path dir = scratch("predict");
  REQUIRE(fit(dir, fixed_penalties()).code == 0);
  const Run p = run({"predict", "--coef", (dir / "coefficients.json").string(), "--x",
                     (kFixtures / "x_new.csv").string(), "--z", (kFixtures / "z_new.csv").string(),
                     "--truth", (kFixtures / "y_new.csv").string(), "--out-dir",
                     (dir / "p").string()});
  REQUIRE_MESSAGE(p.code == 0, p.err);
  const auto pred = io::read_csv(dir / "p" / "predicted_outcomes.csv");
  CHECK(pred.data.rows() == 20);
  const auto metrics = io::Json::parse(io::read_file(dir / "p" / "metrics.json"));
  CHECK(metrics.contains("outcomes"));
  fs::remove_all(dir);
}

TEST_CASE("bootstrap and diagnose") {
  const fs::path dir = scratch("boot");
  REQUIRE(fit(dir, fixed_penalties()).code == 0);
  std::vector<std::string> args{"bootstrap"};
  for (auto& a : fixture_args()) args.push_back(a);
  args.insert(args.end(), {"--coef", (dir / "coefficients.json").string(), "--bootstrap-b", "4",
                           "--out-dir", (dir / "b").string()});
  const Run b = run(args);
  REQUIRE_MESSAGE(b.code == 0, b.err);
  const auto boot = io::Json::parse(io::read_file(dir / "b" / "bootstrap.json"));
  CHECK(boot.contains("stability_index"));

  args = {"diagnose"};
  for (auto& a : fixture_args()) args.push_back(a);
  args.insert(args.end(), {"--coef", (dir / "coefficients.json").string(), "--eic", "0:0",
                           "--out-dir", (dir / "d").string()});
  const Run d = run(args);
  REQUIRE_MESSAGE(d.code == 0, d.err);
  const auto diag = io::Json::parse(io::read_file(dir / "d" / "diagnostics.json"));
  CHECK(diag.contains("eic"));
  CHECK(diag.contains("lambda_scaling"));
  fs::remove_all(dir);
}

TEST_CASE("small simulation writes its tables") {
  const fs::path dir = scratch("sim");
  const Run r = run({"simulate", "--n-list", "60,120", "--sigma-list", "1", "--replicates", "2", "--bootstrap-b", "0", "--no-qq",
                     "--lambda-m1", "1", "--lambda-m2", "1", "--lambda-y1", "1", "--lambda-y2",
                     "1", "--seed", "3", "--out-dir", dir.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir / "grid_results.csv"));
  CHECK(fs::exists(dir / "trends.csv"));
  CHECK(fs::exists(dir / "truth.json"));
  fs::remove_all(dir);
}
