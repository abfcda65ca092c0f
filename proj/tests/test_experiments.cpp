#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sparsear/experiments.hpp"
#include "sparsear/io.hpp"

using namespace sparsear;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("sparsear_test_" + std::to_string(rd()) + "_" +
            std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

McConfig small_config() {
  Eigen::VectorXd phi(2);
  phi << 0.5, 0.25;
  McConfig config{ArModel(phi, 1.0)};
  config.n = 240;
  config.p = 8;
  config.replications = 6;
  config.cv_folds = 5;
  config.grid_size = 30;
  config.base_seed = 11;
  config.yw_max_order = 10;
  config.threads = 1;
  return config;
}

bool reports_equal(const McReport& a, const McReport& b) {
  return a.replications == b.replications && a.failures == b.failures &&
         a.selected_count_per_lag == b.selected_count_per_lag &&
         a.among_first_five_per_lag == b.among_first_five_per_lag &&
         a.num_selected == b.num_selected &&
         a.entry_order_histogram == b.entry_order_histogram &&
         a.yw_order_histogram == b.yw_order_histogram &&
         a.summary.mean == b.summary.mean && a.summary.sd == b.summary.sd &&
         a.summary.min == b.summary.min &&
         a.summary.median == b.summary.median &&
         a.summary.max == b.summary.max;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

double mean_entry_rank(const McReport& report, int lag) {
  const auto& histogram = report.entry_order_histogram[lag - 1];
  double total = 0.0;
  int count = 0;
  for (const auto& [rank, c] : histogram) {
    total += static_cast<double>(rank) * c;
    count += c;
  }
  REQUIRE(count > 0);
  return total / count;
}

}  // namespace

TEST_CASE("the selection-study model is pinned") {
  const ArModel model = study_model();
  CHECK(model.order() == 15);
  CHECK(model.noise_sd() == 0.1);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(15);
  expected[0] = 0.2;
  expected[2] = 0.1;
  expected[4] = 0.2;
  expected[9] = 0.3;
  expected[14] = 0.1;
  CHECK((model.coefficients() - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.causal_margin() ==
        doctest::Approx(0.015552060931793399).epsilon(1e-12));
}

TEST_CASE("the study is deterministic in the base seed") {
  const McConfig config = small_config();
  const McReport a = run_monte_carlo(config);
  const McReport b = run_monte_carlo(config);
  CHECK(reports_equal(a, b));
  CHECK(a.replications == 6);
  CHECK(a.failures == 0);

  McConfig shifted = config;
  shifted.base_seed = 12;
  const McReport c = run_monte_carlo(shifted);
  CHECK_FALSE(reports_equal(a, c));
}

TEST_CASE("aggregation does not depend on the thread count") {
  McConfig config = small_config();
  config.threads = 1;
  const McReport serial = run_monte_carlo(config);
  config.threads = 2;
  const McReport parallel = run_monte_carlo(config);
  CHECK(reports_equal(serial, parallel));
}

TEST_CASE("a strong low-order signal is recovered in one replication") {
  Eigen::VectorXd phi(2);
  phi << 0.5, 0.3;
  McConfig config{ArModel(phi, 1.0)};
  config.n = 2000;
  config.p = 5;
  config.replications = 1;
  config.grid_size = 60;
  config.base_seed = 3;
  config.yw_max_order = 10;
  config.threads = 1;

  const McReport report = run_monte_carlo(config);
  CHECK(report.replications == 1);
  CHECK(report.failures == 0);
  REQUIRE(report.num_selected.size() == 1);
  CHECK(report.num_selected[0] >= 2);
  CHECK(report.selected_count_per_lag[0] == 1);
  CHECK(report.selected_count_per_lag[1] == 1);
  CHECK(report.among_first_five_per_lag[0] == 1);
  CHECK(report.among_first_five_per_lag[1] == 1);
}

TEST_CASE("study configuration validation") {
  const McConfig base = small_config();
  auto expect_throw = [&](auto mutate) {
    McConfig config = base;
    mutate(config);
    CHECK_THROWS_AS(run_monte_carlo(config), std::invalid_argument);
  };
  expect_throw([](McConfig& c) { c.n = 0; });
  expect_throw([](McConfig& c) { c.p = 0; });
  expect_throw([](McConfig& c) { c.replications = 0; });
  expect_throw([](McConfig& c) { c.cv_folds = 1; });
  expect_throw([](McConfig& c) { c.cv_folds = c.n + 1; });
  expect_throw([](McConfig& c) { c.grid_size = 1; });
  expect_throw([](McConfig& c) { c.lambda_min_ratio = 0.0; });
  expect_throw([](McConfig& c) { c.lambda_min_ratio = 1.0; });
  expect_throw([](McConfig& c) { c.yw_max_order = 0; });
  expect_throw([](McConfig& c) { c.yw_max_order = c.n; });
  expect_throw([](McConfig& c) { c.weights = Eigen::VectorXd::Ones(3); });
  expect_throw([](McConfig& c) { c.threads = -1; });
}

TEST_CASE("report invariants and summary arithmetic hold on the study model") {
  McConfig config{study_model()};
  config.replications = 30;
  config.base_seed = 1;
  config.threads = 1;

  const McReport report = run_monte_carlo(config);
  CHECK(report.failures == 0);
  CHECK(report.replications == 30);
  REQUIRE(report.num_selected.size() == 30);
  REQUIRE(report.selected_count_per_lag.size() == 50);
  REQUIRE(report.among_first_five_per_lag.size() == 50);
  REQUIRE(report.entry_order_histogram.size() == 50);

  int total_selected = 0;
  for (int j = 0; j < 50; ++j) {
    CHECK(report.among_first_five_per_lag[j] <=
          report.selected_count_per_lag[j]);
    CHECK(report.selected_count_per_lag[j] <= report.replications);
    total_selected += report.selected_count_per_lag[j];
    for (const auto& [rank, count] : report.entry_order_histogram[j]) {
      CHECK(rank >= 1);
      CHECK(rank <= 50);
      CHECK(count >= 1);
      CHECK(count <= report.replications);
    }
  }
  int total_by_replication = 0;
  for (int v : report.num_selected) {
    CHECK(v >= 0);
    CHECK(v <= 50);
    total_by_replication += v;
  }
  CHECK(total_selected == total_by_replication);

  int yw_total = 0;
  for (const auto& [order, count] : report.yw_order_histogram) {
    CHECK(order >= 1);
    CHECK(order <= config.yw_max_order);
    yw_total += count;
  }
  CHECK(yw_total == report.replications);

  // Summary statistics recomputed from the raw counts.
  std::vector<int> sorted = report.num_selected;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (int v : sorted) mean += v;
  mean /= sorted.size();
  double ss = 0.0;
  for (int v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (sorted.size() - 1));
  CHECK(report.summary.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(report.summary.sd == doctest::Approx(sd).epsilon(1e-12));
  CHECK(report.summary.min == sorted.front());
  CHECK(report.summary.max == sorted.back());
  CHECK(report.summary.median ==
        doctest::Approx(0.5 * (sorted[14] + sorted[15])).epsilon(1e-12));

  // Stronger coefficients enter the path earlier on average.
  CHECK(mean_entry_rank(report, 10) < mean_entry_rank(report, 5));
  CHECK(mean_entry_rank(report, 5) < mean_entry_rank(report, 3));

  // The conservative choice rule selects fewer lags than the plain minimum.
  McConfig plain = config;
  plain.replications = 10;
  plain.cv_rule = CvChoiceRule::kMinimum;
  McConfig conservative = plain;
  conservative.cv_rule = CvChoiceRule::kOneStandardError;
  const McSummary plain_summary = run_monte_carlo(plain).summary;
  const McSummary conservative_summary =
      run_monte_carlo(conservative).summary;
  CHECK(conservative_summary.mean < plain_summary.mean);
}

TEST_CASE("report files are written with headers and full tables") {
  const McConfig config = small_config();
  const McReport report = run_monte_carlo(config);
  TempDir dir;

  const auto written = emit_report(report, config, dir.path);
  REQUIRE(written.size() == 5);
  for (const auto& path : written) {
    CHECK(fs::exists(path));
  }
  CHECK(written[0].filename() == "report.json");
  CHECK(written[1].filename() == "table1.csv");
  CHECK(written[2].filename() == "num_selected.csv");
  CHECK(written[3].filename() == "entry_order.csv");
  CHECK(written[4].filename() == "yw_orders.csv");

  const auto table1 = read_lines(written[1]);
  REQUIRE(static_cast<int>(table1.size()) == config.p + 1);
  CHECK(table1[0] == "lag,value,selected_count,among_first_five");
  // Row for lag 1 carries the true coefficient 0.5.
  std::istringstream row(table1[1]);
  std::string lag, value;
  std::getline(row, lag, ',');
  std::getline(row, value, ',');
  CHECK(lag == "1");
  CHECK(std::stod(value) == 0.5);

  const auto counts = read_lines(written[2]);
  REQUIRE(counts.size() == report.num_selected.size() + 1);
  CHECK(counts[0] == "replication,num_selected");

  const auto entry = read_lines(written[3]);
  CHECK(entry[0] == "lag,order,count");
  const auto yw = read_lines(written[4]);
  CHECK(yw[0] == "order,count");

  // The JSON report round-trips and echoes the configuration.
  std::ifstream in(written[0]);
  const nlohmann::json doc = nlohmann::json::parse(in);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["config"]["n"] == config.n);
  CHECK(doc["config"]["p"] == config.p);
  CHECK(doc["config"]["cv_rule"] == "1se");
  CHECK(doc["config"]["model"]["sigma"] == 1.0);
  CHECK(doc["replications"] == report.replications);
  CHECK(doc["failures"] == 0);
  CHECK(doc["selected_count_per_lag"].size() ==
        static_cast<std::size_t>(config.p));
  CHECK(doc["num_selected"].size() == report.num_selected.size());
  CHECK(doc["summary"]["mean"].get<double>() ==
        doctest::Approx(report.summary.mean));

  // Re-emitting overwrites in place with identical contents.
  const auto first_table = read_lines(written[1]);
  const auto rewritten = emit_report(report, config, dir.path);
  CHECK(read_lines(rewritten[1]) == first_table);
}

TEST_CASE("study configuration files round-trip") {
  TempDir dir;
  McConfig config = small_config();
  config.cv_rule = CvChoiceRule::kMinimum;
  config.weights = Eigen::VectorXd::LinSpaced(config.p, 1.0, 2.0);
  const fs::path path = dir.path / "config.json";
  save_mc_config(config, path);

  const McConfig loaded = load_mc_config(path, McConfig{study_model()});
  CHECK(loaded.n == config.n);
  CHECK(loaded.p == config.p);
  CHECK(loaded.replications == config.replications);
  CHECK(loaded.cv_folds == config.cv_folds);
  CHECK(loaded.grid_size == config.grid_size);
  CHECK(loaded.lambda_min_ratio == config.lambda_min_ratio);
  CHECK(loaded.base_seed == config.base_seed);
  CHECK(loaded.yw_max_order == config.yw_max_order);
  CHECK(loaded.cv_rule == CvChoiceRule::kMinimum);
  CHECK((loaded.model.coefficients() - config.model.coefficients())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(loaded.model.noise_sd() == config.model.noise_sd());
  CHECK((loaded.weights - config.weights).cwiseAbs().maxCoeff() == 0.0);

  // Unit weights are encoded symbolically and load back as empty.
  config.weights.resize(0);
  config.cv_rule = CvChoiceRule::kOneStandardError;
  save_mc_config(config, path);
  const McConfig unit = load_mc_config(path, McConfig{study_model()});
  CHECK(unit.weights.size() == 0);
  CHECK(unit.cv_rule == CvChoiceRule::kOneStandardError);

  // Partial files keep the caller's defaults for missing keys.
  {
    std::ofstream out(dir.path / "partial.json");
    out << "{\"n\": 123}\n";
  }
  McConfig defaults = small_config();
  const McConfig partial = load_mc_config(dir.path / "partial.json", defaults);
  CHECK(partial.n == 123);
  CHECK(partial.p == defaults.p);
  CHECK(partial.base_seed == defaults.base_seed);

  // Malformed documents are rejected.
  {
    std::ofstream out(dir.path / "bad.json");
    out << "{\"cv_rule\": \"sometimes\"}\n";
  }
  CHECK_THROWS_AS(load_mc_config(dir.path / "bad.json", McConfig{study_model()}),
                  std::invalid_argument);
  {
    std::ofstream out(dir.path / "broken.json");
    out << "{not json\n";
  }
  CHECK_THROWS_AS(load_mc_config(dir.path / "broken.json", McConfig{study_model()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(load_mc_config(dir.path / "missing.json", McConfig{study_model()}),
                  std::invalid_argument);
}
