#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "sparsear/ar_process.hpp"
#include "sparsear/selection.hpp"

namespace sparsear {

// Monte-Carlo selection study: per replication, simulate the model, fit the
// solution path in dimension p, choose lambda by cross-validation, and run
// Yule-Walker order selection on the same series.  The study defaults to the
// one-standard-error choice rule, which keeps the selected supports close to
// the parsimony of the original study; the plain minimum rule is available
// for comparison.
struct McConfig {
  ArModel model;
  int n = 1000;
  int p = 50;
  int replications = 200;
  int cv_folds = 10;
  int grid_size = 100;
  double lambda_min_ratio = 1e-3;
  std::uint64_t base_seed = 1;  // replication i uses seed base_seed + i
  Eigen::VectorXd weights;      // empty => unit weights
  CvChoiceRule cv_rule = CvChoiceRule::kOneStandardError;
  int yw_max_order = 30;
  int threads = 0;  // 0 => hardware concurrency
};

struct McSummary {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct McReport {
  int replications = 0;  // completed replications
  int failures = 0;
  std::vector<int> selected_count_per_lag;
  std::vector<int> among_first_five_per_lag;
  std::vector<int> num_selected;                       // per replication
  std::vector<std::map<int, int>> entry_order_histogram;  // per lag: rank -> count
  std::map<int, int> yw_order_histogram;
  McSummary summary;  // of num_selected
};

McReport run_monte_carlo(const McConfig& config);

// The sparse AR(15) used throughout the selection study: coefficients 0.2,
// 0.1, 0.2, 0.3, 0.1 at lags 1, 3, 5, 10, 15 and innovation sd 0.1.
ArModel study_model();

// Writes report.json, table1.csv, num_selected.csv, entry_order.csv and
// yw_orders.csv into directory and returns the paths written.
std::vector<std::filesystem::path> emit_report(
    const McReport& report, const McConfig& config,
    const std::filesystem::path& directory);

}  // namespace sparsear
