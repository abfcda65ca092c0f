#include "sparsear/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "sparsear/design.hpp"

namespace sparsear {

namespace {

struct ReplicationResult {
  bool failed = false;
  std::vector<int> support;          // 1-based lags
  std::vector<int> entry_rank;       // rank per lag, 0 when never entered
  int yw_order = 0;
};

void validate_config(const McConfig& config) {
  if (config.n < 1) throw std::invalid_argument("n must be >= 1");
  if (config.p < 1) throw std::invalid_argument("p must be >= 1");
  if (config.replications < 1) {
    throw std::invalid_argument("replications must be >= 1");
  }
  if (config.cv_folds < 2 || config.cv_folds > config.n) {
    throw std::invalid_argument("cv_folds must lie in [2, n]");
  }
  if (config.grid_size < 2) {
    throw std::invalid_argument("grid_size must be >= 2");
  }
  if (!(config.lambda_min_ratio > 0.0) || !(config.lambda_min_ratio < 1.0)) {
    throw std::invalid_argument("lambda_min_ratio must lie in (0, 1)");
  }
  if (config.yw_max_order < 1 || config.yw_max_order >= config.n) {
    throw std::invalid_argument("yw_max_order must lie in [1, n)");
  }
  if (config.weights.size() != 0 && config.weights.size() != config.p) {
    throw std::invalid_argument("weights must be empty or of size p");
  }
  if (config.threads < 0) throw std::invalid_argument("threads must be >= 0");
}

ReplicationResult run_replication(const McConfig& config,
                                  const Eigen::VectorXd& weights, int index) {
  const std::uint64_t seed = config.base_seed + index;
  const TimeSeries series = simulate(config.model, config.n, config.p, seed);
  const LagDesign design = build_design(series, config.p);

  const SolutionPath path =
      solution_path(design, weights, config.grid_size,
                    config.lambda_min_ratio);
  Eigen::VectorXd grid(path.knots.size());
  for (std::size_t i = 0; i < path.knots.size(); ++i) {
    grid[i] = path.knots[i].lambda;
  }
  const CvResult cv =
      cross_validate(design, weights, grid, config.cv_folds, seed,
                     CvScheme::kRandomFolds, config.cv_rule);

  ReplicationResult result;
  result.support = selected_support(path, cv.chosen_lambda);
  result.entry_rank.assign(config.p, 0);
  for (std::size_t r = 0; r < path.entry_events.size(); ++r) {
    result.entry_rank[path.entry_events[r].lag - 1] = static_cast<int>(r) + 1;
  }
  result.yw_order = yule_walker(series, config.yw_max_order).chosen_order;
  return result;
}

McSummary summarize(const std::vector<int>& counts) {
  McSummary summary;
  if (counts.empty()) return summary;
  const int m = static_cast<int>(counts.size());
  double sum = 0.0;
  for (int v : counts) sum += v;
  summary.mean = sum / m;
  double ss = 0.0;
  for (int v : counts) ss += (v - summary.mean) * (v - summary.mean);
  summary.sd = m > 1 ? std::sqrt(ss / (m - 1)) : 0.0;
  std::vector<int> sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  summary.min = sorted.front();
  summary.max = sorted.back();
  summary.median = m % 2 == 1
                       ? sorted[m / 2]
                       : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  return summary;
}

}  // namespace

McReport run_monte_carlo(const McConfig& config) {
  validate_config(config);
  const Eigen::VectorXd weights =
      config.weights.size() == 0 ? Eigen::VectorXd::Ones(config.p)
                                 : config.weights;

  const int reps = config.replications;
  std::vector<ReplicationResult> results(reps);
  std::atomic<int> next_index{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    for (;;) {
      const int i = next_index.fetch_add(1);
      if (i >= reps) return;
      try {
        results[i] = run_replication(config, weights, i);
      } catch (const NonConvergenceError&) {
        results[i].failed = true;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int thread_count = config.threads;
  if (thread_count == 0) {
    thread_count = std::max(1u, std::thread::hardware_concurrency());
  }
  thread_count = std::min(thread_count, reps);
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  McReport report;
  report.selected_count_per_lag.assign(config.p, 0);
  report.among_first_five_per_lag.assign(config.p, 0);
  report.entry_order_histogram.assign(config.p, {});
  for (const ReplicationResult& r : results) {
    if (r.failed) {
      ++report.failures;
      continue;
    }
    ++report.replications;
    for (int lag : r.support) {
      ++report.selected_count_per_lag[lag - 1];
      if (r.entry_rank[lag - 1] >= 1 && r.entry_rank[lag - 1] <= 5) {
        ++report.among_first_five_per_lag[lag - 1];
      }
    }
    for (int j = 0; j < config.p; ++j) {
      if (r.entry_rank[j] > 0) {
        ++report.entry_order_histogram[j][r.entry_rank[j]];
      }
    }
    report.num_selected.push_back(static_cast<int>(r.support.size()));
    ++report.yw_order_histogram[r.yw_order];
  }

  if (report.failures * 20 > reps) {
    throw std::runtime_error("experiment aborted: " +
                             std::to_string(report.failures) + " of " +
                             std::to_string(reps) +
                             " replications failed to converge");
  }
  report.summary = summarize(report.num_selected);
  return report;
}

ArModel study_model() {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(15);
  phi[0] = 0.2;
  phi[2] = 0.1;
  phi[4] = 0.2;
  phi[9] = 0.3;
  phi[14] = 0.1;
  return ArModel(phi, 0.1);
}

}  // namespace sparsear
