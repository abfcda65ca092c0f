#include "sparsear/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sparsear {

namespace {

void validate_grid(const Eigen::VectorXd& grid) {
  if (grid.size() < 1) throw std::invalid_argument("lambda grid is empty");
  if (!grid.allFinite() || (grid.array() < 0.0).any()) {
    throw std::invalid_argument("lambda grid must be finite and >= 0");
  }
  for (int i = 1; i < grid.size(); ++i) {
    if (!(grid[i] < grid[i - 1])) {
      throw std::invalid_argument("lambda grid must be strictly decreasing");
    }
  }
}

// Fold assignment per row.  Random folds shuffle the row indices and deal
// them into folds of near-equal size; rolling origin reserves the first
// segment as the minimal training window and tests each later segment.
std::vector<std::vector<int>> fold_rows(int n, int folds, CvScheme scheme,
                                        std::uint64_t seed) {
  std::vector<std::vector<int>> assignment(folds);
  if (scheme == CvScheme::kRandomFolds) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    int next = 0;
    for (int k = 0; k < folds; ++k) {
      const int size = n / folds + (k < n % folds ? 1 : 0);
      assignment[k].assign(perm.begin() + next, perm.begin() + next + size);
      std::sort(assignment[k].begin(), assignment[k].end());
      next += size;
    }
  } else {
    const int segments = folds + 1;
    int start = n / segments + (0 < n % segments ? 1 : 0);
    for (int k = 0; k < folds; ++k) {
      const int size = n / segments + (k + 1 < n % segments ? 1 : 0);
      assignment[k].resize(size);
      std::iota(assignment[k].begin(), assignment[k].end(), start);
      start += size;
    }
  }
  return assignment;
}

}  // namespace

CvResult cross_validate(const LagDesign& design,
                        const Eigen::VectorXd& weights,
                        const Eigen::VectorXd& grid, int folds,
                        std::uint64_t seed, CvScheme scheme, CvChoiceRule rule,
                        double tol, int max_iter) {
  validate_grid(grid);
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (design.n < folds) throw std::invalid_argument("n must be >= folds");
  if (weights.size() != design.p) {
    throw std::invalid_argument("weights size does not match the design "
                                "dimension");
  }

  const int n = design.n;
  const int p = design.p;
  const int num_lambda = static_cast<int>(grid.size());
  const auto assignment = fold_rows(n, folds, scheme, seed);

  // Raw sums over all rows; per-fold training sums follow by subtracting
  // the held-out rows.
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  xtx.selfadjointView<Eigen::Lower>().rankUpdate(design.X.transpose());
  xtx.triangularView<Eigen::StrictlyUpper>() =
      xtx.triangularView<Eigen::StrictlyLower>().transpose();
  const Eigen::VectorXd xty = design.X.transpose() * design.y;
  const double yty = design.y.squaredNorm();

  Eigen::MatrixXd fold_mse(folds, num_lambda);
  for (int k = 0; k < folds; ++k) {
    const auto& rows = assignment[k];
    if (rows.empty()) {
      throw std::invalid_argument("n too small: a fold received no rows");
    }
    const int n_test = static_cast<int>(rows.size());
    int n_train = 0;
    Eigen::MatrixXd xtx_tr;
    Eigen::VectorXd xty_tr;
    double yty_tr = 0.0;
    if (scheme == CvScheme::kRandomFolds) {
      Eigen::MatrixXd x_test(n_test, p);
      Eigen::VectorXd y_test(n_test);
      for (int i = 0; i < n_test; ++i) {
        x_test.row(i) = design.X.row(rows[i]);
        y_test[i] = design.y[rows[i]];
      }
      xtx_tr = xtx - x_test.transpose() * x_test;
      xty_tr = xty - x_test.transpose() * y_test;
      yty_tr = yty - y_test.squaredNorm();
      n_train = n - n_test;
    } else {
      // Rolling origin: train strictly on rows before the test block.
      n_train = rows.front();
      const auto x_train = design.X.topRows(n_train);
      const auto y_train = design.y.head(n_train);
      xtx_tr = x_train.transpose() * x_train;
      xty_tr = x_train.transpose() * y_train;
      yty_tr = y_train.squaredNorm();
    }
    if (n_train < 1) throw std::invalid_argument("empty training fold");

    CdProblem problem(xtx_tr / n_train, xty_tr / n_train, yty_tr / n_train,
                      n_train);
    Eigen::VectorXd start = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < num_lambda; ++i) {
      PenaltyConfig penalty{grid[i], weights};
      const LassoFit fold_fit = problem.solve(penalty, start, tol, max_iter);
      start = fold_fit.coefficients;
      double sse = 0.0;
      for (int r : rows) {
        const double err = design.y[r] - design.X.row(r).dot(start);
        sse += err * err;
      }
      fold_mse(k, i) = sse / n_test;
    }
  }

  CvResult result;
  result.lambda_grid = grid;
  result.fold_count = folds;
  result.seed = seed;
  result.cv_mean = fold_mse.colwise().mean();
  result.cv_se.resize(num_lambda);
  for (int i = 0; i < num_lambda; ++i) {
    const double mean = result.cv_mean[i];
    const double ss = (fold_mse.col(i).array() - mean).square().sum();
    result.cv_se[i] = std::sqrt(ss / (folds - 1)) / std::sqrt(folds);
  }

  // Argmin with ties toward the larger lambda: the grid is decreasing, so a
  // strict improvement rule keeps the earliest (largest) minimizer.
  int best = 0;
  for (int i = 1; i < num_lambda; ++i) {
    if (result.cv_mean[i] < result.cv_mean[best]) best = i;
  }
  if (rule == CvChoiceRule::kOneStandardError) {
    const double threshold = result.cv_mean[best] + result.cv_se[best];
    for (int i = 0; i < num_lambda; ++i) {
      if (result.cv_mean[i] <= threshold) {
        best = i;
        break;
      }
    }
  }
  result.chosen_lambda = grid[best];
  return result;
}

std::vector<int> selected_support(const SolutionPath& path,
                                  double chosen_lambda) {
  if (path.knots.empty()) throw std::invalid_argument("empty solution path");
  if (!(chosen_lambda > 0.0) || !std::isfinite(chosen_lambda)) {
    throw std::invalid_argument("chosen_lambda must be positive and finite");
  }
  const double target = std::log(chosen_lambda);
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.knots.size(); ++i) {
    const double lam = path.knots[i].lambda;
    const double dist =
        lam > 0.0 ? std::abs(std::log(lam) - target)
                  : std::numeric_limits<double>::infinity();
    // Knots run from large to small lambda; strict improvement keeps the
    // larger lambda on ties.
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(i);
    }
  }
  std::vector<int> support;
  const Eigen::VectorXd& coef = path.knots[best].coefficients;
  for (int j = 0; j < coef.size(); ++j) {
    if (coef[j] != 0.0) support.push_back(j + 1);
  }
  return support;
}

YwFit yule_walker(const TimeSeries& series, int max_order) {
  if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");
  const int n = series.n;
  if (n < max_order + 1) {
    throw std::invalid_argument("series too short for the requested "
                                "max_order");
  }
  const Eigen::VectorXd x = series.values.tail(n);

  // Biased sample autocovariances of the observed segment.
  Eigen::VectorXd acov(max_order + 1);
  for (int h = 0; h <= max_order; ++h) {
    double sum = 0.0;
    for (int t = 0; t + h < n; ++t) sum += x[t] * x[t + h];
    acov[h] = sum / n;
  }
  if (!(acov[0] > 0.0)) {
    throw std::domain_error("degenerate series: zero sample variance");
  }

  YwFit yw;
  yw.coefficients_by_order.resize(max_order);
  yw.aic.resize(max_order);
  yw.innovation_variance.resize(max_order);
  yw.reflection.resize(max_order);

  // Levinson-Durbin recursion on the Toeplitz system.
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(max_order);
  Eigen::VectorXd prev = phi;
  double sigma2 = acov[0];
  for (int k = 1; k <= max_order; ++k) {
    double acc = acov[k];
    for (int j = 1; j < k; ++j) acc -= prev[j - 1] * acov[k - j];
    if (!(sigma2 > 0.0)) {
      throw std::domain_error("degenerate series: innovation variance "
                              "collapsed during the recursion");
    }
    const double reflection = acc / sigma2;
    phi[k - 1] = reflection;
    for (int j = 1; j < k; ++j) {
      phi[j - 1] = prev[j - 1] - reflection * prev[k - j - 1];
    }
    sigma2 *= (1.0 - reflection * reflection);

    yw.reflection[k - 1] = reflection;
    yw.innovation_variance[k - 1] = sigma2;
    yw.coefficients_by_order[k - 1] = phi.head(k);
    yw.aic[k - 1] = n * std::log(sigma2) + 2.0 * k;
    prev = phi;
  }

  int best = 0;
  for (int k = 1; k < max_order; ++k) {
    if (yw.aic[k] < yw.aic[best]) best = k;  // ties keep the smaller order
  }
  yw.chosen_order = best + 1;
  return yw;
}

}  // namespace sparsear
