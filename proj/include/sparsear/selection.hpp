#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sparsear/lasso.hpp"

namespace sparsear {

enum class CvScheme {
  kRandomFolds,    // rows partitioned uniformly at random (seeded)
  kRollingOrigin,  // contiguous blocks, each predicted from earlier rows only
};

enum class CvChoiceRule {
  kMinimum,           // argmin of cv_mean, ties toward the larger lambda
  kOneStandardError,  // largest lambda with cv_mean within one SE of the min
};

struct CvResult {
  Eigen::VectorXd lambda_grid;
  Eigen::VectorXd cv_mean;  // mean held-out squared prediction error
  Eigen::VectorXd cv_se;    // standard error of the fold means
  double chosen_lambda = 0.0;
  int fold_count = 0;
  std::uint64_t seed = 0;
};

// K-fold cross-validation of the penalized fit over a strictly decreasing
// lambda grid.  Under the default rule chosen_lambda minimizes cv_mean,
// ties resolved toward the larger lambda; the one-standard-error rule picks
// the largest lambda whose cv_mean stays within one standard error of that
// minimum.  Requires 2 <= folds <= n.
CvResult cross_validate(const LagDesign& design,
                        const Eigen::VectorXd& weights,
                        const Eigen::VectorXd& grid, int folds,
                        std::uint64_t seed,
                        CvScheme scheme = CvScheme::kRandomFolds,
                        CvChoiceRule rule = CvChoiceRule::kMinimum,
                        double tol = 1e-8, int max_iter = 100000);

// Support (1-based lags) at the path knot nearest to chosen_lambda in
// log-lambda distance, ties resolved toward the larger lambda.
std::vector<int> selected_support(const SolutionPath& path,
                                  double chosen_lambda);

// Yule-Walker fits of every order 1..max_order via the Levinson-Durbin
// recursion on sample autocovariances, with AIC order selection.
struct YwFit {
  std::vector<Eigen::VectorXd> coefficients_by_order;
  Eigen::VectorXd aic;                  // aic[k-1] for order k
  Eigen::VectorXd innovation_variance;  // sigma^2 estimate per order
  Eigen::VectorXd reflection;           // partial autocorrelations, |.| <= 1
  int chosen_order = 0;                 // argmin aic, ties to smaller order
};

YwFit yule_walker(const TimeSeries& series, int max_order);

}  // namespace sparsear
