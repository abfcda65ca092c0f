#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "sparsear/design.hpp"

namespace sparsear {

// Penalty lambda_n * sum_j weights[j] * |phi_j|.  lambda_n >= 0 and all
// weights finite and >= 0; weights.size() must match the design dimension.
struct PenaltyConfig {
  double lambda_n = 0.0;
  Eigen::VectorXd weights;
};

// (1/2n) * ||y - X phi||^2 + lambda_n * sum_j weights[j] * |phi_j|.
double objective(const Eigen::VectorXd& phi, const LagDesign& design,
                 const PenaltyConfig& penalty);

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

struct LassoFit {
  Eigen::VectorXd coefficients;
  std::vector<int> support;  // 1-based lag indices of nonzero coefficients
  Eigen::VectorXi signs;     // sign(coefficients), entries in {-1, 0, 1}
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;  // completed coordinate-descent sweeps
  double lambda_n = 0.0;
};

// Thrown when coordinate descent exhausts max_iter sweeps; carries the best
// iterate seen so far together with its kkt_residual.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(std::string message, LassoFit best_iterate,
                      int grid_index = -1);

  const LassoFit& best() const { return best_; }
  int grid_index() const { return grid_index_; }

 private:
  LassoFit best_;
  int grid_index_;
};

// Quadratic form of the penalized least-squares problem, precomputed once so
// repeated fits on the same design (solution paths, cross-validation) reuse
// the Gram matrix.
class CdProblem {
 public:
  explicit CdProblem(const LagDesign& design);
  CdProblem(Eigen::MatrixXd gram, Eigen::VectorXd xty_over_n,
            double yty_over_n, int n);

  // Cyclic coordinate descent from `start`.  Converged when the largest
  // coefficient change over a sweep and the KKT residual both fall below
  // tol; otherwise throws NonConvergenceError after max_iter sweeps.
  LassoFit solve(const PenaltyConfig& penalty, const Eigen::VectorXd& start,
                 double tol, int max_iter) const;

  double lambda_max(const Eigen::VectorXd& weights) const;
  double objective_at(const Eigen::VectorXd& phi,
                      const PenaltyConfig& penalty) const;

  int dimension() const { return p_; }

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd xty_;  // X'y / n
  double yty_ = 0.0;     // y'y / n
  int n_ = 0;
  int p_ = 0;
};

LassoFit fit(const LagDesign& design, const PenaltyConfig& penalty,
             double tol = 1e-8, int max_iter = 100000);

// Smallest lambda_n for which the all-zero vector is optimal,
// max_j |X_j'y / n| / weights[j] over strictly positive weights.  A zero
// weight paired with a correlated column makes the path unbounded and is
// rejected.
double lambda_max(const LagDesign& design, const Eigen::VectorXd& weights);

struct PathKnot {
  double lambda = 0.0;
  Eigen::VectorXd coefficients;
};

struct PathEvent {
  int lag = 0;  // 1-based
  double lambda = 0.0;
};

// Coefficient profiles on a geometric grid from lambda_max down to
// lambda_max * lambda_min_ratio, fitted with warm starts.  entry_events
// records the first knot at which each lag becomes active, in activation
// order (ties broken by smaller lag); exit_events records deactivations.
struct SolutionPath {
  std::vector<PathKnot> knots;
  std::vector<PathEvent> entry_events;
  std::vector<PathEvent> exit_events;
};

SolutionPath solution_path(const LagDesign& design,
                           const Eigen::VectorXd& weights,
                           int grid_size = 100,
                           double lambda_min_ratio = 1e-3,
                           double tol = 1e-8, int max_iter = 100000);

// Subgradient optimality residual of phi, recomputed directly from X and y
// so it can certify solver output independently.  For active coordinates
// this is the absolute stationarity defect, for inactive ones the amount by
// which the gradient exceeds the penalty level.
double kkt_residual(const LagDesign& design, const PenaltyConfig& penalty,
                    const Eigen::VectorXd& phi);

// Geometric ladder w_j = base^(j-1), j = 1..p: nondecreasing weights that
// penalize longer lags more strongly (base >= 1).
Eigen::VectorXd monotone_weight_ladder(int p, double base);

}  // namespace sparsear
