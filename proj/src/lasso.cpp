#include "sparsear/lasso.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace sparsear {

namespace {

void validate_design(const LagDesign& design) {
  if (design.n < 1 || design.p < 1 || design.X.rows() != design.n ||
      design.X.cols() != design.p || design.y.size() != design.n) {
    throw std::invalid_argument("malformed design");
  }
}

void validate_penalty(const PenaltyConfig& penalty, int p) {
  if (!(penalty.lambda_n >= 0.0) || !std::isfinite(penalty.lambda_n)) {
    throw std::invalid_argument("lambda_n must be finite and >= 0");
  }
  if (penalty.weights.size() != p) {
    throw std::invalid_argument("weights size does not match the design "
                                "dimension");
  }
  if (!penalty.weights.allFinite() || (penalty.weights.array() < 0.0).any()) {
    throw std::invalid_argument("weights must be finite and >= 0");
  }
}

std::vector<int> support_of(const Eigen::VectorXd& phi) {
  std::vector<int> support;
  for (int j = 0; j < phi.size(); ++j) {
    if (phi[j] != 0.0) support.push_back(j + 1);
  }
  return support;
}

Eigen::VectorXi signs_of(const Eigen::VectorXd& phi) {
  Eigen::VectorXi signs(phi.size());
  for (int j = 0; j < phi.size(); ++j) {
    signs[j] = phi[j] > 0.0 ? 1 : (phi[j] < 0.0 ? -1 : 0);
  }
  return signs;
}

}  // namespace

double objective(const Eigen::VectorXd& phi, const LagDesign& design,
                 const PenaltyConfig& penalty) {
  validate_design(design);
  validate_penalty(penalty, design.p);
  if (phi.size() != design.p) {
    throw std::invalid_argument("phi size does not match the design");
  }
  const double rss = (design.y - design.X * phi).squaredNorm();
  const double pen = penalty.weights.dot(phi.cwiseAbs());
  return rss / (2.0 * design.n) + penalty.lambda_n * pen;
}

NonConvergenceError::NonConvergenceError(std::string message,
                                         LassoFit best_iterate,
                                         int grid_index)
    : std::runtime_error(std::move(message)),
      best_(std::move(best_iterate)),
      grid_index_(grid_index) {}

CdProblem::CdProblem(const LagDesign& design) {
  validate_design(design);
  n_ = design.n;
  p_ = design.p;
  gram_ = Eigen::MatrixXd::Zero(p_, p_);
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(design.X.transpose(),
                                                   1.0 / n_);
  gram_.triangularView<Eigen::StrictlyUpper>() =
      gram_.triangularView<Eigen::StrictlyLower>().transpose();
  xty_ = design.X.transpose() * design.y / n_;
  yty_ = design.y.squaredNorm() / n_;
}

CdProblem::CdProblem(Eigen::MatrixXd gram, Eigen::VectorXd xty_over_n,
                     double yty_over_n, int n)
    : gram_(std::move(gram)),
      xty_(std::move(xty_over_n)),
      yty_(yty_over_n),
      n_(n),
      p_(static_cast<int>(xty_.size())) {
  if (n_ < 1 || p_ < 1 || gram_.rows() != p_ || gram_.cols() != p_) {
    throw std::invalid_argument("malformed quadratic form");
  }
}

double CdProblem::objective_at(const Eigen::VectorXd& phi,
                               const PenaltyConfig& penalty) const {
  const double quad = 0.5 * yty_ - xty_.dot(phi) +
                      0.5 * phi.dot(gram_.selfadjointView<Eigen::Lower>() * phi);
  return quad + penalty.lambda_n * penalty.weights.dot(phi.cwiseAbs());
}

double CdProblem::lambda_max(const Eigen::VectorXd& weights) const {
  if (weights.size() != p_) {
    throw std::invalid_argument("weights size does not match the design "
                                "dimension");
  }
  double lmax = 0.0;
  for (int j = 0; j < p_; ++j) {
    const double w = weights[j];
    if (w == 0.0) {
      if (xty_[j] != 0.0) {
        throw std::domain_error("unbounded path: zero weight on a column "
                                "correlated with the response");
      }
      continue;
    }
    lmax = std::max(lmax, std::abs(xty_[j]) / w);
  }
  return lmax;
}

LassoFit CdProblem::solve(const PenaltyConfig& penalty,
                          const Eigen::VectorXd& start, double tol,
                          int max_iter) const {
  validate_penalty(penalty, p_);
  if (start.size() != p_) {
    throw std::invalid_argument("start size does not match the design "
                                "dimension");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  const double lambda = penalty.lambda_n;
  const Eigen::VectorXd& w = penalty.weights;
  Eigen::VectorXd phi = start;
  // u = Gram * phi, maintained incrementally and refreshed before every KKT
  // evaluation so rounding drift cannot certify a stale iterate.
  Eigen::VectorXd u = gram_.selfadjointView<Eigen::Lower>() * phi;

  // KKT residual on the current phi given a fresh u; for active coordinates
  // the stationarity defect, for inactive ones the excess of the gradient
  // over the penalty level.
  const auto kkt_of = [&](const Eigen::VectorXd& fresh_u) {
    double worst = 0.0;
    for (int j = 0; j < p_; ++j) {
      const double grad = fresh_u[j] - xty_[j];
      const double level = lambda * w[j];
      double violation;
      if (phi[j] > 0.0) {
        violation = std::abs(grad + level);
      } else if (phi[j] < 0.0) {
        violation = std::abs(grad - level);
      } else {
        violation = std::max(0.0, std::abs(grad) - level);
      }
      worst = std::max(worst, violation);
    }
    return worst;
  };

  int sweeps = 0;
  double best_kkt = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_phi = phi;

  while (sweeps < max_iter) {
    double max_change = 0.0;
    for (int j = 0; j < p_; ++j) {
      const double diag = gram_(j, j);
      const double old = phi[j];
      double updated;
      if (diag <= 0.0) {
        updated = 0.0;  // degenerate column: only the penalty acts
      } else {
        const double z = xty_[j] - u[j] + diag * old;
        updated = soft_threshold(z, lambda * w[j]) / diag;
      }
      if (updated != old) {
        u += gram_.col(j) * (updated - old);
        phi[j] = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    ++sweeps;

    if (max_change < tol || sweeps % 100 == 0 || sweeps == max_iter) {
      u = gram_.selfadjointView<Eigen::Lower>() * phi;
      const double kkt = kkt_of(u);
      if (kkt < best_kkt) {
        best_kkt = kkt;
        best_phi = phi;
      }
      if (max_change < tol && kkt < tol) {
        LassoFit fit;
        fit.coefficients = phi;
        fit.support = support_of(phi);
        fit.signs = signs_of(phi);
        fit.objective = objective_at(phi, penalty);
        fit.kkt_residual = kkt;
        fit.iterations = sweeps;
        fit.lambda_n = lambda;
        return fit;
      }
    }
  }

  LassoFit best;
  best.coefficients = best_phi;
  best.support = support_of(best_phi);
  best.signs = signs_of(best_phi);
  best.objective = objective_at(best_phi, penalty);
  best.kkt_residual = best_kkt;
  best.iterations = sweeps;
  best.lambda_n = lambda;
  throw NonConvergenceError("coordinate descent did not converge within " +
                                std::to_string(max_iter) + " sweeps",
                            std::move(best));
}

LassoFit fit(const LagDesign& design, const PenaltyConfig& penalty,
             double tol, int max_iter) {
  CdProblem problem(design);
  return problem.solve(penalty, Eigen::VectorXd::Zero(design.p), tol,
                       max_iter);
}

double lambda_max(const LagDesign& design, const Eigen::VectorXd& weights) {
  return CdProblem(design).lambda_max(weights);
}

SolutionPath solution_path(const LagDesign& design,
                           const Eigen::VectorXd& weights, int grid_size,
                           double lambda_min_ratio, double tol,
                           int max_iter) {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
  if (!(lambda_min_ratio > 0.0) || !(lambda_min_ratio < 1.0)) {
    throw std::invalid_argument("lambda_min_ratio must lie in (0, 1)");
  }
  CdProblem problem(design);
  const double lmax = problem.lambda_max(weights);

  SolutionPath path;
  path.knots.reserve(grid_size);
  std::vector<bool> entered(design.p, false);
  std::vector<bool> was_active(design.p, false);

  Eigen::VectorXd start = Eigen::VectorXd::Zero(design.p);
  for (int i = 0; i < grid_size; ++i) {
    const double t = static_cast<double>(i) / (grid_size - 1);
    PenaltyConfig penalty{lmax * std::pow(lambda_min_ratio, t), weights};
    LassoFit knot_fit;
    try {
      knot_fit = problem.solve(penalty, start, tol, max_iter);
    } catch (const NonConvergenceError& err) {
      throw NonConvergenceError(std::string(err.what()) + " at grid index " +
                                    std::to_string(i),
                                err.best(), i);
    }
    start = knot_fit.coefficients;

    for (int j = 0; j < design.p; ++j) {
      const bool active = knot_fit.coefficients[j] != 0.0;
      if (active && !entered[j]) {
        entered[j] = true;
        path.entry_events.push_back({j + 1, penalty.lambda_n});
      }
      if (!active && was_active[j]) {
        path.exit_events.push_back({j + 1, penalty.lambda_n});
      }
      was_active[j] = active;
    }
    path.knots.push_back({penalty.lambda_n, std::move(knot_fit.coefficients)});
  }
  return path;
}

double kkt_residual(const LagDesign& design, const PenaltyConfig& penalty,
                    const Eigen::VectorXd& phi) {
  validate_design(design);
  validate_penalty(penalty, design.p);
  if (phi.size() != design.p) {
    throw std::invalid_argument("phi size does not match the design");
  }
  // Straight-line gradient X'(X phi - y) / n, independent of any cached
  // quadratic form.
  const Eigen::VectorXd residual = design.X * phi - design.y;
  const Eigen::VectorXd grad = design.X.transpose() * residual / design.n;
  double worst = 0.0;
  for (int j = 0; j < design.p; ++j) {
    const double level = penalty.lambda_n * penalty.weights[j];
    double violation;
    if (phi[j] > 0.0) {
      violation = std::abs(grad[j] + level);
    } else if (phi[j] < 0.0) {
      violation = std::abs(grad[j] - level);
    } else {
      violation = std::max(0.0, std::abs(grad[j]) - level);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

Eigen::VectorXd monotone_weight_ladder(int p, double base) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (!(base >= 1.0)) throw std::invalid_argument("base must be >= 1");
  Eigen::VectorXd weights(p);
  double w = 1.0;
  for (int j = 0; j < p; ++j) {
    weights[j] = w;
    w *= base;
  }
  return weights;
}

}  // namespace sparsear
