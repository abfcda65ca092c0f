#pragma once

#include <Eigen/Dense>

#include "sparsear/ar_process.hpp"

namespace sparsear {

// Lagged regression view of a series: y(t) is regressed on the p previous
// values, X(t, j-1) = series value at time t - j for t = 1..n, j = 1..p.
struct LagDesign {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  int n = 0;
  int p = 0;
};

// Builds the design using pre-sample values for the first rows; requires
// series.p_presample >= p so every response keeps its full lag window.
LagDesign build_design(const TimeSeries& series, int p);

// Builds the design from the observed values alone by dropping the first p
// responses.  Intended for series without pre-sample data.
LagDesign build_design_trimmed(const TimeSeries& series, int p);

// Sample second-moment matrix X'X / n.
Eigen::MatrixXd gram(const LagDesign& design);

// Distance between the sample Gram matrix and a target covariance matrix.
struct GramDeviation {
  double frobenius = 0.0;
  double max_abs = 0.0;
};

GramDeviation gram_deviation(const LagDesign& design,
                             const Eigen::MatrixXd& gamma_p);

}  // namespace sparsear
