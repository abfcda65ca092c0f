#include "sparsear/design.hpp"

#include <cmath>
#include <stdexcept>

namespace sparsear {

namespace {

// Rows are responses v[first_response + t], t = 0..rows-1; column j-1 holds
// the value j steps earlier.
LagDesign assemble(const Eigen::VectorXd& values, int first_response,
                   int rows, int p) {
  LagDesign design;
  design.n = rows;
  design.p = p;
  design.y = values.segment(first_response, rows);
  design.X.resize(rows, p);
  for (int t = 0; t < rows; ++t) {
    for (int j = 1; j <= p; ++j) {
      design.X(t, j - 1) = values[first_response + t - j];
    }
  }
  return design;
}

}  // namespace

LagDesign build_design(const TimeSeries& series, int p) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (series.n < 1) throw std::invalid_argument("series has no observations");
  if (series.values.size() != series.n + series.p_presample) {
    throw std::invalid_argument("series length does not match n + p_presample");
  }
  if (series.p_presample < p) {
    throw std::invalid_argument("p_presample must be >= p; use the trimmed "
                                "builder for series without pre-sample data");
  }
  return assemble(series.values, series.p_presample, series.n, p);
}

LagDesign build_design_trimmed(const TimeSeries& series, int p) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  const int total = static_cast<int>(series.values.size());
  if (total != series.n + series.p_presample) {
    throw std::invalid_argument("series length does not match n + p_presample");
  }
  if (total - p < 1) {
    throw std::invalid_argument("series too short to drop the first p "
                                "responses");
  }
  return assemble(series.values, p, total - p, p);
}

Eigen::MatrixXd gram(const LagDesign& design) {
  if (design.X.rows() != design.n || design.X.cols() != design.p ||
      design.y.size() != design.n || design.n < 1) {
    throw std::invalid_argument("malformed design");
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(design.p, design.p);
  g.selfadjointView<Eigen::Lower>().rankUpdate(design.X.transpose(),
                                               1.0 / design.n);
  g.triangularView<Eigen::StrictlyUpper>() =
      g.triangularView<Eigen::StrictlyLower>().transpose();
  return g;
}

GramDeviation gram_deviation(const LagDesign& design,
                             const Eigen::MatrixXd& gamma_p) {
  if (gamma_p.rows() != design.p || gamma_p.cols() != design.p) {
    throw std::invalid_argument("gamma_p dimension does not match the design");
  }
  const Eigen::MatrixXd diff = gram(design) - gamma_p;
  return {diff.norm(), diff.cwiseAbs().maxCoeff()};
}

}  // namespace sparsear
