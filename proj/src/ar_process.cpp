#include "sparsear/ar_process.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

namespace sparsear {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

// Effective polynomial degree: trailing zero coefficients carry no roots.
int effective_degree(const Eigen::VectorXd& coefficients) {
  int degree = static_cast<int>(coefficients.size());
  while (degree > 0 && coefficients[degree - 1] == 0.0) --degree;
  return degree;
}

}  // namespace

CausalityCheck check_causality(const Eigen::VectorXd& coefficients) {
  if (coefficients.size() == 0) {
    throw std::invalid_argument("coefficient vector must be nonempty");
  }
  require_finite(coefficients, "coefficients");

  const int degree = effective_degree(coefficients);
  if (degree == 0) {
    return {true, std::numeric_limits<double>::infinity()};
  }

  // Companion matrix of z^d - c1 z^{d-1} - ... - cd, whose eigenvalues are
  // the reciprocals of the roots of 1 - c1 z - ... - cd z^d.  The smallest
  // root modulus is therefore 1 / spectral radius.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  companion.row(0) = coefficients.head(degree).transpose();
  if (degree > 1) {
    companion.block(1, 0, degree - 1, degree - 1) =
        Eigen::MatrixXd::Identity(degree - 1, degree - 1);
  }

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("companion eigenvalue computation failed");
  }
  const double spectral_radius = solver.eigenvalues().cwiseAbs().maxCoeff();
  if (spectral_radius == 0.0) {
    return {true, std::numeric_limits<double>::infinity()};
  }
  const double margin = 1.0 / spectral_radius - 1.0;
  return {margin > 0.0, margin};
}

ArModel::ArModel(Eigen::VectorXd coefficients, double noise_sd)
    : coefficients_(std::move(coefficients)), noise_sd_(noise_sd) {
  if (!(noise_sd_ > 0.0) || !std::isfinite(noise_sd_)) {
    throw std::invalid_argument("noise_sd must be positive and finite");
  }
  const CausalityCheck check = check_causality(coefficients_);
  if (!check.causal) {
    throw std::domain_error("model is not causal: characteristic root on or "
                            "inside the unit circle");
  }
  margin_ = check.margin;
}

namespace {

// Shared recursion psi_k = sum_{j=1}^{min(k,p)} c_j psi_{k-j}, psi_0 = 1.
void extend_psi(const Eigen::VectorXd& coefficients, std::vector<double>& psi,
                std::size_t upto) {
  const int p = static_cast<int>(coefficients.size());
  psi.reserve(upto + 1);
  if (psi.empty()) psi.push_back(1.0);
  for (std::size_t k = psi.size(); k <= upto; ++k) {
    double value = 0.0;
    const int depth = std::min<std::size_t>(k, p);
    for (int j = 1; j <= depth; ++j) {
      value += coefficients[j - 1] * psi[k - j];
    }
    psi.push_back(value);
  }
}

// Estimate of sum_{j > K} |psi_j|: extend the recursion well past K and
// close the remainder with the geometric rate r = 1 / (1 + margin).
double tail_estimate(const ArModel& model, std::vector<double>& psi, int K) {
  const double margin = model.causal_margin();
  if (std::isinf(margin)) {
    // Finite expansion: psi vanishes beyond the model order.
    extend_psi(model.coefficients(), psi, K + model.order() + 1);
    double sum = 0.0;
    for (std::size_t j = K + 1; j < psi.size(); ++j) sum += std::abs(psi[j]);
    return sum;
  }
  const double r = 1.0 / (1.0 + margin);
  // Extend until the geometric closure is negligible next to the partial
  // sum, watching a window of the last `order` terms so an oscillation zero
  // crossing cannot stop the scan early.
  const int window = std::max(model.order(), 1);
  std::size_t j = K + 1;
  double sum = 0.0;
  double closure = std::numeric_limits<double>::infinity();
  const std::size_t cap = static_cast<std::size_t>(K) + 10'000'000;
  while (j + window <= cap) {
    extend_psi(model.coefficients(), psi, j + window - 1);
    double window_max = 0.0;
    double window_sum = 0.0;
    for (int w = 0; w < window; ++w) {
      const double a = std::abs(psi[j + w]);
      window_max = std::max(window_max, a);
      window_sum += a;
    }
    closure = window_max * r / (1.0 - r);
    if (closure <= 1e-15 * (1.0 + sum) || closure < 1e-300) {
      return sum + window_sum + closure;
    }
    sum += window_sum;
    j += window;
  }
  throw std::runtime_error("moving-average tail did not decay within the "
                           "iteration cap");
}

}  // namespace

MaExpansion ma_coefficients(const ArModel& model, int truncation_order) {
  if (truncation_order < 0) {
    throw std::invalid_argument("truncation_order must be >= 0");
  }
  std::vector<double> psi;
  extend_psi(model.coefficients(), psi, truncation_order);

  MaExpansion expansion;
  expansion.truncation_order = truncation_order;
  expansion.psi = Eigen::Map<const Eigen::VectorXd>(psi.data(),
                                                    truncation_order + 1);
  expansion.tail_bound = tail_estimate(model, psi, truncation_order);
  return expansion;
}

AutocovSequence autocovariance(const ArModel& model, int max_lag, double tol) {
  if (max_lag < 0) throw std::invalid_argument("max_lag must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");

  const double sigma2 = model.noise_sd() * model.noise_sd();

  // gamma(h) = sigma^2 sum_j psi_j psi_{j+h}.  Truncating psi at T drops
  // terms bounded by sigma^2 * sup|psi| * tail(T - max_lag), so grow T
  // until that estimate meets tol.
  std::vector<double> psi;
  int T = max_lag + std::max(64, 8 * model.order());
  for (;;) {
    extend_psi(model.coefficients(), psi, T);
    double sup = 0.0;
    for (int j = 0; j <= T; ++j) sup = std::max(sup, std::abs(psi[j]));
    const double tail = tail_estimate(model, psi, T - max_lag);
    if (sigma2 * sup * tail <= tol) break;
    if (T > 50'000'000) {
      throw std::runtime_error("autocovariance truncation did not reach the "
                               "requested tolerance");
    }
    T *= 2;
  }

  AutocovSequence acov;
  acov.gamma.resize(max_lag + 1);
  for (int h = 0; h <= max_lag; ++h) {
    double sum = 0.0;
    for (int j = 0; j + h <= T; ++j) sum += psi[j] * psi[j + h];
    acov.gamma[h] = sigma2 * sum;
  }
  return acov;
}

Eigen::MatrixXd toeplitz_gamma(const AutocovSequence& acov, int p) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (acov.max_lag() < p - 1) {
    throw std::invalid_argument("autocovariance sequence too short for the "
                                "requested dimension");
  }
  Eigen::MatrixXd gamma_p(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      gamma_p(i, j) = acov.gamma[std::abs(i - j)];
    }
  }
  return gamma_p;
}

int default_burn_in(int order) { return 10 * order + 1000; }

TimeSeries simulate(const ArModel& model, int n, int p_presample,
                    int burn_in, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (p_presample < 0) throw std::invalid_argument("p_presample must be >= 0");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be >= 0");

  const int p = model.order();
  const Eigen::VectorXd& phi = model.coefficients();
  const int total = burn_in + p_presample + n;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, model.noise_sd());

  // Recursion from a zero initial state; the first burn_in values are
  // discarded below.
  std::vector<double> x(total);
  for (int t = 0; t < total; ++t) {
    double value = gauss(rng);
    const int depth = std::min(t, p);
    for (int j = 1; j <= depth; ++j) {
      value += phi[j - 1] * x[t - j];
    }
    x[t] = value;
  }

  TimeSeries series;
  series.n = n;
  series.p_presample = p_presample;
  series.seed = seed;
  series.values = Eigen::Map<const Eigen::VectorXd>(x.data() + burn_in,
                                                    p_presample + n);
  return series;
}

TimeSeries simulate(const ArModel& model, int n, int p_presample,
                    std::uint64_t seed) {
  return simulate(model, n, p_presample, default_burn_in(model.order()), seed);
}

}  // namespace sparsear
