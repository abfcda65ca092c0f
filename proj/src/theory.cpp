#include "sparsear/theory.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace sparsear {

namespace {

void require_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument(std::string(what) + " must be square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument(std::string(what) + " must be symmetric");
  }
}

// Spectral norm of the inverse of a positive-definite matrix via inverse
// iteration: repeated solves converge to the dominant eigenvector of the
// inverse, i.e. the eigenvector of the smallest eigenvalue.
double inverse_spectral_norm(const Eigen::LLT<Eigen::MatrixXd>& llt, int dim) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(dim);
  x[0] += 0.5;  // deterministic start off any symmetry axis
  x.normalize();
  double value = 0.0;
  for (int it = 0; it < 10000; ++it) {
    const Eigen::VectorXd z = llt.solve(x);
    const double norm = z.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::domain_error("inverse iteration broke down: matrix is "
                              "numerically singular");
    }
    const double previous = value;
    value = norm;  // Rayleigh estimate of the largest inverse eigenvalue
    x = z / norm;
    if (it > 0 && std::abs(value - previous) <= 1e-13 * value) break;
  }
  return value;
}

}  // namespace

SignConditionReport sign_conditions(const Eigen::MatrixXd& gamma_p,
                                    const Eigen::VectorXd& phi_star,
                                    const PenaltyConfig& penalty, int n) {
  require_symmetric(gamma_p, "gamma_p");
  const int p = static_cast<int>(gamma_p.rows());
  if (phi_star.size() != p) {
    throw std::invalid_argument("phi_star size does not match gamma_p");
  }
  if (penalty.weights.size() != p) {
    throw std::invalid_argument("weights size does not match gamma_p");
  }
  if (n < 1) throw std::invalid_argument("n must be >= 1");

  std::vector<int> s_idx;
  std::vector<int> c_idx;
  for (int j = 0; j < p; ++j) {
    (phi_star[j] != 0.0 ? s_idx : c_idx).push_back(j);
  }

  SignConditionReport report;
  report.s = static_cast<int>(s_idx.size());
  report.nu = static_cast<int>(c_idx.size());
  const int s = report.s;
  const int nu = report.nu;

  if (s > 0) {
    Eigen::MatrixXd gamma_ss(s, s);
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        gamma_ss(a, b) = gamma_p(s_idx[a], s_idx[b]);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gamma_ss);
    if (llt.info() != Eigen::Success) {
      throw std::domain_error("gamma_SS is not positive definite");
    }

    report.c_max = inverse_spectral_norm(llt, s);

    const Eigen::MatrixXd inverse =
        llt.solve(Eigen::MatrixXd::Identity(s, s));
    report.c_max_inf = inverse.cwiseAbs().rowwise().sum().maxCoeff();

    double min_signal = std::numeric_limits<double>::infinity();
    for (int a : s_idx) min_signal = std::min(min_signal, std::abs(phi_star[a]));
    report.min_signal = min_signal;

    double max_w_s = 0.0;
    for (int a : s_idx) max_w_s = std::max(max_w_s, penalty.weights[a]);
    report.cond2_value =
        (std::sqrt(static_cast<double>(s) / n) + penalty.lambda_n * max_w_s) /
        min_signal;

    if (nu > 0) {
      Eigen::MatrixXd gamma_sc(s, nu);
      for (int a = 0; a < s; ++a) {
        for (int b = 0; b < nu; ++b) {
          gamma_sc(a, b) = gamma_p(s_idx[a], c_idx[b]);
        }
      }
      // Rows of Gamma_{S^c S} inv(Gamma_SS) are columns of the solve.
      const Eigen::MatrixXd solved = llt.solve(gamma_sc);
      report.incoherence = solved.cwiseAbs().colwise().sum().maxCoeff();
      report.epsilon = 1.0 - *report.incoherence;
    }
  }

  if (nu > 0) {
    double min_w_c = std::numeric_limits<double>::infinity();
    for (int b : c_idx) min_w_c = std::min(min_w_c, penalty.weights[b]);
    if (s > 0) {
      double max_w_s = 0.0;
      for (int a : s_idx) max_w_s = std::max(max_w_s, penalty.weights[a]);
      report.cond1_ratio = max_w_s / min_w_c;
    }
    report.cond3_value = n * penalty.lambda_n * penalty.lambda_n * min_w_c *
                         min_w_c / std::max(s, nu);
  }
  return report;
}

double estimation_rate(int n, int p, double lambda_n, double weights_s_norm) {
  if (n < 1 || p < 1) throw std::invalid_argument("n and p must be >= 1");
  if (!(lambda_n >= 0.0) || !(weights_s_norm >= 0.0)) {
    throw std::invalid_argument("lambda_n and weights_s_norm must be >= 0");
  }
  return std::sqrt(static_cast<double>(p)) *
         (1.0 / std::sqrt(static_cast<double>(n)) +
          lambda_n * weights_s_norm);
}

double kappa_p(const Eigen::MatrixXd& gamma_p, double tol) {
  require_symmetric(gamma_p, "gamma_p");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const Eigen::VectorXd diag = gamma_p.diagonal();
  if ((diag.array() <= 0.0).any()) {
    throw std::domain_error("gamma_p must have a positive diagonal");
  }

  // Square-root-free Cholesky feasibility of gamma_p - kappa * diag.
  const auto feasible = [&](double kappa) {
    Eigen::MatrixXd shifted = gamma_p;
    shifted.diagonal() -= kappa * diag;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd d = ldlt.vectorD();
    const double floor = -1e-12 * std::max(1.0, diag.maxCoeff());
    return (d.array() >= floor).all();
  };

  if (!feasible(0.0)) {
    throw std::domain_error("gamma_p is not positive semidefinite");
  }
  // The normalized matrix has mean eigenvalue 1, so kappa <= 1 always;
  // feasibility at 1 forces equality with the diagonal matrix.
  if (feasible(1.0)) return 1.0;

  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double mixing_bound(double rho, double l, double L, int m) {
  if (!(rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (!(l > 0.0) || !(L >= l)) {
    throw std::invalid_argument("need 0 < l <= L");
  }
  if (m < 0) throw std::invalid_argument("m must be >= 0");
  const double factor = L * rho / (l * (rho - 1.0));
  return 2.0 * factor * factor * std::pow(rho, -m);
}

PredictionConstants::PredictionConstants(double rho_in, double l_in,
                                         double L_in, double m_bound_in,
                                         double kappa_in)
    : rho(rho_in), l(l_in), L(L_in), m_bound(m_bound_in), kappa(kappa_in) {
  if (!(rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (!(l > 0.0) || !(L >= l)) {
    throw std::invalid_argument("need 0 < l <= L");
  }
  if (!(m_bound > 0.0)) throw std::invalid_argument("m_bound must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");

  beta1 = 1.0 + 1.0 / std::log(rho);
  beta2 = 1.0 + L * rho / (l * (rho - 1.0));
  c1 = 1024.0 * 144.0;
  c2 = 1.0 / (8.0 * 144.0);
  big_d = std::pow(c1 * c1 * c1 * c2 * beta1 * beta1 * beta2 * beta2 * beta2,
                   0.2);
  f1 = std::min({std::pow(c2 / beta1, 0.25) / 4.0, 1.0 / 512.0, 0.125});
  f2 = 1.0 / (4.0 * c1 * beta1 * beta2);
}

double pi_bound(std::int64_t n, int p, int s, double lambda_n,
                double lambda_min_w, double lambda_max_w, double sigma,
                double c, double y, const PredictionConstants& consts) {
  if (n < 1 || p < 1) throw std::invalid_argument("n and p must be >= 1");
  if (s < 0 || s > p) throw std::invalid_argument("s must lie in [0, p]");
  if (!(lambda_n >= 0.0)) throw std::invalid_argument("lambda_n must be >= 0");
  if (!(lambda_min_w >= 0.0) || !(lambda_max_w >= lambda_min_w)) {
    throw std::invalid_argument("need 0 <= lambda_min_w <= lambda_max_w");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  const double nd = static_cast<double>(n);
  const double threshold = sigma * sigma * (nd + consts.big_d * std::pow(nd, 0.6));
  if (!(y > threshold)) {
    throw std::domain_error("y must exceed sigma^2 (n + D n^{3/5}) = " +
                            std::to_string(threshold));
  }

  const double inv_sigma2 = 1.0 / (sigma * sigma);
  const double term_a = std::cbrt(inv_sigma2 * y - nd);
  const double term_b = c * c * inv_sigma2;
  const double term_c = nd * nd * lambda_n * lambda_n * lambda_min_w *
                        lambda_min_w /
                        (y + c * nd * lambda_n * lambda_max_w / 2.0);
  const double exponent1 = consts.f1 * std::min({term_a, term_b, term_c});
  const double exponent2 =
      consts.f2 * nd * lambda_n * lambda_n * s / (static_cast<double>(p) * p);
  return 6.0 * p * std::exp(-exponent1) +
         static_cast<double>(p) * p * std::exp(-exponent2);
}

double corollary_bound(std::int64_t n, int p, int s, double alpha,
                       double lambda_min_w, double lambda_max_w, double f) {
  if (n < 1 || p < 1) throw std::invalid_argument("n and p must be >= 1");
  if (s < 0 || s > p) throw std::invalid_argument("s must lie in [0, p]");
  if (!(alpha > 0.4) || !(alpha < 0.5)) {
    throw std::invalid_argument("alpha must lie in (2/5, 1/2)");
  }
  if (!(lambda_min_w >= 0.0) || !(lambda_max_w > 0.0) ||
      lambda_max_w < lambda_min_w) {
    throw std::invalid_argument("need 0 <= lambda_min_w <= lambda_max_w with "
                                "lambda_max_w > 0");
  }
  if (!(f > 0.0)) throw std::invalid_argument("f must be positive");
  const double nd = static_cast<double>(n);
  const double inner =
      std::min({std::cbrt(nd),
                std::pow(nd, 2.0 * alpha) / (lambda_max_w * lambda_max_w),
                std::pow(nd, 1.0 - 2.0 * alpha) * lambda_min_w * lambda_min_w,
                std::pow(nd, 1.0 - 2.0 * alpha) * s /
                    (static_cast<double>(p) * p)});
  return static_cast<double>(p) * p * std::exp(-f * inner);
}

double prediction_error_bound(double lambda_n, int s, double kappa,
                              double m_bound) {
  if (!(lambda_n >= 0.0)) throw std::invalid_argument("lambda_n must be >= 0");
  if (s < 0) throw std::invalid_argument("s must be >= 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(m_bound >= 0.0)) throw std::invalid_argument("m_bound must be >= 0");
  const double half_plus = 0.5 + 2.0 * m_bound;
  return 4.0 * half_plus * half_plus * lambda_n * lambda_n * s / kappa;
}

TransferFunctionRange transfer_function_range(const ArModel& model,
                                              double rho, int grid_points) {
  if (!(rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (grid_points < 8) throw std::invalid_argument("grid_points must be >= 8");
  if (!(rho < 1.0 + model.causal_margin())) {
    throw std::domain_error("transfer function has a pole inside |z| <= rho");
  }
  const Eigen::VectorXd& coef = model.coefficients();
  const int p = model.order();

  double min_abs = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (int k = 0; k < grid_points; ++k) {
    const double theta = two_pi * k / grid_points;
    const std::complex<double> z = std::polar(rho, theta);
    // Horner evaluation of 1 - c1 z - ... - cp z^p.
    std::complex<double> poly(0.0, 0.0);
    for (int j = p; j >= 1; --j) {
      poly = (poly - coef[j - 1]) * z;
    }
    poly += 1.0;
    const double magnitude = 1.0 / std::abs(poly);
    min_abs = std::min(min_abs, magnitude);
    max_abs = std::max(max_abs, magnitude);
  }
  return {min_abs, max_abs};
}

bool in_mixing_family(const ArModel& model, double rho, double l, double L,
                      int grid_points) {
  if (!(l > 0.0) || !(L >= l)) {
    throw std::invalid_argument("need 0 < l <= L");
  }
  if (!(rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (!(rho < 1.0 + model.causal_margin())) return false;
  const TransferFunctionRange range =
      transfer_function_range(model, rho, grid_points);
  return range.min_abs >= l && range.max_abs <= L;
}

namespace {

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

std::string bound_status(double value) {
  return value < 1.0 ? "PASS" : "VACUOUS";
}

}  // namespace

std::vector<ConditionRow> condition_table(const ArModel& model,
                                          const PenaltyConfig& penalty,
                                          const ConditionInputs& inputs) {
  const int p = static_cast<int>(penalty.weights.size());
  if (p < 1) throw std::invalid_argument("penalty weights are empty");
  if (model.order() > p) {
    throw std::invalid_argument("model order exceeds the weight dimension");
  }
  if (inputs.n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(inputs.lambda_n >= 0.0)) {
    throw std::invalid_argument("lambda_n must be >= 0");
  }

  Eigen::VectorXd phi_star = Eigen::VectorXd::Zero(p);
  phi_star.head(model.order()) = model.coefficients();
  const Eigen::MatrixXd gamma_p =
      toeplitz_gamma(autocovariance(model, p - 1), p);

  PenaltyConfig instance{inputs.lambda_n, penalty.weights};
  const SignConditionReport sign =
      sign_conditions(gamma_p, phi_star, instance, inputs.n);
  const double kappa = kappa_p(gamma_p);
  const double m_bound = penalty.weights.maxCoeff();
  if (!(m_bound > 0.0)) {
    throw std::invalid_argument("at least one weight must be positive");
  }
  const PredictionConstants consts(inputs.rho, inputs.l, inputs.L, m_bound,
                                   kappa);

  std::vector<ConditionRow> rows;
  const std::string na = "N-A";

  rows.push_back({"inverse_gram_norm", sign.c_max,
                  sign.c_max ? pass_fail(std::isfinite(*sign.c_max)) : na});
  rows.push_back({"inverse_gram_norm_inf", sign.c_max_inf,
                  sign.c_max_inf ? pass_fail(std::isfinite(*sign.c_max_inf))
                                 : na});
  rows.push_back({"incoherence", sign.incoherence,
                  sign.incoherence ? pass_fail(*sign.incoherence < 1.0) : na});
  rows.push_back({"weight_ratio", sign.cond1_ratio,
                  sign.cond1_ratio ? pass_fail(*sign.cond1_ratio <= 1.0) : na});
  // Finite-sample proxies: a quantity that must vanish in the limit passes
  // below 1, one that must diverge passes above 1.
  rows.push_back({"signal_dominance", sign.cond2_value,
                  sign.cond2_value ? pass_fail(*sign.cond2_value < 1.0) : na});
  rows.push_back({"penalty_growth", sign.cond3_value,
                  sign.cond3_value ? pass_fail(*sign.cond3_value > 1.0) : na});

  double w_s_norm = 0.0;
  double w_min_c = std::numeric_limits<double>::infinity();
  for (int j = 0; j < p; ++j) {
    if (phi_star[j] != 0.0) {
      w_s_norm += penalty.weights[j] * penalty.weights[j];
    } else {
      w_min_c = std::min(w_min_c, penalty.weights[j]);
    }
  }
  w_s_norm = std::sqrt(w_s_norm);
  rows.push_back({"estimation_rate",
                  estimation_rate(inputs.n, p, inputs.lambda_n, w_s_norm),
                  "PASS"});

  rows.push_back({"weight_bound", m_bound, pass_fail(m_bound > 0.0)});
  rows.push_back({"covariance_floor", kappa, pass_fail(kappa > 0.0)});

  const double decay_target =
      consts.big_d * std::pow(static_cast<double>(inputs.n), -0.4);
  const double decay_value =
      inputs.lambda_n * std::sqrt(static_cast<double>(sign.s) / p);
  rows.push_back({"regularization_decay", decay_value / decay_target,
                  pass_fail(decay_value <= decay_target)});

  const TransferFunctionRange range =
      inputs.rho < 1.0 + model.causal_margin()
          ? transfer_function_range(model, inputs.rho)
          : TransferFunctionRange{0.0, std::numeric_limits<double>::infinity()};
  rows.push_back({"transfer_function_lower", range.min_abs,
                  pass_fail(range.min_abs >= inputs.l)});
  rows.push_back({"transfer_function_upper", range.max_abs,
                  pass_fail(range.max_abs <= inputs.L)});

  if (sign.s > 0 && w_min_c > 0.0 && std::isfinite(w_min_c) &&
      inputs.lambda_n > 0.0) {
    const double sigma = model.noise_sd();
    const double nd = static_cast<double>(inputs.n);
    const double y = inputs.y.value_or(
        2.0 * sigma * sigma * (nd + consts.big_d * std::pow(nd, 0.6)));
    const double c = inputs.c.value_or(
        y / (nd * inputs.lambda_n * m_bound));
    const double pi = pi_bound(inputs.n, p, sign.s, inputs.lambda_n, w_min_c,
                               m_bound, sigma, c, y, consts);
    rows.push_back({"sign_recovery_bound", pi, bound_status(pi)});
  } else {
    rows.push_back({"sign_recovery_bound", std::nullopt, na});
  }

  rows.push_back({"prediction_bound",
                  prediction_error_bound(inputs.lambda_n, sign.s, kappa,
                                         m_bound),
                  "PASS"});

  if (sign.s > 0 && w_min_c > 0.0 && std::isfinite(w_min_c)) {
    const double cor =
        corollary_bound(inputs.n, p, sign.s, inputs.alpha, w_min_c, m_bound,
                        inputs.f);
    rows.push_back({"asymptotic_recovery_bound", cor, bound_status(cor)});
  } else {
    rows.push_back({"asymptotic_recovery_bound", std::nullopt, na});
  }
  return rows;
}

}  // namespace sparsear
