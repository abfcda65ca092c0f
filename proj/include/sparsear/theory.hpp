#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sparsear/ar_process.hpp"
#include "sparsear/lasso.hpp"

namespace sparsear {

// Quantities entering the sign-consistency conditions for a target
// coefficient vector phi_star with support S (|S| = s) and complement of
// size nu, evaluated on the population covariance gamma_p.  Fields that
// need a nonempty S (or S^c) are left empty when undefined.
struct SignConditionReport {
  int s = 0;
  int nu = 0;
  std::optional<double> c_max;       // spectral norm of inv(Gamma_SS)
  std::optional<double> c_max_inf;   // max-row-sum norm of inv(Gamma_SS)
  std::optional<double> incoherence; // ||Gamma_{S^c S} inv(Gamma_SS)||_inf
  std::optional<double> epsilon;     // 1 - incoherence when positive
  std::optional<double> min_signal;  // min_{j in S} |phi_star_j|
  std::optional<double> cond1_ratio; // max_S weight / min_{S^c} weight
  std::optional<double> cond2_value; // (sqrt(s/n) + lambda_n ||w_S||_inf) / min_signal
  std::optional<double> cond3_value; // n lambda_n^2 (min_{S^c} weight)^2 / max(s, nu)
};

SignConditionReport sign_conditions(const Eigen::MatrixXd& gamma_p,
                                    const Eigen::VectorXd& phi_star,
                                    const PenaltyConfig& penalty, int n);

// sqrt(p) * (n^{-1/2} + lambda_n * weights_s_norm), the l2 estimation-error
// scale; weights_s_norm is the caller's norm of the support weights.
double estimation_rate(int n, int p, double lambda_n, double weights_s_norm);

// Largest kappa such that gamma_p - kappa * diag(gamma_p) is positive
// semidefinite, located by bisection on Cholesky feasibility; equals the
// smallest eigenvalue of D^{-1/2} gamma_p D^{-1/2}.
double kappa_p(const Eigen::MatrixXd& gamma_p, double tol = 1e-10);

// Strong-mixing coefficient envelope 2 (L rho / (l (rho - 1)))^2 rho^{-m}.
double mixing_bound(double rho, double l, double L, int m);

// Constants derived from the transfer-function family parameters
// (rho, l, L), the weight bound m_bound and the covariance floor kappa.
struct PredictionConstants {
  double rho = 0.0;
  double l = 0.0;
  double L = 0.0;
  double m_bound = 0.0;
  double kappa = 0.0;

  double beta1 = 0.0;  // 1 + 1/log(rho)
  double beta2 = 0.0;  // 1 + L rho / (l (rho - 1))
  double c1 = 0.0;     // 2^10 * 12^2
  double c2 = 0.0;     // 2^-3 * 12^-2
  double big_d = 0.0;  // (c1^3 c2 beta1^2 beta2^3)^{1/5}
  double f1 = 0.0;     // min{ (c2/beta1)^{1/4}/4, 2^-9, 1/8 }
  double f2 = 0.0;     // 1 / (4 c1 beta1 beta2)

  PredictionConstants(double rho, double l, double L, double m_bound,
                      double kappa);
};

// Finite-sample probability bound for sign recovery.  Requires c > 0 and
// y > sigma^2 (n + big_d * n^{3/5}); values >= 1 are vacuous but reported
// verbatim.
double pi_bound(std::int64_t n, int p, int s, double lambda_n,
                double lambda_min_w, double lambda_max_w, double sigma,
                double c, double y, const PredictionConstants& consts);

// Asymptotic simplification of pi_bound under lambda_n = n^{-alpha} with
// alpha in (2/5, 1/2):
// p^2 exp{-f min(n^{1/3}, n^{2a}/w_max^2, n^{1-2a} w_min^2, n^{1-2a} s/p^2)}.
double corollary_bound(std::int64_t n, int p, int s, double alpha,
                       double lambda_min_w, double lambda_max_w, double f);

// 4 (1/2 + 2 m_bound)^2 lambda_n^2 s / kappa, the covariance-norm error
// bound for the penalized estimate.
double prediction_error_bound(double lambda_n, int s, double kappa,
                              double m_bound);

// Range of |psi(z)| = |1 / (1 - sum_j c_j z^j)| over the circle |z| = rho,
// evaluated on a uniform grid.  Requires rho < 1 + causal margin so the
// transfer function is analytic on the disc.
struct TransferFunctionRange {
  double min_abs = 0.0;
  double max_abs = 0.0;
};

TransferFunctionRange transfer_function_range(const ArModel& model,
                                              double rho,
                                              int grid_points = 10000);

// True when the transfer function satisfies l <= |psi(z)| <= L on
// |z| <= rho (checked on the boundary circle, where both extremes of an
// analytic nonvanishing function are attained).
bool in_mixing_family(const ArModel& model, double rho, double l, double L,
                      int grid_points = 10000);

// One row of the condition table printed by the `check` command.
struct ConditionRow {
  std::string name;
  std::optional<double> value;
  std::string status;  // PASS, FAIL, VACUOUS or N-A
};

struct ConditionInputs {
  int n = 0;
  double lambda_n = 0.0;
  double rho = 2.0;
  double l = 0.5;
  double L = 2.0;
  double alpha = 0.45;  // corollary exponent
  double f = 1.0;       // corollary constant
  std::optional<double> c;  // pi_bound deviation scale; derived when empty
  std::optional<double> y;  // pi_bound truncation level; derived when empty
};

// Evaluates every condition and bound for a model embedded in dimension p
// (p = penalty.weights.size(), phi_star zero-padded) and labels each row.
// Limit conditions use finite-sample proxies: a quantity required to vanish
// passes when < 1, one required to diverge passes when > 1.
std::vector<ConditionRow> condition_table(const ArModel& model,
                                          const PenaltyConfig& penalty,
                                          const ConditionInputs& inputs);

}  // namespace sparsear
