#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace sparsear {

// Result of testing whether an autoregression is causal (stationary).
// margin = (smallest root modulus of the characteristic polynomial) - 1,
// so causal <=> margin > 0.  A zero coefficient vector has no roots and
// reports an infinite margin.
struct CausalityCheck {
  bool causal = false;
  double margin = 0.0;
};

// Checks causality of the polynomial 1 - c1*z - ... - cp*z^p.
// Requires a nonempty coefficient vector with finite entries.
CausalityCheck check_causality(const Eigen::VectorXd& coefficients);

// A causal AR(p) model with i.i.d. Gaussian innovations.
// Construction validates causality and noise_sd > 0.
class ArModel {
 public:
  ArModel(Eigen::VectorXd coefficients, double noise_sd);

  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  double noise_sd() const { return noise_sd_; }
  int order() const { return static_cast<int>(coefficients_.size()); }
  double causal_margin() const { return margin_; }

 private:
  Eigen::VectorXd coefficients_;
  double noise_sd_;
  double margin_;
};

// Moving-average representation truncated at a requested order.
// psi has size truncation_order + 1 with psi[0] = 1; tail_bound estimates
// the absolute sum of the omitted coefficients and is nonincreasing in
// truncation_order for a fixed model.
struct MaExpansion {
  Eigen::VectorXd psi;
  int truncation_order = 0;
  double tail_bound = 0.0;
};

MaExpansion ma_coefficients(const ArModel& model, int truncation_order);

// Theoretical autocovariances gamma(0..max_lag), each accurate to tol.
struct AutocovSequence {
  Eigen::VectorXd gamma;
  int max_lag() const { return static_cast<int>(gamma.size()) - 1; }
};

AutocovSequence autocovariance(const ArModel& model, int max_lag,
                               double tol = 1e-12);

// Symmetric Toeplitz matrix [gamma(|i-j|)] of size p; requires max_lag >= p-1.
Eigen::MatrixXd toeplitz_gamma(const AutocovSequence& acov, int p);

// A simulated realisation.  values holds p_presample pre-sample points
// followed by the n observations used as responses.
struct TimeSeries {
  Eigen::VectorXd values;
  int n = 0;
  int p_presample = 0;
  std::uint64_t seed = 0;
};

int default_burn_in(int order);

// Simulates the recursion from a zero initial state, discards burn_in
// values and returns the final n + p_presample ones.  Deterministic for a
// fixed seed.
TimeSeries simulate(const ArModel& model, int n, int p_presample,
                    int burn_in, std::uint64_t seed);

TimeSeries simulate(const ArModel& model, int n, int p_presample,
                    std::uint64_t seed);

}  // namespace sparsear
