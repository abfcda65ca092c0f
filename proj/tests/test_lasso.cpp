#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sparsear/lasso.hpp"
#include "support/oracles.hpp"

using namespace sparsear;

namespace {

// A small simulated lag design with a causal model drawn from the
// reflection parameterization.
LagDesign random_design(std::mt19937_64& rng, int n, int p) {
  const int order = 1 + static_cast<int>(rng() % std::min(p, 6));
  const Eigen::VectorXd phi = oracles::random_causal_coefficients(rng, order);
  const ArModel model(phi, 0.5 + 1.5 * (rng() % 100) / 100.0);
  const TimeSeries series = simulate(model, n, p, rng());
  return build_design(series, p);
}

Eigen::VectorXd unit_weights(int p) { return Eigen::VectorXd::Ones(p); }

}  // namespace

TEST_CASE("soft threshold closed form") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(1.0, 1.0) == 0.0);
  CHECK(soft_threshold(2.5, 0.0) == 2.5);
}

TEST_CASE("objective evaluates the penalized least squares by hand") {
  LagDesign design;
  design.n = 2;
  design.p = 2;
  design.X.resize(2, 2);
  design.X << 1, 0, 0, 2;
  design.y.resize(2);
  design.y << 3, 4;

  Eigen::VectorXd phi(2);
  phi << 1.0, -0.5;
  Eigen::VectorXd w(2);
  w << 1.0, 3.0;
  const PenaltyConfig penalty{0.1, w};

  // Residual (3 - 1, 4 + 1) = (2, 5); (1/4)(4 + 25) = 7.25;
  // penalty 0.1 * (1 + 1.5) = 0.25.
  CHECK(objective(phi, design, penalty) == doctest::Approx(7.5).epsilon(1e-15));

  // Null vector: y'y / (2n).
  CHECK(objective(Eigen::VectorXd::Zero(2), design, penalty) ==
        doctest::Approx(25.0 / 4.0).epsilon(1e-15));
}

TEST_CASE("orthonormal designs reduce to coordinatewise soft thresholding") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + static_cast<int>(rng() % 8);
    const int n = p + 20 + static_cast<int>(rng() % 50);
    const LagDesign design = oracles::orthonormal_design(rng, n, p);

    Eigen::VectorXd w(p);
    std::uniform_real_distribution<double> uw(0.2, 2.0);
    for (int j = 0; j < p; ++j) w[j] = uw(rng);
    const double lambda = 0.05 + 0.1 * (trial % 4);
    const PenaltyConfig penalty{lambda, w};

    const LassoFit result = fit(design, penalty);
    const Eigen::VectorXd b = design.X.transpose() * design.y / design.n;
    for (int j = 0; j < p; ++j) {
      const double expected = soft_threshold(b[j], lambda * w[j]);
      CHECK(result.coefficients[j] ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("fit matches a brute-force grid search") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> ul(0.01, 0.3);
  for (int trial = 0; trial < 8; ++trial) {
    const int p = 2 + (trial % 2);
    const LagDesign design = random_design(rng, 60 + trial * 10, p);
    Eigen::VectorXd w = unit_weights(p);
    if (trial % 3 == 1) w[0] = 0.0;   // unpenalized first lag
    if (trial % 3 == 2) w[p - 1] = 2.0;
    const PenaltyConfig penalty{ul(rng), w};

    const LassoFit result = fit(design, penalty);
    const double brute = oracles::grid_objective_min(design, penalty);
    CHECK(result.objective <= brute + 1e-6);
    CHECK(result.kkt_residual < 1e-8);
  }
}

TEST_CASE("unpenalized fit solves least squares") {
  std::mt19937_64 rng(56);
  const LagDesign design = random_design(rng, 200, 4);
  const PenaltyConfig penalty{0.0, unit_weights(4)};
  const LassoFit result = fit(design, penalty);
  const Eigen::VectorXd ols =
      (design.X.transpose() * design.X)
          .ldlt()
          .solve(design.X.transpose() * design.y);
  CHECK((result.coefficients - ols).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("reported fit metadata is consistent") {
  std::mt19937_64 rng(78);
  const LagDesign design = random_design(rng, 150, 6);
  const PenaltyConfig penalty{0.05, unit_weights(6)};
  const LassoFit result = fit(design, penalty);

  CHECK(result.lambda_n == 0.05);
  CHECK(result.objective ==
        doctest::Approx(objective(result.coefficients, design, penalty))
            .epsilon(1e-12));
  for (int j = 0; j < 6; ++j) {
    const bool active = result.coefficients[j] != 0.0;
    const bool listed =
        std::find(result.support.begin(), result.support.end(), j + 1) !=
        result.support.end();
    CHECK(active == listed);
    const int expected_sign =
        result.coefficients[j] > 0.0 ? 1 : (result.coefficients[j] < 0.0 ? -1 : 0);
    CHECK(result.signs[j] == expected_sign);
  }
  CHECK(result.iterations >= 1);
}

TEST_CASE("kkt residual certifies solutions and flags non-solutions") {
  std::mt19937_64 rng(90);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 10);
    const LagDesign design = random_design(rng, 80 + 20 * (trial % 5), p);
    std::uniform_real_distribution<double> ul(0.005, 0.2);
    const PenaltyConfig penalty{ul(rng), unit_weights(p)};
    const LassoFit result = fit(design, penalty);

    CHECK(result.kkt_residual < 1e-8);
    // The standalone check recomputes the residual from X and y directly.
    CHECK(kkt_residual(design, penalty, result.coefficients) < 1e-8);

    Eigen::VectorXd corrupted = result.coefficients;
    corrupted[0] += 0.5;
    CHECK(kkt_residual(design, penalty, corrupted) > 1e-4);
  }
}

TEST_CASE("solutions are invariant under penalty-weight rescaling") {
  // (lambda * c, w / c) leaves the product lambda * w_j unchanged; with a
  // power-of-two c both parameterizations round identically.
  std::mt19937_64 rng(11);
  const LagDesign design = random_design(rng, 120, 8);
  Eigen::VectorXd w(8);
  std::uniform_real_distribution<double> uw(0.25, 2.0);
  for (int j = 0; j < 8; ++j) w[j] = uw(rng);

  const PenaltyConfig base{0.08, w};
  const PenaltyConfig scaled{0.08 * 8.0, w / 8.0};
  const LassoFit a = fit(design, base);
  const LassoFit b = fit(design, scaled);
  CHECK((a.coefficients.array() == b.coefficients.array()).all());
}

TEST_CASE("zero-weight coordinates stay unpenalized") {
  std::mt19937_64 rng(13);
  const LagDesign design = random_design(rng, 150, 5);
  Eigen::VectorXd w = unit_weights(5);
  w[2] = 0.0;
  const PenaltyConfig penalty{0.1, w};
  const LassoFit result = fit(design, penalty);
  CHECK(result.kkt_residual < 1e-8);
  // The unpenalized coordinate carries a vanishing partial residual.
  const Eigen::VectorXd grad =
      design.X.transpose() * (design.X * result.coefficients - design.y) /
      design.n;
  CHECK(std::abs(grad[2]) < 1e-8);
}

TEST_CASE("penalty validation") {
  std::mt19937_64 rng(15);
  const LagDesign design = random_design(rng, 50, 3);
  CHECK_THROWS_AS(fit(design, PenaltyConfig{-0.1, unit_weights(3)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit(design, PenaltyConfig{0.1, unit_weights(2)}),
                  std::invalid_argument);
  Eigen::VectorXd negative = unit_weights(3);
  negative[1] = -1.0;
  CHECK_THROWS_AS(fit(design, PenaltyConfig{0.1, negative}),
                  std::invalid_argument);
}

TEST_CASE("lambda_max is the smallest null-solution penalty") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + static_cast<int>(rng() % 6);
    const LagDesign design = random_design(rng, 100, p);
    Eigen::VectorXd w = unit_weights(p);
    w[0] = 1.7;
    const double lmax = lambda_max(design, w);

    const Eigen::VectorXd b = design.X.transpose() * design.y / design.n;
    double expected = 0.0;
    for (int j = 0; j < p; ++j) {
      expected = std::max(expected, std::abs(b[j]) / w[j]);
    }
    CHECK(lmax == doctest::Approx(expected).epsilon(1e-14));

    const LassoFit at_max = fit(design, PenaltyConfig{lmax, w});
    CHECK(at_max.coefficients.cwiseAbs().maxCoeff() == 0.0);
    const LassoFit below = fit(design, PenaltyConfig{0.9 * lmax, w});
    CHECK(below.coefficients.cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("zero weight on a correlated column rejects lambda_max") {
  std::mt19937_64 rng(19);
  const LagDesign design = random_design(rng, 100, 4);
  Eigen::VectorXd w = unit_weights(4);
  w[1] = 0.0;
  CHECK_THROWS_AS(lambda_max(design, w), std::domain_error);
}

TEST_CASE("non-convergence surfaces the best iterate") {
  std::mt19937_64 rng(21);
  const LagDesign design = random_design(rng, 300, 10);
  const PenaltyConfig penalty{1e-4, unit_weights(10)};
  try {
    fit(design, penalty, 1e-12, 1);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& err) {
    CHECK(err.best().iterations == 1);
    CHECK(err.best().coefficients.size() == 10);
    CHECK(err.grid_index() == -1);
    CHECK(std::string(err.what()).find("sweep") != std::string::npos);
  }
}

TEST_CASE("warm and cold starts reach the same optimum") {
  std::mt19937_64 rng(23);
  const LagDesign design = random_design(rng, 200, 8);
  const CdProblem problem(design);
  const PenaltyConfig penalty{0.02, unit_weights(8)};

  const LassoFit cold =
      problem.solve(penalty, Eigen::VectorXd::Zero(8), 1e-10, 100000);
  Eigen::VectorXd far_start = Eigen::VectorXd::Constant(8, 0.7);
  const LassoFit warm = problem.solve(penalty, far_start, 1e-10, 100000);

  CHECK(cold.kkt_residual < 1e-10);
  CHECK(warm.kkt_residual < 1e-10);
  CHECK((cold.coefficients - warm.coefficients).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("precomputed-moments constructor matches the design constructor") {
  std::mt19937_64 rng(25);
  const LagDesign design = random_design(rng, 150, 5);
  const CdProblem from_design(design);
  const CdProblem from_moments(gram(design),
                               design.X.transpose() * design.y / design.n,
                               design.y.squaredNorm() / design.n, design.n);
  const PenaltyConfig penalty{0.05, unit_weights(5)};
  const LassoFit a =
      from_design.solve(penalty, Eigen::VectorXd::Zero(5), 1e-8, 100000);
  const LassoFit b =
      from_moments.solve(penalty, Eigen::VectorXd::Zero(5), 1e-8, 100000);
  CHECK((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(from_design.dimension() == 5);
  CHECK(from_design.objective_at(a.coefficients, penalty) ==
        doctest::Approx(objective(a.coefficients, design, penalty))
            .epsilon(1e-12));
}

TEST_CASE("solution path grid geometry and warm-start consistency") {
  std::mt19937_64 rng(27);
  const LagDesign design = random_design(rng, 250, 12);
  const Eigen::VectorXd w = unit_weights(12);
  const int grid_size = 40;
  const double ratio = 1e-2;
  const SolutionPath path = solution_path(design, w, grid_size, ratio);

  REQUIRE(path.knots.size() == grid_size);
  const double lmax = lambda_max(design, w);
  CHECK(path.knots.front().lambda == doctest::Approx(lmax).epsilon(1e-14));
  CHECK(path.knots.back().lambda ==
        doctest::Approx(lmax * ratio).epsilon(1e-12));
  for (int i = 1; i < grid_size; ++i) {
    const double ratio_step = path.knots[i].lambda / path.knots[i - 1].lambda;
    CHECK(ratio_step ==
          doctest::Approx(std::pow(ratio, 1.0 / (grid_size - 1)))
              .epsilon(1e-10));
  }

  // Every knot solution is certified against a cold fit at its own lambda.
  for (int i = 0; i < grid_size; i += 7) {
    const PenaltyConfig penalty{path.knots[i].lambda, w};
    CHECK(kkt_residual(design, penalty, path.knots[i].coefficients) < 1e-8);
    const LassoFit cold = fit(design, penalty);
    CHECK((cold.coefficients - path.knots[i].coefficients)
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }
}

TEST_CASE("path events reconstruct from knot activity") {
  std::mt19937_64 rng(29);
  const LagDesign design = random_design(rng, 300, 10);
  const Eigen::VectorXd w = unit_weights(10);
  const SolutionPath path = solution_path(design, w, 60, 1e-3);

  std::vector<PathEvent> entries;
  std::vector<PathEvent> exits;
  std::vector<bool> entered(10, false);
  std::vector<bool> active(10, false);
  for (const PathKnot& knot : path.knots) {
    for (int j = 0; j < 10; ++j) {
      const bool now = knot.coefficients[j] != 0.0;
      if (now && !entered[j]) {
        entries.push_back({j + 1, knot.lambda});
        entered[j] = true;
      }
      if (!now && active[j]) exits.push_back({j + 1, knot.lambda});
      active[j] = now;
    }
  }

  REQUIRE(path.entry_events.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(path.entry_events[i].lag == entries[i].lag);
    CHECK(path.entry_events[i].lambda == entries[i].lambda);
  }
  REQUIRE(path.exit_events.size() == exits.size());
  for (std::size_t i = 0; i < exits.size(); ++i) {
    CHECK(path.exit_events[i].lag == exits[i].lag);
    CHECK(path.exit_events[i].lambda == exits[i].lambda);
  }

  // Entry lambdas are nonincreasing along the recorded order.
  for (std::size_t i = 1; i < path.entry_events.size(); ++i) {
    CHECK(path.entry_events[i].lambda <= path.entry_events[i - 1].lambda);
  }
}

TEST_CASE("path validation") {
  std::mt19937_64 rng(31);
  const LagDesign design = random_design(rng, 100, 4);
  const Eigen::VectorXd w = unit_weights(4);
  CHECK_THROWS_AS(solution_path(design, w, 1, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(solution_path(design, w, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solution_path(design, w, 10, 1.5), std::invalid_argument);
}

TEST_CASE("weight ladder") {
  const Eigen::VectorXd ladder = monotone_weight_ladder(4, 2.0);
  CHECK(ladder[0] == 1.0);
  CHECK(ladder[1] == 2.0);
  CHECK(ladder[2] == 4.0);
  CHECK(ladder[3] == 8.0);
  CHECK_THROWS_AS(monotone_weight_ladder(0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(monotone_weight_ladder(3, 0.5), std::invalid_argument);
}

TEST_CASE("heavier late-lag weights defer late entries") {
  // On study-model data, penalizing long lags more strongly must not place
  // a long lag ahead of the short strong ones at the top of the path.
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(15);
  phi[0] = 0.2;
  phi[2] = 0.1;
  phi[4] = 0.2;
  phi[9] = 0.3;
  phi[14] = 0.1;
  const ArModel model(phi, 0.1);
  const TimeSeries series = simulate(model, 1000, 20, 3);
  const LagDesign design = build_design(series, 20);

  const SolutionPath flat = solution_path(design, unit_weights(20), 50, 1e-2);
  REQUIRE(!flat.entry_events.empty());
  const int first_flat = flat.entry_events.front().lag;
  CHECK((first_flat == 10 || first_flat == 5));

  const Eigen::VectorXd ladder = monotone_weight_ladder(20, 1.3);
  const SolutionPath weighted = solution_path(design, ladder, 50, 1e-2);
  REQUIRE(!weighted.entry_events.empty());
  CHECK(weighted.entry_events.front().lag <= first_flat);
}
