#include "sparsear/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sparsear/design.hpp"
#include "sparsear/experiments.hpp"
#include "sparsear/io.hpp"
#include "sparsear/theory.hpp"

namespace sparsear {

namespace {

Eigen::VectorXd parse_weights(const std::string& text, int p) {
  if (text.empty() || text == "unit") return Eigen::VectorXd::Ones(p);
  Eigen::VectorXd weights(p);
  std::istringstream in(text);
  std::string token;
  int count = 0;
  while (std::getline(in, token, ',')) {
    if (count >= p) {
      throw std::invalid_argument("more weights than the dimension p");
    }
    std::size_t consumed = 0;
    weights[count++] = std::stod(token, &consumed);
    if (consumed != token.size()) {
      throw std::invalid_argument("malformed weight: " + token);
    }
  }
  if (count != p) {
    throw std::invalid_argument("expected " + std::to_string(p) +
                                " weights, got " + std::to_string(count));
  }
  return weights;
}

LagDesign design_from_file(const std::string& series_path, int p, bool trim) {
  const TimeSeries series = load_series(series_path);
  return trim ? build_design_trimmed(series, p) : build_design(series, p);
}

Eigen::VectorXd geometric_grid(double lmax, int grid_size, double ratio) {
  Eigen::VectorXd grid(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    grid[i] = lmax * std::pow(ratio, static_cast<double>(i) / (grid_size - 1));
  }
  return grid;
}

struct CommonFitArgs {
  std::string series;
  std::string weights_text = "unit";
  int p = 0;
  bool trim = false;
  double tol = 1e-8;
  int max_iter = 100000;
};

void add_fit_args(CLI::App* sub, CommonFitArgs& args) {
  sub->add_option("--series", args.series, "series CSV file")->required();
  sub->add_option("--p", args.p, "number of lags in the design")->required();
  sub->add_option("--weights", args.weights_text,
                  "'unit' or comma-separated per-lag penalty weights");
  sub->add_flag("--trim-presample", args.trim,
                "drop the first p responses instead of using pre-sample "
                "values");
  sub->add_option("--tol", args.tol, "solver tolerance");
  sub->add_option("--max-iter", args.max_iter, "solver sweep limit");
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"sparse autoregression toolkit"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  // simulate
  auto* simulate_cmd =
      app.add_subcommand("simulate", "simulate a series from a model file");
  std::string sim_model;
  int sim_n = 0;
  int sim_presample = -1;
  int sim_burn_in = -1;
  std::uint64_t sim_seed = 1;
  simulate_cmd->add_option("--model", sim_model, "model JSON file")
      ->required();
  simulate_cmd->add_option("--n", sim_n, "observations to keep")->required();
  simulate_cmd->add_option("--presample", sim_presample,
                           "pre-sample values to keep (default: model order)");
  simulate_cmd->add_option("--burn-in", sim_burn_in,
                           "values to discard (default: 10p + 1000)");
  simulate_cmd->add_option("--seed", sim_seed, "RNG seed");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "penalized fit at one lambda");
  CommonFitArgs fit_args;
  double fit_lambda = 0.0;
  add_fit_args(fit_cmd, fit_args);
  fit_cmd->add_option("--lambda", fit_lambda, "penalty level")->required();

  // path
  auto* path_cmd =
      app.add_subcommand("path", "solution path over a geometric grid");
  CommonFitArgs path_args;
  int path_grid_size = 100;
  double path_ratio = 1e-3;
  add_fit_args(path_cmd, path_args);
  path_cmd->add_option("--grid-size", path_grid_size, "grid points");
  path_cmd->add_option("--lambda-min-ratio", path_ratio,
                       "smallest lambda as a fraction of lambda_max");

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "cross-validated lambda choice");
  CommonFitArgs cv_args;
  int cv_grid_size = 100;
  double cv_ratio = 1e-3;
  int cv_folds = 10;
  bool cv_rolling = false;
  std::string cv_rule = "min";
  std::uint64_t cv_seed = 1;
  add_fit_args(cv_cmd, cv_args);
  cv_cmd->add_option("--grid-size", cv_grid_size, "grid points");
  cv_cmd->add_option("--lambda-min-ratio", cv_ratio,
                     "smallest lambda as a fraction of lambda_max");
  cv_cmd->add_option("--folds", cv_folds, "number of folds");
  cv_cmd->add_flag("--rolling-cv", cv_rolling,
                   "rolling-origin folds instead of random row folds");
  cv_cmd->add_option("--cv-rule", cv_rule, "lambda choice: 'min' or '1se'")
      ->check(CLI::IsMember({"min", "1se"}));
  cv_cmd->add_option("--seed", cv_seed, "fold assignment seed");

  // yw
  auto* yw_cmd =
      app.add_subcommand("yw", "Yule-Walker fits with AIC order choice");
  std::string yw_series;
  int yw_max_order = 30;
  yw_cmd->add_option("--series", yw_series, "series CSV file")->required();
  yw_cmd->add_option("--max-order", yw_max_order, "largest order to fit");

  // check
  auto* check_cmd =
      app.add_subcommand("check", "evaluate the theory conditions and bounds");
  std::string check_model;
  std::string check_weights = "unit";
  int check_n = 0;
  int check_p = 0;
  ConditionInputs check_inputs;
  double check_c = -1.0;
  double check_y = -1.0;
  check_cmd->add_option("--model", check_model, "model JSON file")->required();
  check_cmd->add_option("--n", check_n, "sample size")->required();
  check_cmd->add_option("--lambda", check_inputs.lambda_n, "penalty level")
      ->required();
  check_cmd->add_option("--p", check_p,
                        "embedding dimension (default: model order)");
  check_cmd->add_option("--weights", check_weights,
                        "'unit' or comma-separated per-lag penalty weights");
  check_cmd->add_option("--rho", check_inputs.rho, "family radius (> 1)");
  check_cmd->add_option("--l", check_inputs.l, "family lower envelope");
  check_cmd->add_option("--L", check_inputs.L, "family upper envelope");
  check_cmd->add_option("--alpha", check_inputs.alpha,
                        "decay exponent in (2/5, 1/2)");
  check_cmd->add_option("--f", check_inputs.f, "asymptotic bound constant");
  check_cmd->add_option("--pi-c", check_c, "deviation scale c (> 0)");
  check_cmd->add_option("--pi-y", check_y, "truncation level y");

  // mc
  auto* mc_cmd =
      app.add_subcommand("mc", "Monte-Carlo selection study");
  std::string mc_config_path;
  McConfig mc_config{study_model()};
  std::uint64_t mc_seed = mc_config.base_seed;
  mc_cmd->add_option("--config", mc_config_path, "McConfig JSON file");
  auto* mc_n = mc_cmd->add_option("--n", mc_config.n, "series length");
  auto* mc_p = mc_cmd->add_option("--p", mc_config.p, "design dimension");
  auto* mc_reps = mc_cmd->add_option("--replications", mc_config.replications,
                                     "number of replications");
  auto* mc_folds = mc_cmd->add_option("--folds", mc_config.cv_folds,
                                      "cross-validation folds");
  auto* mc_grid = mc_cmd->add_option("--grid-size", mc_config.grid_size,
                                     "lambda grid points");
  auto* mc_ratio = mc_cmd->add_option("--lambda-min-ratio",
                                      mc_config.lambda_min_ratio,
                                      "smallest lambda fraction");
  auto* mc_seed_opt = mc_cmd->add_option("--seed", mc_seed, "base seed");
  std::string mc_rule = "1se";
  auto* mc_rule_opt =
      mc_cmd->add_option("--cv-rule", mc_rule, "lambda choice: 'min' or '1se'")
          ->check(CLI::IsMember({"min", "1se"}));
  auto* mc_threads =
      mc_cmd->add_option("--threads", mc_config.threads, "worker threads");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);

    if (*simulate_cmd) {
      const ArModel model = load_model(sim_model);
      const int presample =
          sim_presample >= 0 ? sim_presample : model.order();
      const int burn_in =
          sim_burn_in >= 0 ? sim_burn_in : default_burn_in(model.order());
      const TimeSeries series =
          simulate(model, sim_n, presample, burn_in, sim_seed);
      save_series(series, out / "series.csv");
    } else if (*fit_cmd) {
      const LagDesign design =
          design_from_file(fit_args.series, fit_args.p, fit_args.trim);
      PenaltyConfig penalty{fit_lambda,
                            parse_weights(fit_args.weights_text, fit_args.p)};
      const LassoFit result =
          fit(design, penalty, fit_args.tol, fit_args.max_iter);
      save_fit(result, out / "fit.json");
    } else if (*path_cmd) {
      const LagDesign design =
          design_from_file(path_args.series, path_args.p, path_args.trim);
      const SolutionPath path = solution_path(
          design, parse_weights(path_args.weights_text, path_args.p),
          path_grid_size, path_ratio, path_args.tol, path_args.max_iter);
      save_path(path, out / "path.csv");
      save_path_events(path, out / "path_events.csv");
    } else if (*cv_cmd) {
      const LagDesign design =
          design_from_file(cv_args.series, cv_args.p, cv_args.trim);
      const Eigen::VectorXd weights =
          parse_weights(cv_args.weights_text, cv_args.p);
      const Eigen::VectorXd grid = geometric_grid(
          lambda_max(design, weights), cv_grid_size, cv_ratio);
      const CvResult result = cross_validate(
          design, weights, grid, cv_folds, cv_seed,
          cv_rolling ? CvScheme::kRollingOrigin : CvScheme::kRandomFolds,
          cv_rule == "1se" ? CvChoiceRule::kOneStandardError
                           : CvChoiceRule::kMinimum,
          cv_args.tol, cv_args.max_iter);
      save_cv(result, out / "cv.csv");
      PenaltyConfig penalty{result.chosen_lambda, weights};
      save_fit(fit(design, penalty, cv_args.tol, cv_args.max_iter),
               out / "chosen_fit.json");
    } else if (*yw_cmd) {
      const TimeSeries series = load_series(yw_series);
      save_yw(yule_walker(series, yw_max_order), out / "yw.json");
    } else if (*check_cmd) {
      const ArModel model = load_model(check_model);
      const int p = check_p > 0 ? check_p : model.order();
      check_inputs.n = check_n;
      if (check_c > 0.0) check_inputs.c = check_c;
      if (check_y > 0.0) check_inputs.y = check_y;
      PenaltyConfig penalty{check_inputs.lambda_n,
                            parse_weights(check_weights, p)};
      const auto rows = condition_table(model, penalty, check_inputs);
      std::cout << format_condition_table(rows);
      std::ofstream json_out(out / "check.json",
                             std::ios::binary | std::ios::trunc);
      json_out << condition_table_to_json(rows) << "\n";
    } else if (*mc_cmd) {
      McConfig config = mc_config;
      if (!mc_config_path.empty()) {
        McConfig defaults{study_model()};
        config = load_mc_config(mc_config_path, defaults);
        // Explicit flags override file values.
        if (mc_n->count() > 0) config.n = mc_config.n;
        if (mc_p->count() > 0) config.p = mc_config.p;
        if (mc_reps->count() > 0) config.replications = mc_config.replications;
        if (mc_folds->count() > 0) config.cv_folds = mc_config.cv_folds;
        if (mc_grid->count() > 0) config.grid_size = mc_config.grid_size;
        if (mc_ratio->count() > 0) {
          config.lambda_min_ratio = mc_config.lambda_min_ratio;
        }
        if (mc_threads->count() > 0) config.threads = mc_config.threads;
      }
      if (mc_seed_opt->count() > 0 || mc_config_path.empty()) {
        config.base_seed = mc_seed;
      }
      if (mc_rule_opt->count() > 0 || mc_config_path.empty()) {
        config.cv_rule = mc_rule == "1se" ? CvChoiceRule::kOneStandardError
                                          : CvChoiceRule::kMinimum;
      }
      const McReport report = run_monte_carlo(config);
      emit_report(report, config, out);
    }
    return 0;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace sparsear
