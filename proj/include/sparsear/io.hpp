#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sparsear/ar_process.hpp"
#include "sparsear/experiments.hpp"
#include "sparsear/lasso.hpp"
#include "sparsear/selection.hpp"
#include "sparsear/theory.hpp"

namespace sparsear {

// Model file: {"phi": [...], "sigma": s}.
void save_model(const ArModel& model, const std::filesystem::path& path);
ArModel load_model(const std::filesystem::path& path);

// Series files: a single-column CSV with header "x" plus a sidecar
// <stem>.meta.json recording n, p_presample and seed.  Loading without the
// sidecar treats every value as observed (p_presample = 0).
void save_series(const TimeSeries& series, const std::filesystem::path& csv_path);
TimeSeries load_series(const std::filesystem::path& csv_path);

std::string fit_to_json(const LassoFit& fit);
void save_fit(const LassoFit& fit, const std::filesystem::path& path);

// Path CSV columns: lambda, lag_1, ..., lag_p.
void save_path(const SolutionPath& path, const std::filesystem::path& csv_path);
// Event CSV columns: event, lag, lambda.
void save_path_events(const SolutionPath& path,
                      const std::filesystem::path& csv_path);

// CV CSV columns: lambda, cv_mean, cv_se.
void save_cv(const CvResult& result, const std::filesystem::path& csv_path);

std::string yw_to_json(const YwFit& fit);
void save_yw(const YwFit& fit, const std::filesystem::path& path);

std::string condition_table_to_json(const std::vector<ConditionRow>& rows);
std::string format_condition_table(const std::vector<ConditionRow>& rows);

// Monte-Carlo config JSON; missing fields keep the defaults passed in.
McConfig load_mc_config(const std::filesystem::path& path, McConfig defaults);
void save_mc_config(const McConfig& config, const std::filesystem::path& path);

}  // namespace sparsear
