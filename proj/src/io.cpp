#include "sparsear/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sparsear {

namespace {

using nlohmann::json;

constexpr const char* kCrlf = "\r\n";

std::string fmt_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& err) {
    throw std::invalid_argument("malformed JSON in " + path.string() + ": " +
                                err.what());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path meta = csv_path;
  meta.replace_extension(".meta.json");
  return meta;
}

Eigen::VectorXd vector_from_json(const json& array, const char* what) {
  if (!array.is_array()) {
    throw std::invalid_argument(std::string(what) + " must be a JSON array");
  }
  Eigen::VectorXd v(array.size());
  Eigen::Index i = 0;
  for (const auto& item : array) {
    if (!item.is_number()) {
      throw std::invalid_argument(std::string(what) +
                                  " must contain only numbers");
    }
    v[i++] = item.get<double>();
  }
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json array = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) array.push_back(v[i]);
  return array;
}

}  // namespace

void save_model(const ArModel& model, const std::filesystem::path& path) {
  json doc;
  doc["phi"] = vector_to_json(model.coefficients());
  doc["sigma"] = model.noise_sd();
  open_out(path) << doc.dump(2) << "\n";
}

ArModel load_model(const std::filesystem::path& path) {
  const json doc = parse_json_file(path);
  if (!doc.contains("phi") || !doc.contains("sigma")) {
    throw std::invalid_argument("model file must contain phi and sigma");
  }
  return ArModel(vector_from_json(doc["phi"], "phi"),
                 doc["sigma"].get<double>());
}

void save_series(const TimeSeries& series,
                 const std::filesystem::path& csv_path) {
  auto out = open_out(csv_path);
  out << "x" << kCrlf;
  for (Eigen::Index i = 0; i < series.values.size(); ++i) {
    out << fmt_double(series.values[i]) << kCrlf;
  }
  json meta;
  meta["n"] = series.n;
  meta["p_presample"] = series.p_presample;
  meta["seed"] = series.seed;
  open_out(sidecar_path(csv_path)) << meta.dump(2) << "\n";
}

TimeSeries load_series(const std::filesystem::path& csv_path) {
  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty series file " + csv_path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x") {
    throw std::invalid_argument("series file must start with header 'x'");
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t consumed = 0;
    double value;
    try {
      value = std::stod(line, &consumed);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed series value: " + line);
    }
    if (consumed != line.size()) {
      throw std::invalid_argument("malformed series value: " + line);
    }
    values.push_back(value);
  }
  if (values.empty()) {
    throw std::invalid_argument("series file has no observations");
  }

  TimeSeries series;
  series.values =
      Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
  series.p_presample = 0;
  series.seed = 0;
  const auto meta_path = sidecar_path(csv_path);
  if (std::filesystem::exists(meta_path)) {
    const json meta = parse_json_file(meta_path);
    series.p_presample = meta.value("p_presample", 0);
    series.seed = meta.value("seed", std::uint64_t{0});
  }
  series.n = static_cast<int>(values.size()) - series.p_presample;
  if (series.n < 1) {
    throw std::invalid_argument("series shorter than its pre-sample length");
  }
  return series;
}

std::string fit_to_json(const LassoFit& fit) {
  json doc;
  doc["phi"] = vector_to_json(fit.coefficients);
  doc["support"] = fit.support;
  doc["lambda"] = fit.lambda_n;
  doc["kkt_residual"] = fit.kkt_residual;
  doc["objective"] = fit.objective;
  return doc.dump(2);
}

void save_fit(const LassoFit& fit, const std::filesystem::path& path) {
  open_out(path) << fit_to_json(fit) << "\n";
}

void save_path(const SolutionPath& path,
               const std::filesystem::path& csv_path) {
  auto out = open_out(csv_path);
  const int p = path.knots.empty()
                    ? 0
                    : static_cast<int>(path.knots.front().coefficients.size());
  out << "lambda";
  for (int j = 1; j <= p; ++j) out << ",lag_" << j;
  out << kCrlf;
  for (const PathKnot& knot : path.knots) {
    out << fmt_double(knot.lambda);
    for (int j = 0; j < p; ++j) out << "," << fmt_double(knot.coefficients[j]);
    out << kCrlf;
  }
}

void save_path_events(const SolutionPath& path,
                      const std::filesystem::path& csv_path) {
  auto out = open_out(csv_path);
  out << "event,lag,lambda" << kCrlf;
  for (const PathEvent& e : path.entry_events) {
    out << "entry," << e.lag << "," << fmt_double(e.lambda) << kCrlf;
  }
  for (const PathEvent& e : path.exit_events) {
    out << "exit," << e.lag << "," << fmt_double(e.lambda) << kCrlf;
  }
}

void save_cv(const CvResult& result, const std::filesystem::path& csv_path) {
  auto out = open_out(csv_path);
  out << "lambda,cv_mean,cv_se" << kCrlf;
  for (Eigen::Index i = 0; i < result.lambda_grid.size(); ++i) {
    out << fmt_double(result.lambda_grid[i]) << ","
        << fmt_double(result.cv_mean[i]) << "," << fmt_double(result.cv_se[i])
        << kCrlf;
  }
}

std::string yw_to_json(const YwFit& fit) {
  json doc;
  doc["chosen_order"] = fit.chosen_order;
  doc["aic"] = vector_to_json(fit.aic);
  doc["innovation_variance"] = vector_to_json(fit.innovation_variance);
  doc["reflection"] = vector_to_json(fit.reflection);
  json coefs = json::array();
  for (const Eigen::VectorXd& c : fit.coefficients_by_order) {
    coefs.push_back(vector_to_json(c));
  }
  doc["coefficients_by_order"] = coefs;
  return doc.dump(2);
}

void save_yw(const YwFit& fit, const std::filesystem::path& path) {
  open_out(path) << yw_to_json(fit) << "\n";
}

std::string condition_table_to_json(const std::vector<ConditionRow>& rows) {
  json array = json::array();
  for (const ConditionRow& row : rows) {
    json item;
    item["name"] = row.name;
    if (row.value) {
      item["value"] = *row.value;
    } else {
      item["value"] = nullptr;
    }
    item["status"] = row.status;
    array.push_back(item);
  }
  json doc;
  doc["conditions"] = array;
  return doc.dump(2);
}

std::string format_condition_table(const std::vector<ConditionRow>& rows) {
  std::size_t width = 0;
  for (const ConditionRow& row : rows) width = std::max(width, row.name.size());
  std::ostringstream out;
  for (const ConditionRow& row : rows) {
    out << row.name << std::string(width - row.name.size() + 2, ' ');
    const std::string value = row.value ? fmt_double(*row.value) : "-";
    out << value;
    if (value.size() < 24) out << std::string(24 - value.size(), ' ');
    out << row.status << "\n";
  }
  return out.str();
}

McConfig load_mc_config(const std::filesystem::path& path, McConfig defaults) {
  const json doc = parse_json_file(path);
  McConfig config = std::move(defaults);
  if (doc.contains("model")) {
    const json& model = doc["model"];
    if (!model.contains("phi") || !model.contains("sigma")) {
      throw std::invalid_argument("model must contain phi and sigma");
    }
    config.model = ArModel(vector_from_json(model["phi"], "phi"),
                           model["sigma"].get<double>());
  }
  config.n = doc.value("n", config.n);
  config.p = doc.value("p", config.p);
  config.replications = doc.value("replications", config.replications);
  config.cv_folds = doc.value("cv_folds", config.cv_folds);
  config.grid_size = doc.value("grid_size", config.grid_size);
  config.lambda_min_ratio =
      doc.value("lambda_min_ratio", config.lambda_min_ratio);
  config.base_seed = doc.value("base_seed", config.base_seed);
  config.yw_max_order = doc.value("yw_max_order", config.yw_max_order);
  config.threads = doc.value("threads", config.threads);
  if (doc.contains("cv_rule")) {
    const std::string rule = doc["cv_rule"].get<std::string>();
    if (rule == "min") {
      config.cv_rule = CvChoiceRule::kMinimum;
    } else if (rule == "1se") {
      config.cv_rule = CvChoiceRule::kOneStandardError;
    } else {
      throw std::invalid_argument("cv_rule must be 'min' or '1se'");
    }
  }
  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    if (w.is_string() && w.get<std::string>() == "unit") {
      config.weights.resize(0);
    } else {
      config.weights = vector_from_json(w, "weights");
    }
  }
  return config;
}

void save_mc_config(const McConfig& config,
                    const std::filesystem::path& path) {
  json doc;
  doc["model"]["phi"] = vector_to_json(config.model.coefficients());
  doc["model"]["sigma"] = config.model.noise_sd();
  doc["n"] = config.n;
  doc["p"] = config.p;
  doc["replications"] = config.replications;
  doc["cv_folds"] = config.cv_folds;
  doc["grid_size"] = config.grid_size;
  doc["lambda_min_ratio"] = config.lambda_min_ratio;
  doc["base_seed"] = config.base_seed;
  doc["yw_max_order"] = config.yw_max_order;
  doc["threads"] = config.threads;
  doc["cv_rule"] =
      config.cv_rule == CvChoiceRule::kOneStandardError ? "1se" : "min";
  if (config.weights.size() == 0) {
    doc["weights"] = "unit";
  } else {
    doc["weights"] = vector_to_json(config.weights);
  }
  open_out(path) << doc.dump(2) << "\n";
}

std::vector<std::filesystem::path> emit_report(
    const McReport& report, const McConfig& config,
    const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> written;

  Eigen::VectorXd truth = Eigen::VectorXd::Zero(config.p);
  truth.head(std::min(config.model.order(), config.p)) =
      config.model.coefficients().head(
          std::min(config.model.order(), config.p));

  {
    json doc;
    doc["schema_version"] = 1;
    doc["config"] = {
        {"n", config.n},
        {"p", config.p},
        {"replications", config.replications},
        {"cv_folds", config.cv_folds},
        {"grid_size", config.grid_size},
        {"lambda_min_ratio", config.lambda_min_ratio},
        {"base_seed", config.base_seed},
        {"cv_rule",
         config.cv_rule == CvChoiceRule::kOneStandardError ? "1se" : "min"},
        {"yw_max_order", config.yw_max_order},
        {"model",
         {{"phi", vector_to_json(config.model.coefficients())},
          {"sigma", config.model.noise_sd()}}}};
    doc["replications"] = report.replications;
    doc["failures"] = report.failures;
    doc["selected_count_per_lag"] = report.selected_count_per_lag;
    doc["among_first_five_per_lag"] = report.among_first_five_per_lag;
    doc["num_selected"] = report.num_selected;
    json histograms = json::array();
    for (const auto& histogram : report.entry_order_histogram) {
      json h = json::object();
      for (const auto& [rank, count] : histogram) {
        h[std::to_string(rank)] = count;
      }
      histograms.push_back(h);
    }
    doc["entry_order_histogram"] = histograms;
    json yw = json::object();
    for (const auto& [order, count] : report.yw_order_histogram) {
      yw[std::to_string(order)] = count;
    }
    doc["yw_order_histogram"] = yw;
    doc["summary"] = {{"mean", report.summary.mean},
                      {"sd", report.summary.sd},
                      {"min", report.summary.min},
                      {"median", report.summary.median},
                      {"max", report.summary.max}};
    const auto path = directory / "report.json";
    open_out(path) << doc.dump(2) << "\n";
    written.push_back(path);
  }
  {
    const auto path = directory / "table1.csv";
    auto out = open_out(path);
    out << "lag,value,selected_count,among_first_five" << kCrlf;
    for (int j = 0; j < config.p; ++j) {
      out << (j + 1) << "," << fmt_double(truth[j]) << ","
          << report.selected_count_per_lag[j] << ","
          << report.among_first_five_per_lag[j] << kCrlf;
    }
    written.push_back(path);
  }
  {
    const auto path = directory / "num_selected.csv";
    auto out = open_out(path);
    out << "replication,num_selected" << kCrlf;
    for (std::size_t i = 0; i < report.num_selected.size(); ++i) {
      out << i << "," << report.num_selected[i] << kCrlf;
    }
    written.push_back(path);
  }
  {
    const auto path = directory / "entry_order.csv";
    auto out = open_out(path);
    out << "lag,order,count" << kCrlf;
    for (int j = 0; j < config.p; ++j) {
      for (const auto& [rank, count] : report.entry_order_histogram[j]) {
        out << (j + 1) << "," << rank << "," << count << kCrlf;
      }
    }
    written.push_back(path);
  }
  {
    const auto path = directory / "yw_orders.csv";
    auto out = open_out(path);
    out << "order,count" << kCrlf;
    for (const auto& [order, count] : report.yw_order_histogram) {
      out << order << "," << count << kCrlf;
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace sparsear
