#include "ppiw/pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "ppiw/estimators.hpp"
#include "ppiw/ppi.hpp"
#include "ppiw/propensity.hpp"
#include "ppiw/report.hpp"
#include "ppiw/rng.hpp"

namespace ppiw {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  RawTable table;
  std::string line;
  if (!std::getline(in, line)) throw FileError(path + " is empty");
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    cells.resize(table.header.size());
    table.rows.push_back(std::move(cells));
  }
  return table;
}

int column_of(const RawTable& table, const std::string& name) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) {
    throw SchemaError("column '" + name + "' not found in header");
  }
  return static_cast<int>(it - table.header.begin());
}

bool parse_number(const std::string& cell, double& out) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t') ++end;
  return *end == '\0' && std::isfinite(out);
}

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<std::string> csv_header(const std::string& path) {
  return read_table(path).header;
}

std::vector<std::string> sniff_categorical_columns(const std::string& path) {
  const RawTable table = read_table(path);
  std::vector<std::string> out;
  for (size_t c = 0; c < table.header.size(); ++c) {
    bool numeric = true;
    for (const auto& row : table.rows) {
      const std::string cell = trimmed(row[c]);
      if (cell.empty()) continue;
      double value;
      if (!parse_number(cell, value)) {
        numeric = false;
        break;
      }
    }
    if (!numeric) out.push_back(table.header[c]);
  }
  return out;
}

LoadedDataset load_csv(const std::string& path, const DatasetSchema& schema,
                       MissingPolicy policy) {
  (void)policy;  // DropRows is the only policy
  const RawTable table = read_table(path);

  const int outcome_col = column_of(table, schema.outcome_column);
  std::vector<int> covariate_cols;
  for (const auto& name : schema.covariate_columns) {
    covariate_cols.push_back(column_of(table, name));
  }
  if (std::find(schema.covariate_columns.begin(), schema.covariate_columns.end(),
                schema.labeling_covariate) == schema.covariate_columns.end()) {
    throw SchemaError("labeling covariate '" + schema.labeling_covariate +
                      "' is not among the covariate columns");
  }
  std::set<std::string> categorical(schema.categorical_columns.begin(),
                                    schema.categorical_columns.end());
  for (const auto& name : schema.categorical_columns) {
    if (std::find(schema.covariate_columns.begin(), schema.covariate_columns.end(), name) ==
        schema.covariate_columns.end()) {
      throw SchemaError("categorical column '" + name + "' is not a covariate");
    }
  }
  if (categorical.count(schema.labeling_covariate) > 0) {
    throw SchemaError("labeling covariate must be numeric");
  }
  if (categorical.count(schema.outcome_column) > 0) {
    throw SchemaError("outcome must be numeric");
  }

  // First pass: drop rows with a missing cell in any schema column.
  std::vector<const std::vector<std::string>*> kept;
  int n_dropped = 0;
  for (const auto& row : table.rows) {
    bool missing = trimmed(row[static_cast<size_t>(outcome_col)]).empty();
    for (int c : covariate_cols) {
      if (trimmed(row[static_cast<size_t>(c)]).empty()) missing = true;
    }
    if (missing) {
      ++n_dropped;
    } else {
      kept.push_back(&row);
    }
  }
  if (kept.empty()) throw EmptyAfterFiltering("no rows left after dropping missing values");

  // Collect categorical levels (sorted for a stable encoding).
  std::map<std::string, std::vector<std::string>> levels;
  for (size_t k = 0; k < schema.covariate_columns.size(); ++k) {
    const std::string& name = schema.covariate_columns[k];
    if (categorical.count(name) == 0) continue;
    std::set<std::string> seen;
    for (const auto* row : kept) {
      seen.insert(trimmed((*row)[static_cast<size_t>(covariate_cols[k])]));
    }
    levels[name] = std::vector<std::string>(seen.begin(), seen.end());
  }

  // Expanded feature layout.
  std::vector<std::string> feature_names;
  std::vector<std::pair<int, int>> layout;  // (source column, level index or -1)
  for (size_t k = 0; k < schema.covariate_columns.size(); ++k) {
    const std::string& name = schema.covariate_columns[k];
    if (categorical.count(name) == 0) {
      feature_names.push_back(name);
      layout.emplace_back(covariate_cols[k], -1);
    } else {
      const auto& lv = levels[name];
      for (size_t l = 1; l < lv.size(); ++l) {  // first level dropped
        feature_names.push_back(name + "=" + lv[l]);
        layout.emplace_back(covariate_cols[k], static_cast<int>(l));
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(layout.size()));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = *kept[static_cast<size_t>(i)];
    const std::string outcome_cell = trimmed(row[static_cast<size_t>(outcome_col)]);
    double value;
    if (!parse_number(outcome_cell, value)) {
      throw SchemaError("non-numeric outcome value '" + outcome_cell + "'");
    }
    y[i] = value;
    for (size_t f = 0; f < layout.size(); ++f) {
      const auto [col, level] = layout[f];
      const std::string cell = trimmed(row[static_cast<size_t>(col)]);
      if (level < 0) {
        if (!parse_number(cell, value)) {
          throw SchemaError("non-numeric value '" + cell + "' in column '" +
                            table.header[static_cast<size_t>(col)] + "'");
        }
        x(i, static_cast<Eigen::Index>(f)) = value;
      } else {
        const auto& lv = levels[table.header[static_cast<size_t>(col)]];
        x(i, static_cast<Eigen::Index>(f)) =
            cell == lv[static_cast<size_t>(level)] ? 1.0 : 0.0;
      }
    }
  }

  LoadedDataset out;
  out.population = build_population(x, y);
  out.feature_names = std::move(feature_names);
  out.n_dropped = n_dropped;
  const auto it = std::find(out.feature_names.begin(), out.feature_names.end(),
                            schema.labeling_covariate);
  out.labeling_index = static_cast<int>(it - out.feature_names.begin());
  return out;
}

LabelingDesign impose_labeling(const FinitePopulation& pop, double intercept,
                               double slope, int labeling_covariate_index,
                               std::uint64_t seed) {
  if (labeling_covariate_index < 0 || labeling_covariate_index >= pop.n_covariates()) {
    throw DimensionMismatch("labeling covariate index out of range");
  }
  const Eigen::Index n = pop.n_units();
  Eigen::VectorXd xi(n);
  Eigen::VectorXi r(n);
  std::mt19937_64 engine(rng::derive(seed, 0x1abe1u));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    xi[i] = sigmoid(intercept + slope * pop.covariates(i, labeling_covariate_index));
    r[i] = unif(engine) < xi[i] ? 1 : 0;
  }
  return build_design(xi, r);
}

Eigen::VectorXd fit_outcome_model(const FinitePopulation& pop, const LabelingDesign& design) {
  check_same_units(pop, design);
  const Eigen::Index p = pop.n_covariates();
  if (design.n_lab <= p + 1) {
    throw InsufficientLabels("need more labeled rows than regression coefficients");
  }
  const auto labeled = labeled_indices(design);
  const auto n = static_cast<Eigen::Index>(labeled.size());
  Eigen::MatrixXd design_matrix(n, p + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int i = labeled[static_cast<size_t>(k)];
    design_matrix(k, 0) = 1.0;
    design_matrix.row(k).tail(p) = pop.covariates.row(i);
    y[k] = pop.outcomes[i];
  }

  // Unlike the calibration estimator, a rank-deficient outcome model is an
  // input error here.
  Eigen::MatrixXd gram = design_matrix.transpose() * design_matrix;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) {
    throw SingularInformation("outcome regression is rank deficient");
  }
  const Eigen::VectorXd coef = lu.solve(design_matrix.transpose() * y);
  return Eigen::VectorXd::Constant(pop.n_units(), coef[0]) +
         pop.covariates * coef.tail(p);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  const LoadedDataset data = load_csv(config.input_path, config.schema);
  const LabelingDesign design =
      impose_labeling(data.population, config.labeling_intercept, config.labeling_slope,
                      data.labeling_index, config.seed);
  const Eigen::VectorXd yhat = fit_outcome_model(data.population, design);
  const FinitePopulation pop = with_predictions(data.population, yhat);

  LabelingDesign used = design;
  if (config.xi_model == XiModel::EstimatedXi && design.n_lab < design.n_units()) {
    // The labeling mechanism depends on one covariate, so the propensity
    // model regresses R on that column alone.
    const Eigen::MatrixXd x_lab = pop.covariates.col(data.labeling_index);
    const LogisticModel propensity = fit_logistic(x_lab, design.indicators);
    used = build_design(predict_xi(propensity, x_lab), design.indicators);
  }

  PipelineResult result;
  result.truth = pop.outcomes.mean();
  result.n_units = static_cast<int>(pop.n_units());
  result.n_lab = design.n_lab;
  result.n_dropped = data.n_dropped;
  result.estimates.push_back(classic_mean(pop, used, config.ci_level));
  result.estimates.push_back(horvitz_thompson(pop, used, config.ci_level));
  result.estimates.push_back(hajek(pop, used, config.ci_level));
  result.estimates.push_back(ppi_estimate(pop, used, RectifierForm::Unweighted, config.ci_level));
  result.estimates.push_back(ppi_estimate(pop, used, RectifierForm::Hajek, config.ci_level));
  return result;
}

std::string pipeline_result_csv(const PipelineResult& result) {
  std::string out = "estimator,estimate,std_error,lower,upper\n";
  for (const auto& est : result.estimates) {
    out += to_string(est.tag) + "," + format_sig6(est.estimate) + "," +
           format_sig6(est.std_error) + "," + format_sig6(est.ci_lower) + "," +
           format_sig6(est.ci_upper) + "\n";
  }
  out += "truth," + format_sig6(result.truth) + ",,,\n";
  return out;
}

std::string pipeline_result_table(const PipelineResult& result) {
  std::string out = "rows: " + std::to_string(result.n_units) +
                    "  labeled: " + std::to_string(result.n_lab) +
                    "  dropped: " + std::to_string(result.n_dropped) +
                    "  full-data mean: " + format_sig6(result.truth) + "\n";
  TableWriter table({"estimator", "estimate", "std_error", "lower", "upper"});
  for (const auto& est : result.estimates) {
    table.add_row({to_string(est.tag), format_sig6(est.estimate),
                   format_sig6(est.std_error), format_sig6(est.ci_lower),
                   format_sig6(est.ci_upper)});
  }
  return out + table.str();
}

FixtureInfo write_fixture_csv(const std::string& path, int n_rows, std::uint64_t seed) {
  std::mt19937_64 engine(rng::derive(seed, 0xf1cu));
  std::uniform_int_distribution<int> age_dist(20, 79);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  static const char* genders[] = {"Female", "Male"};
  static const char* races[] = {"Black", "Hispanic", "Other", "White"};
  static const double race_effect[] = {0.9, 0.4, 0.0, 0.2};

  std::ofstream out(path);
  if (!out) throw FileError("cannot write " + path);
  out << "Age,Gender,Waist,Arm,Leg,Race,BMI\n";

  char buf[256];
  double outcome_sum = 0.0;
  for (int i = 0; i < n_rows; ++i) {
    const int age = age_dist(engine);
    const int gender = unif(engine) < 0.5 ? 1 : 0;
    const double u_race = unif(engine);
    const int race = u_race < 0.22 ? 0 : (u_race < 0.40 ? 1 : (u_race < 0.52 ? 2 : 3));
    const double waist = 70.0 + 0.35 * age + 8.0 * normal(engine);
    const double arm = 26.0 + 0.04 * age + 2.5 * normal(engine);
    const double leg = 42.0 - 0.04 * age + 3.0 * normal(engine);
    const double bmi = 18.0 + 0.12 * age + 0.16 * (waist - 70.0) + 0.5 * gender +
                       race_effect[race] + 1.8 * normal(engine);
    outcome_sum += bmi;
    std::snprintf(buf, sizeof buf, "%d,%s,%.2f,%.2f,%.2f,%s,%.3f\n", age,
                  genders[gender], waist, arm, leg, races[race], bmi);
    out << buf;
  }
  out.close();

  // Truth must match the file contents, so recompute it from the rounded
  // values we actually wrote.
  DatasetSchema schema;
  schema.outcome_column = "BMI";
  schema.covariate_columns = {"Age", "Gender", "Waist", "Arm", "Leg", "Race"};
  schema.labeling_covariate = "Age";
  schema.categorical_columns = {"Gender", "Race"};
  const LoadedDataset loaded = load_csv(path, schema);
  return FixtureInfo{static_cast<int>(loaded.population.n_units()),
                     loaded.population.outcomes.mean()};
}

}  // namespace ppiw
