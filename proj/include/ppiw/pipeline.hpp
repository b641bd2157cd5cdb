#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppiw/types.hpp"

namespace ppiw {

enum class MissingPolicy { DropRows };

/// Column roles for a delimited dataset. Categorical covariates are one-hot
/// encoded with their first (lexicographically smallest) level dropped; the
/// outcome and the labeling covariate must be numeric.
struct DatasetSchema {
  std::string outcome_column;
  std::vector<std::string> covariate_columns;
  std::string labeling_covariate;
  std::vector<std::string> categorical_columns;
};

struct LoadedDataset {
  FinitePopulation population;            // no predictions yet
  std::vector<std::string> feature_names; // expanded covariate names
  int labeling_index = -1;                // column of the labeling covariate
  int n_dropped = 0;                      // rows removed for missing values
};

/// Read a comma-delimited file with a header row; a blank cell is missing.
/// Rows missing any schema column are dropped under MissingPolicy::DropRows.
LoadedDataset load_csv(const std::string& path, const DatasetSchema& schema,
                       MissingPolicy policy = MissingPolicy::DropRows);

/// Bernoulli labeling with xi_i = sigmoid(intercept + slope * x_i) on the
/// chosen covariate column.
LabelingDesign impose_labeling(const FinitePopulation& pop, double intercept,
                               double slope, int labeling_covariate_index,
                               std::uint64_t seed);

/// Least-squares fit of the outcome on all covariates over labeled rows;
/// returns predictions for every row.
Eigen::VectorXd fit_outcome_model(const FinitePopulation& pop, const LabelingDesign& design);

struct PipelineConfig {
  std::string input_path;
  DatasetSchema schema;
  double labeling_intercept = 3.0;
  double labeling_slope = -0.05;
  XiModel xi_model = XiModel::TrueXi;
  double ci_level = 0.95;
  std::uint64_t seed = 1;
};

struct PipelineResult {
  std::vector<EstimateWithCI> estimates;  // Classic, HT, Hajek, PPI, PPI_Hajek
  double truth = 0.0;                     // full-data outcome mean
  int n_units = 0;
  int n_lab = 0;
  int n_dropped = 0;
};

/// Load, label, fit, predict, and compare the five estimators against the
/// full-data mean.
PipelineResult run_pipeline(const PipelineConfig& config);

std::string pipeline_result_csv(const PipelineResult& result);
std::string pipeline_result_table(const PipelineResult& result);

/// Columns of `path` that contain a non-numeric, non-blank cell (candidates
/// for categorical treatment).
std::vector<std::string> sniff_categorical_columns(const std::string& path);

/// Header row of `path`.
std::vector<std::string> csv_header(const std::string& path);

struct FixtureInfo {
  int n_rows = 0;
  double mean_outcome = 0.0;
};

/// Write a synthetic body-measurements dataset (Age, Gender, Waist, Arm,
/// Leg, Race, BMI) with a strong age gradient in the outcome. Returns the
/// full-data outcome mean. Deterministic given (n_rows, seed).
FixtureInfo write_fixture_csv(const std::string& path, int n_rows, std::uint64_t seed);

}  // namespace ppiw
