#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "ppiw/errors.hpp"

namespace ppiw {

/// A fixed set of N units with covariates, outcomes, and (optionally) model
/// predictions for every unit. Immutable after construction.
struct FinitePopulation {
  Eigen::MatrixXd covariates;                 // N x p
  Eigen::VectorXd outcomes;                   // length N
  std::optional<Eigen::VectorXd> predictions; // length N when present

  Eigen::Index n_units() const { return outcomes.size(); }
  Eigen::Index n_covariates() const { return covariates.cols(); }
};

/// Per-unit label-inclusion probabilities and the realized 0/1 indicators.
struct LabelingDesign {
  Eigen::VectorXd inclusion_probs;  // each in (0, 1]
  Eigen::VectorXi indicators;       // each 0 or 1
  int n_lab = 0;                    // sum of indicators

  Eigen::Index n_units() const { return indicators.size(); }
};

enum class EstimatorTag {
  Classic,
  HT,
  Hajek,
  GREG,
  BinSmooth,
  PPI,
  PPI_HT,
  PPI_Hajek,
  CrossPPI,
};

std::string to_string(EstimatorTag tag);
EstimatorTag estimator_tag_from_string(const std::string& name);

/// Point estimate with a symmetric normal confidence interval:
/// [estimate - z * se, estimate + z * se] with z the (1+level)/2 quantile.
struct EstimateWithCI {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double level = 0.95;
  EstimatorTag tag = EstimatorTag::Classic;

  bool covers(double value) const { return ci_lower <= value && value <= ci_upper; }
  double width() const { return ci_upper - ci_lower; }
};

enum class XiModel { TrueXi, EstimatedXi };

double normal_quantile(double p);

EstimateWithCI make_estimate(double estimate, double std_error, double level,
                             EstimatorTag tag);

FinitePopulation build_population(const Eigen::MatrixXd& covariates,
                                  const Eigen::VectorXd& outcomes,
                                  const std::optional<Eigen::VectorXd>& predictions = std::nullopt);

/// Copy of `pop` with the prediction vector replaced.
FinitePopulation with_predictions(const FinitePopulation& pop,
                                  const Eigen::VectorXd& predictions);

LabelingDesign build_design(const Eigen::VectorXd& inclusion_probs,
                            const Eigen::VectorXi& indicators);

/// Indices with R_i = 1, in unit order.
std::vector<int> labeled_indices(const LabelingDesign& design);

void check_same_units(const FinitePopulation& pop, const LabelingDesign& design);

}  // namespace ppiw
