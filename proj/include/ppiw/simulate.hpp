#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppiw/ppi.hpp"
#include "ppiw/types.hpp"

namespace ppiw {

enum class Dgp { BinaryLogit, FacetDesign };

struct SimulationConfig {
  int n_units = 500;
  int n_replicates = 200;
  Dgp dgp = Dgp::BinaryLogit;
  std::optional<double> p_lab;  // labeled proportion for FacetDesign
  XiModel xi_model = XiModel::EstimatedXi;
  std::vector<EstimatorTag> estimators = {
      EstimatorTag::Classic, EstimatorTag::HT, EstimatorTag::Hajek,
      EstimatorTag::PPI, EstimatorTag::PPI_Hajek};
  double ci_level = 0.95;
  std::uint64_t seed = 1;
  int threads = 0;     // 0 = all hardware threads
  int cross_folds = 5; // used when CrossPPI is requested
  int n_bins = 0;      // BinSmooth; 0 = ceil(sqrt(n_lab))
};

/// One simulated dataset and its estimates. `estimates` aligns with the
/// config's estimator list; entries are empty when that estimator failed.
struct ReplicateRecord {
  double truth = 0.0;
  int n_lab = 0;
  int attempts = 1;  // 1 + number of regenerated datasets
  std::vector<std::optional<EstimateWithCI>> estimates;
  std::vector<std::string> estimator_errors;
};

struct EstimatorSummary {
  EstimatorTag tag = EstimatorTag::Classic;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double mean_width = 0.0;
  double coverage = 0.0;
  double avg_n_lab = 0.0;
  int n_failed = 0;
};

struct SimulationReport {
  SimulationConfig config;
  double truth = 0.0;  // mean of per-replicate finite-population truths
  std::vector<EstimatorSummary> rows;
  int n_regenerated = 0;
};

/// Single-covariate binary-outcome population with labeling probability
/// increasing in the covariate: X ~ N(0,1), Y ~ Bernoulli(sigmoid(X)),
/// xi = sigmoid(0.5 X), R ~ Bernoulli(xi), predictions sigmoid(X + eps)
/// with eps ~ N(0, 0.5^2).
std::pair<FinitePopulation, LabelingDesign> dgp_binary_logit(int n_units, std::uint64_t seed);

/// Same outcome/prediction laws, with xi = sigmoid(a + 0.5 X) where the
/// intercept a is solved so that the average inclusion probability equals
/// p_lab. p_lab = 1 is the degenerate census hook (everything labeled).
std::pair<FinitePopulation, LabelingDesign> dgp_facet(int n_units, double p_lab,
                                                      std::uint64_t seed);

/// Replicate records for the first `count` replicates of the configured run.
/// Deterministic in (config, count); replicates derive their randomness from
/// (seed, replicate index), so records do not depend on thread scheduling.
std::vector<ReplicateRecord> run_replicates(const SimulationConfig& config, int count);

SimulationReport run_simulation(const SimulationConfig& config);

struct IntervalRow {
  int replicate = 0;
  EstimatorTag tag = EstimatorTag::Classic;
  double lower = 0.0;
  double upper = 0.0;
  bool covered = false;
};

/// Per-replicate intervals for the first k replicates (plot-ready).
std::vector<IntervalRow> first_k_intervals(const SimulationConfig& config, int k);

std::string simulation_report_csv(const SimulationReport& report);
std::string simulation_report_table(const SimulationReport& report);
std::string intervals_csv(const std::vector<IntervalRow>& rows);
std::string intervals_table(const std::vector<IntervalRow>& rows);

}  // namespace ppiw
