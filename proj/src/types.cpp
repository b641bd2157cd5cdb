#include "ppiw/types.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <vector>

namespace ppiw {

std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::Classic: return "Classic";
    case EstimatorTag::HT: return "HT";
    case EstimatorTag::Hajek: return "Hajek";
    case EstimatorTag::GREG: return "GREG";
    case EstimatorTag::BinSmooth: return "BinSmooth";
    case EstimatorTag::PPI: return "PPI";
    case EstimatorTag::PPI_HT: return "PPI_HT";
    case EstimatorTag::PPI_Hajek: return "PPI_Hajek";
    case EstimatorTag::CrossPPI: return "CrossPPI";
  }
  return "?";
}

EstimatorTag estimator_tag_from_string(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s == "classic") return EstimatorTag::Classic;
  if (s == "ht") return EstimatorTag::HT;
  if (s == "hajek") return EstimatorTag::Hajek;
  if (s == "greg") return EstimatorTag::GREG;
  if (s == "binsmooth") return EstimatorTag::BinSmooth;
  if (s == "ppi") return EstimatorTag::PPI;
  if (s == "ppiht") return EstimatorTag::PPI_HT;
  if (s == "ppihajek") return EstimatorTag::PPI_Hajek;
  if (s == "crossppi") return EstimatorTag::CrossPPI;
  throw Error("unknown estimator name: " + name);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile: p must lie in (0,1)");
  static const boost::math::normal_distribution<double> std_normal(0.0, 1.0);
  return boost::math::quantile(std_normal, p);
}

EstimateWithCI make_estimate(double estimate, double std_error, double level,
                             EstimatorTag tag) {
  if (!(level > 0.0 && level < 1.0)) throw Error("confidence level must lie in (0,1)");
  if (!std::isfinite(estimate) || !std::isfinite(std_error)) {
    throw NonFiniteValue("estimate or standard error is not finite");
  }
  if (std_error < 0.0) throw Error("standard error must be nonnegative");
  const double z = normal_quantile(0.5 * (1.0 + level));
  EstimateWithCI out;
  out.estimate = estimate;
  out.std_error = std_error;
  out.ci_lower = estimate - z * std_error;
  out.ci_upper = estimate + z * std_error;
  out.level = level;
  out.tag = tag;
  return out;
}

FinitePopulation build_population(const Eigen::MatrixXd& covariates,
                                  const Eigen::VectorXd& outcomes,
                                  const std::optional<Eigen::VectorXd>& predictions) {
  const Eigen::Index n = outcomes.size();
  if (n < 1) throw DimensionMismatch("population must contain at least one unit");
  if (covariates.rows() != n) {
    throw DimensionMismatch("covariate rows (" + std::to_string(covariates.rows()) +
                            ") do not match outcome length (" + std::to_string(n) + ")");
  }
  if (predictions && predictions->size() != n) {
    throw DimensionMismatch("prediction length (" + std::to_string(predictions->size()) +
                            ") does not match outcome length (" + std::to_string(n) + ")");
  }
  if (!covariates.allFinite()) throw NonFiniteValue("covariates contain a non-finite value");
  if (!outcomes.allFinite()) throw NonFiniteValue("outcomes contain a non-finite value");
  if (predictions && !predictions->allFinite()) {
    throw NonFiniteValue("predictions contain a non-finite value");
  }
  return FinitePopulation{covariates, outcomes, predictions};
}

FinitePopulation with_predictions(const FinitePopulation& pop,
                                  const Eigen::VectorXd& predictions) {
  return build_population(pop.covariates, pop.outcomes, predictions);
}

LabelingDesign build_design(const Eigen::VectorXd& inclusion_probs,
                            const Eigen::VectorXi& indicators) {
  if (inclusion_probs.size() != indicators.size()) {
    throw DimensionMismatch("inclusion probabilities and indicators differ in length");
  }
  if (inclusion_probs.size() < 1) throw DimensionMismatch("design must cover at least one unit");
  int n_lab = 0;
  for (Eigen::Index i = 0; i < inclusion_probs.size(); ++i) {
    const double xi = inclusion_probs[i];
    if (!std::isfinite(xi)) throw NonFiniteValue("inclusion probability is not finite");
    if (!(xi > 0.0 && xi <= 1.0)) {
      throw ProbabilityOutOfRange("inclusion probability " + std::to_string(xi) +
                                  " at unit " + std::to_string(i) + " is outside (0,1]");
    }
    const int r = indicators[i];
    if (r != 0 && r != 1) {
      throw Error("indicator at unit " + std::to_string(i) + " is not 0/1");
    }
    n_lab += r;
  }
  return LabelingDesign{inclusion_probs, indicators, n_lab};
}

std::vector<int> labeled_indices(const LabelingDesign& design) {
  std::vector<int> idx;
  idx.reserve(static_cast<size_t>(design.n_lab));
  for (Eigen::Index i = 0; i < design.indicators.size(); ++i) {
    if (design.indicators[i] == 1) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

void check_same_units(const FinitePopulation& pop, const LabelingDesign& design) {
  if (pop.n_units() != design.n_units()) {
    throw DimensionMismatch("population and labeling design cover different unit counts");
  }
}

}  // namespace ppiw
