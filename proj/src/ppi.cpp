#include "ppiw/ppi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ppiw/estimators.hpp"
#include "ppiw/propensity.hpp"
#include "ppiw/rng.hpp"

namespace ppiw {

namespace {

const Eigen::VectorXd& require_predictions(const FinitePopulation& pop) {
  if (!pop.predictions) {
    throw MissingPredictions("population carries no predictions");
  }
  return *pop.predictions;
}

void require_labels(const LabelingDesign& design, int minimum) {
  if (design.n_lab < minimum) {
    throw NoLabeledUnits("rectifier needs at least " + std::to_string(minimum) +
                         " labeled units, found " + std::to_string(design.n_lab));
  }
}

// Residuals yhat - y restricted to the given units, with matching xi.
struct ResidualSet {
  std::vector<double> resid;
  std::vector<double> xi;
};

ResidualSet residuals_at(const FinitePopulation& pop, const LabelingDesign& design,
                         const std::vector<int>& units) {
  const Eigen::VectorXd& yhat = require_predictions(pop);
  ResidualSet out;
  out.resid.reserve(units.size());
  out.xi.reserve(units.size());
  for (int i : units) {
    out.resid.push_back(yhat[i] - pop.outcomes[i]);
    out.xi.push_back(design.inclusion_probs[i]);
  }
  return out;
}

Rectifier unweighted_from(const ResidualSet& r) {
  const double n = static_cast<double>(r.resid.size());
  const double mean = std::accumulate(r.resid.begin(), r.resid.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : r.resid) ss += (e - mean) * (e - mean);
  return Rectifier{mean, ss / (n - 1.0) / n, RectifierForm::Unweighted};
}

// HT form over a unit set whose effective inclusion probability is
// xi_i * thinning (thinning = 1 for the full labeled set).
Rectifier ht_from(const ResidualSet& r, double n_units, double thinning) {
  double total = 0.0, var = 0.0;
  for (size_t k = 0; k < r.resid.size(); ++k) {
    const double q = r.xi[k] * thinning;
    total += r.resid[k] / q;
    var += (1.0 - q) * r.resid[k] * r.resid[k] / (q * q);
  }
  return Rectifier{total / n_units, var / (n_units * n_units), RectifierForm::HT};
}

Rectifier hajek_from(const ResidualSet& r) {
  double total = 0.0, n_hat = 0.0;
  for (size_t k = 0; k < r.resid.size(); ++k) {
    total += r.resid[k] / r.xi[k];
    n_hat += 1.0 / r.xi[k];
  }
  const double value = total / n_hat;
  double var = 0.0;
  for (size_t k = 0; k < r.resid.size(); ++k) {
    const double d = r.resid[k] - value;
    var += (1.0 - r.xi[k]) * d * d / (r.xi[k] * r.xi[k]);
  }
  return Rectifier{value, var / (n_hat * n_hat), RectifierForm::Hajek};
}

double prediction_term_variance(const FinitePopulation& pop, const LabelingDesign& design,
                                VarianceMode mode) {
  if (mode == VarianceMode::FinitePopulation) return 0.0;
  const Eigen::VectorXd& yhat = require_predictions(pop);
  std::vector<double> unlabeled;
  for (Eigen::Index i = 0; i < pop.n_units(); ++i) {
    if (design.indicators[i] == 0) unlabeled.push_back(yhat[i]);
  }
  if (unlabeled.size() < 2) return 0.0;
  const double n = static_cast<double>(unlabeled.size());
  const double mean = std::accumulate(unlabeled.begin(), unlabeled.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : unlabeled) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0) / n;
}

EstimatorTag tag_for(RectifierForm form) {
  switch (form) {
    case RectifierForm::Unweighted: return EstimatorTag::PPI;
    case RectifierForm::HT: return EstimatorTag::PPI_HT;
    case RectifierForm::Hajek: return EstimatorTag::PPI_Hajek;
  }
  return EstimatorTag::PPI;
}

}  // namespace

Rectifier rectifier_unweighted(const FinitePopulation& pop, const LabelingDesign& design) {
  check_same_units(pop, design);
  require_predictions(pop);
  require_labels(design, 2);
  return unweighted_from(residuals_at(pop, design, labeled_indices(design)));
}

Rectifier rectifier_ht(const FinitePopulation& pop, const LabelingDesign& design) {
  check_same_units(pop, design);
  require_predictions(pop);
  require_labels(design, 1);
  return ht_from(residuals_at(pop, design, labeled_indices(design)),
                 static_cast<double>(pop.n_units()), 1.0);
}

Rectifier rectifier_hajek(const FinitePopulation& pop, const LabelingDesign& design) {
  check_same_units(pop, design);
  require_predictions(pop);
  require_labels(design, 1);
  return hajek_from(residuals_at(pop, design, labeled_indices(design)));
}

Rectifier make_rectifier(const FinitePopulation& pop, const LabelingDesign& design,
                         RectifierForm form) {
  switch (form) {
    case RectifierForm::Unweighted: return rectifier_unweighted(pop, design);
    case RectifierForm::HT: return rectifier_ht(pop, design);
    case RectifierForm::Hajek: return rectifier_hajek(pop, design);
  }
  throw Error("unknown rectifier form");
}

EstimateWithCI ppi_estimate(const FinitePopulation& pop, const LabelingDesign& design,
                            RectifierForm form, double level, VarianceMode mode) {
  const Eigen::VectorXd& yhat = require_predictions(pop);
  const Rectifier rect = make_rectifier(pop, design, form);
  const double prediction_term = yhat.mean();
  const double var = prediction_term_variance(pop, design, mode) + rect.variance;
  return make_estimate(prediction_term - rect.value, std::sqrt(var), level, tag_for(form));
}

std::vector<std::vector<int>> FoldAssignment::fold_members() const {
  std::vector<std::vector<int>> members(static_cast<size_t>(n_folds));
  for (size_t i = 0; i < fold_of_unit.size(); ++i) {
    if (fold_of_unit[i] >= 0) {
      members[static_cast<size_t>(fold_of_unit[i])].push_back(static_cast<int>(i));
    }
  }
  return members;
}

FoldAssignment assign_folds(const LabelingDesign& design, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw FoldTooSmall("need at least two folds");
  if (design.n_lab < n_folds) {
    throw FoldTooSmall("cannot split " + std::to_string(design.n_lab) +
                       " labeled units into " + std::to_string(n_folds) + " folds");
  }
  std::vector<int> labeled = labeled_indices(design);
  std::mt19937_64 engine(rng::derive(seed, 0x70a6d5u));
  std::shuffle(labeled.begin(), labeled.end(), engine);

  FoldAssignment assignment;
  assignment.n_folds = n_folds;
  assignment.fold_of_unit.assign(static_cast<size_t>(design.n_units()), -1);
  for (size_t k = 0; k < labeled.size(); ++k) {
    assignment.fold_of_unit[static_cast<size_t>(labeled[k])] =
        static_cast<int>(k % static_cast<size_t>(n_folds));
  }
  return assignment;
}

Trainer ols_trainer() {
  return [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y) -> PredictFn {
    Eigen::MatrixXd design(x.rows(), x.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x;
    Eigen::VectorXd coef =
        weighted_least_squares(design, y, Eigen::VectorXd::Ones(x.rows()));
    return [coef](const Eigen::MatrixXd& xx) -> Eigen::VectorXd {
      return Eigen::VectorXd::Constant(xx.rows(), coef[0]) + xx * coef.tail(coef.size() - 1);
    };
  };
}

Trainer logistic_trainer() {
  return [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y) -> PredictFn {
    Eigen::VectorXi r(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) throw Error("logistic trainer needs a 0/1 response");
      r[i] = static_cast<int>(y[i]);
    }
    LogisticModel model = fit_logistic(x, r);
    return [model](const Eigen::MatrixXd& xx) -> Eigen::VectorXd {
      return predict_xi(model, xx);
    };
  };
}

EstimateWithCI cross_ppi(const FinitePopulation& pop, const LabelingDesign& design,
                         int n_folds, const Trainer& trainer, RectifierForm form,
                         std::uint64_t seed, double level, VarianceMode mode) {
  check_same_units(pop, design);
  if (design.n_lab < 2 * n_folds) {
    throw FoldTooSmall("cross-fitting needs at least two labeled units per fold");
  }
  const FoldAssignment folds = assign_folds(design, n_folds, seed);
  const auto members = folds.fold_members();
  for (const auto& fold : members) {
    if (fold.size() < 2) throw FoldTooSmall("a fold ended up with fewer than two labeled units");
  }
  const double n_units = static_cast<double>(pop.n_units());
  const double n_lab = static_cast<double>(design.n_lab);

  double estimate_sum = 0.0;
  double variance_sum = 0.0;
  double prediction_var_sum = 0.0;
  for (int k = 0; k < n_folds; ++k) {
    const auto& fold = members[static_cast<size_t>(k)];

    // Train on labeled units outside fold k.
    std::vector<int> train;
    for (const auto& other : members) {
      if (&other != &fold) train.insert(train.end(), other.begin(), other.end());
    }
    std::sort(train.begin(), train.end());
    Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train.size()), pop.n_covariates());
    Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
    for (size_t t = 0; t < train.size(); ++t) {
      x_train.row(static_cast<Eigen::Index>(t)) = pop.covariates.row(train[t]);
      y_train[static_cast<Eigen::Index>(t)] = pop.outcomes[train[t]];
    }
    const PredictFn predict = trainer(x_train, y_train);
    const Eigen::VectorXd yhat = predict(pop.covariates);
    if (yhat.size() != pop.n_units()) {
      throw DimensionMismatch("trainer returned the wrong number of predictions");
    }

    const FinitePopulation fold_pop = with_predictions(pop, yhat);
    const ResidualSet resid = residuals_at(fold_pop, design, fold);
    Rectifier rect;
    switch (form) {
      case RectifierForm::Unweighted:
        rect = unweighted_from(resid);
        break;
      case RectifierForm::HT:
        // A labeled unit lands in fold k with probability n_k / n_lab.
        rect = ht_from(resid, n_units, static_cast<double>(fold.size()) / n_lab);
        break;
      case RectifierForm::Hajek:
        rect = hajek_from(resid);
        break;
    }
    estimate_sum += yhat.mean() - rect.value;
    variance_sum += rect.variance;
    prediction_var_sum += prediction_term_variance(fold_pop, design, mode);
  }

  const double k_folds = static_cast<double>(n_folds);
  const double estimate = estimate_sum / k_folds;
  // Fold prediction means share the same units, so their variances are
  // averaged rather than treated as independent.
  const double variance = variance_sum / (k_folds * k_folds) + prediction_var_sum / k_folds;
  return make_estimate(estimate, std::sqrt(variance), level, EstimatorTag::CrossPPI);
}

}  // namespace ppiw
