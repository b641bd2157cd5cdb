#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "ppiw/types.hpp"

namespace ppiw {

enum class RectifierForm { Unweighted, HT, Hajek };

/// Estimate of the mean prediction error over labeled units, used to debias
/// the population-mean of the predictions.
struct Rectifier {
  double value = 0.0;
  double variance = 0.0;
  RectifierForm form = RectifierForm::Unweighted;
};

/// How the prediction-term variance is counted. The finite-population mean
/// of the predictions is a constant once predictions cover all units, so the
/// default contributes zero; superpopulation mode adds the sample variance of
/// the unlabeled predictions over the unlabeled-pool size.
enum class VarianceMode { FinitePopulation, Superpopulation };

Rectifier rectifier_unweighted(const FinitePopulation& pop, const LabelingDesign& design);
Rectifier rectifier_ht(const FinitePopulation& pop, const LabelingDesign& design);
Rectifier rectifier_hajek(const FinitePopulation& pop, const LabelingDesign& design);
Rectifier make_rectifier(const FinitePopulation& pop, const LabelingDesign& design,
                         RectifierForm form);

/// Prediction-powered estimate of the population mean:
/// mean of the predictions over all units minus the rectifier.
EstimateWithCI ppi_estimate(const FinitePopulation& pop, const LabelingDesign& design,
                            RectifierForm form, double level = 0.95,
                            VarianceMode mode = VarianceMode::FinitePopulation);

/// Assignment of labeled units to cross-fitting folds.
struct FoldAssignment {
  int n_folds = 0;
  std::vector<int> fold_of_unit;  // size N; -1 for unlabeled units

  std::vector<std::vector<int>> fold_members() const;
};

/// Balanced uniformly-random partition of the labeled units; fold sizes
/// differ by at most one. Deterministic given the seed.
FoldAssignment assign_folds(const LabelingDesign& design, int n_folds, std::uint64_t seed);

/// Maps a covariate matrix to predictions.
using PredictFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;
/// Fits a prediction function from labeled (X, y) pairs.
using Trainer = std::function<PredictFn(const Eigen::MatrixXd&, const Eigen::VectorXd&)>;

/// Ordinary least squares with an intercept.
Trainer ols_trainer();
/// Logistic regression with an intercept; the response must be 0/1.
Trainer logistic_trainer();

/// Cross-fitted variant: for each fold, a model trained on the other folds
/// supplies the predictions, and the rectifier is computed over that fold's
/// labeled units only. Fold terms are averaged.
EstimateWithCI cross_ppi(const FinitePopulation& pop, const LabelingDesign& design,
                         int n_folds, const Trainer& trainer, RectifierForm form,
                         std::uint64_t seed, double level = 0.95,
                         VarianceMode mode = VarianceMode::FinitePopulation);

}  // namespace ppiw
