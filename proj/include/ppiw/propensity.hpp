#pragma once

#include <Eigen/Core>
#include <vector>

#include "ppiw/types.hpp"

namespace ppiw {

/// Logistic regression model for label-inclusion probabilities,
/// P(R = 1 | x) = sigmoid(b0 + x' b). Coefficients store the intercept first.
struct LogisticModel {
  Eigen::VectorXd coefficients;
  bool converged = false;
  int n_iterations = 0;
  std::vector<double> log_likelihood_path;  // one entry per accepted iterate
};

/// Predicted probabilities are clamped below at this floor so that inverse
/// weights stay finite.
inline constexpr double kXiFloor = 1e-6;

/// Fit by iteratively reweighted least squares (exact Newton steps with
/// step-halving, so the log-likelihood never decreases). Convergence means
/// the largest absolute coefficient update fell below `tol`; running out of
/// iterations reports converged = false rather than throwing.
LogisticModel fit_logistic(const Eigen::MatrixXd& covariates,
                           const Eigen::VectorXi& response,
                           int max_iter = 100, double tol = 1e-10);

/// sigmoid(b0 + x' b) per row, clamped to [kXiFloor, 1].
Eigen::VectorXd predict_xi(const LogisticModel& model, const Eigen::MatrixXd& covariates);

/// Numerically stable logistic sigmoid.
double sigmoid(double x);

/// Bernoulli log-likelihood of `response` under linear predictor `eta`.
double bernoulli_log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXi& response);

}  // namespace ppiw
