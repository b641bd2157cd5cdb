#include "ppiw/propensity.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace ppiw {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bernoulli_log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXi& response) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double x = eta[i];
    // log(1 + exp(x)) without overflow
    const double softplus = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    ll += response[i] * x - softplus;
  }
  return ll;
}

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& covariates) {
  Eigen::MatrixXd design(covariates.rows(), covariates.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(covariates.cols()) = covariates;
  return design;
}

}  // namespace

LogisticModel fit_logistic(const Eigen::MatrixXd& covariates,
                           const Eigen::VectorXi& response,
                           int max_iter, double tol) {
  const Eigen::Index n = response.size();
  if (covariates.rows() != n) {
    throw DimensionMismatch("covariate rows do not match response length");
  }
  int ones = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (response[i] != 0 && response[i] != 1) throw Error("response must be 0/1");
    ones += response[i];
  }
  if (ones == 0 || ones == n) {
    throw DegenerateResponse("response is constant; the slope is not identified");
  }

  const Eigen::MatrixXd design = with_intercept(covariates);
  const Eigen::Index dim = design.cols();

  LogisticModel model;
  model.coefficients = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  double ll = bernoulli_log_likelihood(eta, response);
  model.log_likelihood_path.push_back(ll);

  for (int iter = 1; iter <= max_iter; ++iter) {
    model.n_iterations = iter;

    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = sigmoid(eta[i]);
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
    Eigen::VectorXd resid = response.cast<double>() - mu;
    Eigen::VectorXd score = design.transpose() * resid;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    if (!lu.isInvertible()) {
      if (iter == 1) {
        throw SingularInformation("weighted normal equations are singular; "
                                  "check for collinear covariates");
      }
      break;  // weights collapsed along the way; report the best iterate
    }
    Eigen::VectorXd delta = lu.solve(score);
    if (!delta.allFinite()) break;

    // Step-halving keeps the log-likelihood monotone.
    double step = 1.0;
    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_eta;
    double candidate_ll = ll;
    bool improved = false;
    while (step >= 0x1.0p-30) {
      candidate = model.coefficients + step * delta;
      candidate_eta = design * candidate;
      candidate_ll = bernoulli_log_likelihood(candidate_eta, response);
      if (candidate_ll >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved || !candidate.allFinite()) break;

    const double max_update = (step * delta).cwiseAbs().maxCoeff();
    model.coefficients = candidate;
    eta = candidate_eta;
    ll = std::max(ll, candidate_ll);
    model.log_likelihood_path.push_back(ll);

    if (max_update < tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

Eigen::VectorXd predict_xi(const LogisticModel& model, const Eigen::MatrixXd& covariates) {
  if (covariates.cols() + 1 != model.coefficients.size()) {
    throw DimensionMismatch("covariate columns do not match the fitted model dimension");
  }
  const Eigen::VectorXd eta = with_intercept(covariates) * model.coefficients;
  Eigen::VectorXd xi(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    xi[i] = std::min(1.0, std::max(kXiFloor, sigmoid(eta[i])));
  }
  return xi;
}

}  // namespace ppiw
