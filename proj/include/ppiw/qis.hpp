#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ppiw/types.hpp"

namespace ppiw {

/// A univariate integral over [0,1] written through its quantile function:
/// the target is the integral of quantile_fn from 0 to 1. The function must
/// be evaluable at both endpoints.
struct QisProblem {
  std::function<double(double)> quantile_fn;
  std::optional<double> true_value;
  std::string smoothness_note;
};

/// Trapezoid sum over the given interior nodes (sorted ascending) with the
/// endpoints 0 and 1 prepended/appended.
double trapezoid_over_nodes(const QisProblem& problem, const std::vector<double>& nodes);

/// Quantile-importance estimate with n iid Uniform(0,1) nodes: sort the
/// draws, close the ends at 0 and 1, and apply the trapezoid rule. For a
/// twice-differentiable integrand the mean squared error decays like n^-4;
/// linear integrands are integrated exactly.
double qis_estimate(const QisProblem& problem, int n, std::uint64_t seed);

/// Plain Monte Carlo baseline: the average of the integrand over n iid
/// uniforms (rectangle rule at random nodes), with O(1/n) mean squared error.
double mc_rectangle_estimate(const QisProblem& problem, int n, std::uint64_t seed);

struct RateRow {
  int n = 0;
  double mse_qis = 0.0;
  double mse_mc = 0.0;
};

/// Empirical mean-squared errors on a grid of node counts, plus least-squares
/// slopes of log(MSE) against log(n). Slopes are NaN when an MSE column hits
/// exactly zero.
struct RateReport {
  std::vector<RateRow> rows;
  double slope_qis = 0.0;
  double slope_mc = 0.0;
};

RateReport rate_report(const QisProblem& problem, const std::vector<int>& n_grid,
                       int n_seeds, std::uint64_t base_seed = 0);

std::string rate_report_csv(const RateReport& report);
std::string rate_report_table(const RateReport& report);

}  // namespace ppiw
