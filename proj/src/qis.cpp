#include "ppiw/qis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppiw/report.hpp"
#include "ppiw/rng.hpp"

namespace ppiw {

namespace {

constexpr std::uint64_t kQisStream = 0x514953u;  // distinct streams per estimator
constexpr std::uint64_t kMcStream = 0x4d43u;

std::vector<double> sorted_uniforms(int n, std::uint64_t key) {
  std::vector<double> u(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) u[static_cast<size_t>(i)] = rng::uniform_at(key, static_cast<std::uint64_t>(i));
  std::sort(u.begin(), u.end());
  return u;
}

}  // namespace

double trapezoid_over_nodes(const QisProblem& problem, const std::vector<double>& nodes) {
  double sum = 0.0;
  double prev_node = 0.0;
  double prev_value = problem.quantile_fn(0.0);
  for (double node : nodes) {
    const double value = problem.quantile_fn(node);
    sum += 0.5 * (node - prev_node) * (prev_value + value);
    prev_node = node;
    prev_value = value;
  }
  sum += 0.5 * (1.0 - prev_node) * (prev_value + problem.quantile_fn(1.0));
  return sum;
}

double qis_estimate(const QisProblem& problem, int n, std::uint64_t seed) {
  if (n < 1) throw Error("node count must be positive");
  return trapezoid_over_nodes(problem, sorted_uniforms(n, rng::derive(seed, kQisStream)));
}

double mc_rectangle_estimate(const QisProblem& problem, int n, std::uint64_t seed) {
  if (n < 1) throw Error("node count must be positive");
  const std::uint64_t key = rng::derive(seed, kMcStream);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += problem.quantile_fn(rng::uniform_at(key, static_cast<std::uint64_t>(i)));
  }
  return sum / n;
}

namespace {

double loglog_slope(const std::vector<RateRow>& rows, double RateRow::*column) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(rows.size());
  for (const RateRow& row : rows) {
    const double mse = row.*column;
    if (!(mse > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(static_cast<double>(row.n));
    const double y = std::log(mse);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = sxx - sx * sx / n;
  if (denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (sxy - sx * sy / n) / denom;
}

}  // namespace

RateReport rate_report(const QisProblem& problem, const std::vector<int>& n_grid,
                       int n_seeds, std::uint64_t base_seed) {
  if (!problem.true_value) {
    throw MissingTruth("rate report needs the true integral value");
  }
  if (n_grid.empty() || n_seeds < 1) throw Error("rate report needs nodes and seeds");
  for (size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw Error("node grid must be ascending");
  }
  const double truth = *problem.true_value;

  RateReport report;
  for (int n : n_grid) {
    RateRow row;
    row.n = n;
    for (int s = 0; s < n_seeds; ++s) {
      const std::uint64_t seed = rng::derive(base_seed, static_cast<std::uint64_t>(n),
                                             static_cast<std::uint64_t>(s));
      const double dq = qis_estimate(problem, n, seed) - truth;
      const double dm = mc_rectangle_estimate(problem, n, seed) - truth;
      row.mse_qis += dq * dq;
      row.mse_mc += dm * dm;
    }
    row.mse_qis /= n_seeds;
    row.mse_mc /= n_seeds;
    report.rows.push_back(row);
  }
  report.slope_qis = loglog_slope(report.rows, &RateRow::mse_qis);
  report.slope_mc = loglog_slope(report.rows, &RateRow::mse_mc);
  return report;
}

std::string rate_report_csv(const RateReport& report) {
  std::string out = "n,mse_qis,mse_mc,slope_qis,slope_mc\n";
  for (const RateRow& row : report.rows) {
    out += std::to_string(row.n) + "," + format_sig6(row.mse_qis) + "," +
           format_sig6(row.mse_mc) + "," + format_sig6(report.slope_qis) + "," +
           format_sig6(report.slope_mc) + "\n";
  }
  return out;
}

std::string rate_report_table(const RateReport& report) {
  TableWriter table({"n", "mse_qis", "mse_mc"});
  for (const RateRow& row : report.rows) {
    table.add_row({std::to_string(row.n), format_sig6(row.mse_qis), format_sig6(row.mse_mc)});
  }
  std::string out = table.str();
  out += "log-log slope: qis " + format_sig6(report.slope_qis) +
         ", mc " + format_sig6(report.slope_mc) + "\n";
  return out;
}

}  // namespace ppiw
