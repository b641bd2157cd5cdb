#include "ppiw/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace ppiw {

BinSpec make_bin_spec(std::vector<double> edges) {
  if (edges.size() < 2) throw Error("bin spec needs at least two edges");
  for (size_t b = 0; b + 1 < edges.size(); ++b) {
    if (!(edges[b] < edges[b + 1])) throw Error("bin edges must be strictly increasing");
  }
  BinSpec spec;
  spec.midpoints.resize(edges.size() - 1);
  for (size_t b = 0; b + 1 < edges.size(); ++b) {
    spec.midpoints[b] = 0.5 * (edges[b] + edges[b + 1]);
  }
  spec.edges = std::move(edges);
  return spec;
}

BinSpec make_bins(const Eigen::VectorXd& xi, int n_bins, BinStrategy strategy) {
  if (xi.size() == 0) throw Error("cannot bin an empty probability vector");
  if (n_bins < 1) throw Error("bin count must be positive");
  const double lo = xi.minCoeff();
  const double hi = xi.maxCoeff();

  if (hi - lo < 1e-12) {
    // Degenerate range: one bin centered at the common value.
    const double pad = std::max(1e-9, 1e-9 * std::abs(lo));
    return make_bin_spec({lo - pad, hi + pad});
  }

  std::vector<double> edges;
  if (strategy == BinStrategy::EqualWidth) {
    edges.resize(static_cast<size_t>(n_bins) + 1);
    for (int b = 0; b <= n_bins; ++b) {
      edges[static_cast<size_t>(b)] = lo + (hi - lo) * static_cast<double>(b) / n_bins;
    }
    edges.front() = lo;
    edges.back() = hi;
  } else {
    std::vector<double> sorted(xi.data(), xi.data() + xi.size());
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    edges.push_back(lo);
    for (int b = 1; b < n_bins; ++b) {
      const size_t k = (static_cast<size_t>(b) * n) / static_cast<size_t>(n_bins);
      if (k == 0 || k >= n) continue;
      edges.push_back(0.5 * (sorted[k - 1] + sorted[k]));
    }
    edges.push_back(hi);
    // Ties can produce duplicate cut points; collapse them.
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double a, double b) { return !(a < b); }),
                edges.end());
    if (edges.size() < 2) return make_bins(xi, 1, BinStrategy::EqualWidth);
  }
  return make_bin_spec(std::move(edges));
}

int bin_index(const BinSpec& spec, double xi) {
  if (xi < spec.edges.front() || xi > spec.edges.back()) return -1;
  auto it = std::upper_bound(spec.edges.begin(), spec.edges.end(), xi);
  int idx = static_cast<int>(it - spec.edges.begin()) - 1;
  return std::min(idx, spec.n_bins() - 1);  // last bin is right-closed
}

namespace {

void require_labels(const LabelingDesign& design, int minimum) {
  if (design.n_lab < minimum) {
    throw NoLabeledUnits("estimator needs at least " + std::to_string(minimum) +
                         " labeled units, found " + std::to_string(design.n_lab));
  }
}

}  // namespace

EstimateWithCI classic_mean(const FinitePopulation& pop, const LabelingDesign& design,
                            double level) {
  check_same_units(pop, design);
  require_labels(design, 2);
  double sum = 0.0;
  for (int i : labeled_indices(design)) sum += pop.outcomes[i];
  const double n = design.n_lab;
  const double mean = sum / n;
  double ss = 0.0;
  for (int i : labeled_indices(design)) {
    const double d = pop.outcomes[i] - mean;
    ss += d * d;
  }
  const double sample_var = ss / (n - 1.0);
  return make_estimate(mean, std::sqrt(sample_var / n), level, EstimatorTag::Classic);
}

EstimateWithCI horvitz_thompson(const FinitePopulation& pop, const LabelingDesign& design,
                                double level) {
  check_same_units(pop, design);
  require_labels(design, 1);
  const double n_units = static_cast<double>(pop.n_units());
  double total = 0.0, var = 0.0;
  for (int i : labeled_indices(design)) {
    const double y = pop.outcomes[i];
    const double xi = design.inclusion_probs[i];
    total += y / xi;
    var += (1.0 - xi) * y * y / (xi * xi);
  }
  return make_estimate(total / n_units, std::sqrt(var) / n_units, level, EstimatorTag::HT);
}

EstimateWithCI hajek(const FinitePopulation& pop, const LabelingDesign& design,
                     double level) {
  check_same_units(pop, design);
  require_labels(design, 1);
  double total = 0.0, n_hat = 0.0;
  for (int i : labeled_indices(design)) {
    const double xi = design.inclusion_probs[i];
    total += pop.outcomes[i] / xi;
    n_hat += 1.0 / xi;
  }
  const double est = total / n_hat;
  double var = 0.0;
  for (int i : labeled_indices(design)) {
    const double xi = design.inclusion_probs[i];
    const double d = pop.outcomes[i] - est;
    var += (1.0 - xi) * d * d / (xi * xi);
  }
  return make_estimate(est, std::sqrt(var) / n_hat, level, EstimatorTag::Hajek);
}

Eigen::VectorXd weighted_least_squares(const Eigen::MatrixXd& design_matrix,
                                       const Eigen::VectorXd& response,
                                       const Eigen::VectorXd& weights) {
  if (design_matrix.rows() != response.size() || weights.size() != response.size()) {
    throw DimensionMismatch("weighted least squares inputs differ in length");
  }
  const Eigen::Index p = design_matrix.cols();
  const Eigen::VectorXd root_w = weights.cwiseSqrt();
  Eigen::MatrixXd scaled = root_w.asDiagonal() * design_matrix;
  Eigen::VectorXd target = root_w.cwiseProduct(response);

  // Drop columns that are (numerically) spanned by earlier ones, in order.
  std::vector<Eigen::Index> kept;
  Eigen::MatrixXd basis(scaled.rows(), p);  // orthonormalized kept columns
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::VectorXd v = scaled.col(j);
    const double original_norm = v.norm();
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(kept.size()); ++k) {
      v -= basis.col(k).dot(v) * basis.col(k);
    }
    if (v.norm() <= 1e-10 * std::max(1.0, original_norm)) continue;
    basis.col(static_cast<Eigen::Index>(kept.size())) = v / v.norm();
    kept.push_back(j);
  }
  if (kept.empty()) throw SingularInformation("no usable regression columns");

  const auto n_kept = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd reduced(scaled.rows(), n_kept);
  for (Eigen::Index k = 0; k < n_kept; ++k) reduced.col(k) = scaled.col(kept[static_cast<size_t>(k)]);
  Eigen::VectorXd sol = reduced.householderQr().solve(target);

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
  for (Eigen::Index k = 0; k < n_kept; ++k) coef[kept[static_cast<size_t>(k)]] = sol[k];
  return coef;
}

EstimateWithCI greg(const FinitePopulation& pop, const LabelingDesign& design,
                    double level) {
  check_same_units(pop, design);
  const Eigen::Index p = pop.n_covariates();
  require_labels(design, static_cast<int>(p) + 2);
  const auto labeled = labeled_indices(design);
  const auto n = static_cast<Eigen::Index>(labeled.size());
  const double n_units = static_cast<double>(pop.n_units());

  Eigen::MatrixXd design_matrix(n, p + 1);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int i = labeled[static_cast<size_t>(k)];
    design_matrix(k, 0) = 1.0;
    design_matrix.row(k).tail(p) = pop.covariates.row(i);
    y[k] = pop.outcomes[i];
    w[k] = 1.0 / design.inclusion_probs[i];
  }
  const Eigen::VectorXd coef = weighted_least_squares(design_matrix, y, w);
  const Eigen::VectorXd slope = coef.tail(p);

  const Eigen::VectorXd xbar_true = pop.covariates.colwise().mean();
  Eigen::VectorXd xbar_ht = Eigen::VectorXd::Zero(p);
  double ht_total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const int i = labeled[static_cast<size_t>(k)];
    ht_total += w[k] * y[k];
    xbar_ht += w[k] * pop.covariates.row(i).transpose();
  }
  const double ht = ht_total / n_units;
  xbar_ht /= n_units;

  const double est = ht + slope.dot(xbar_true - xbar_ht);

  double var = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const int i = labeled[static_cast<size_t>(k)];
    const double fitted = coef[0] + slope.dot(pop.covariates.row(i));
    const double resid = y[k] - fitted;
    const double xi = design.inclusion_probs[i];
    var += (1.0 - xi) * resid * resid / (xi * xi);
  }
  return make_estimate(est, std::sqrt(var) / n_units, level, EstimatorTag::GREG);
}

EstimateWithCI bin_smooth(const FinitePopulation& pop, const LabelingDesign& design,
                          const BinSpec& spec, double level) {
  check_same_units(pop, design);
  require_labels(design, 1);
  const Eigen::Index n = pop.n_units();
  const double n_units = static_cast<double>(n);

  std::vector<int> bin_of(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int b = bin_index(spec, design.inclusion_probs[i]);
    if (b < 0) {
      throw BinCoverageError("inclusion probability " +
                             std::to_string(design.inclusion_probs[i]) +
                             " falls outside the bin edges");
    }
    bin_of[static_cast<size_t>(i)] = b;
  }

  double total = 0.0, var = 0.0;
  for (int i : labeled_indices(design)) {
    const double p_b = spec.midpoints[static_cast<size_t>(bin_of[static_cast<size_t>(i)])];
    const double y = pop.outcomes[i];
    total += y / p_b;
    var += (1.0 - p_b) * y * y / (p_b * p_b);
  }
  return make_estimate(total / n_units, std::sqrt(var) / n_units, level,
                       EstimatorTag::BinSmooth);
}

}  // namespace ppiw
