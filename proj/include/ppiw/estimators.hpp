#pragma once

#include <Eigen/Core>
#include <vector>

#include "ppiw/types.hpp"

namespace ppiw {

enum class BinStrategy { EqualWidth, EqualCount };

/// Partition of the inclusion-probability range into contiguous bins.
/// Bins are [edges[b], edges[b+1]) with the last bin closed on the right.
struct BinSpec {
  std::vector<double> edges;      // strictly increasing, length B+1
  std::vector<double> midpoints;  // length B

  int n_bins() const { return static_cast<int>(midpoints.size()); }
};

/// Validate edges and fill in midpoints.
BinSpec make_bin_spec(std::vector<double> edges);

/// Build bins spanning [min xi, max xi]. EqualWidth splits the range
/// uniformly; EqualCount places edges between order statistics so counts
/// balance. A degenerate range (all xi equal) collapses to a single bin
/// whose midpoint is the common value.
BinSpec make_bins(const Eigen::VectorXd& xi, int n_bins, BinStrategy strategy);

/// Bin index for a probability, or -1 when it falls outside the edge range.
int bin_index(const BinSpec& spec, double xi);

// ---------------------------------------------------------------------------
// Estimators of the finite-population mean. Point estimates and variance
// plug-ins, with labeling treated as independent Bernoulli draws:
//
//   classic  : mean of labeled Y;       V = s^2 / n_lab
//   HT       : N^-1 sum R Y / xi;       V = N^-2 sum R (1-xi) Y^2 / xi^2
//   Hajek    : sum(R Y/xi)/sum(R/xi);   V = Nhat^-2 sum R (1-xi)(Y-est)^2/xi^2
//   GREG     : HT + slope'(Xbar - Xbar_HT), slope from 1/xi-weighted least
//              squares of Y on [1, X] over labeled units; V = HT plug-in on
//              the regression residuals
//   BinSmooth: HT with each xi replaced by its bin midpoint
// ---------------------------------------------------------------------------

EstimateWithCI classic_mean(const FinitePopulation& pop, const LabelingDesign& design,
                            double level = 0.95);

EstimateWithCI horvitz_thompson(const FinitePopulation& pop, const LabelingDesign& design,
                                double level = 0.95);

EstimateWithCI hajek(const FinitePopulation& pop, const LabelingDesign& design,
                     double level = 0.95);

EstimateWithCI greg(const FinitePopulation& pop, const LabelingDesign& design,
                    double level = 0.95);

EstimateWithCI bin_smooth(const FinitePopulation& pop, const LabelingDesign& design,
                          const BinSpec& spec, double level = 0.95);

/// Weighted least squares with columns dropped (coefficient zero) when they
/// are linearly dependent on earlier ones. Returns the full-length
/// coefficient vector.
Eigen::VectorXd weighted_least_squares(const Eigen::MatrixXd& design_matrix,
                                       const Eigen::VectorXd& response,
                                       const Eigen::VectorXd& weights);

}  // namespace ppiw
