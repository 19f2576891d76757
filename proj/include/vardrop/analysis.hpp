#pragma once

#include "vardrop/dataset.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace vardrop {

struct CorrelationMatrix {
  Eigen::MatrixXd rho;            // N x N
  std::vector<bool> degenerate;   // constant variates; their row/column is 0
};

struct RedundancyProfile {
  Eigen::VectorXd max_corr;  // signed maximum over off-diagonal entries per variate
  double threshold = 0.9;
  double strong_frac = 0.0;
};

struct CorrelationShift {
  Eigen::MatrixXd pair_max_abs_diff;  // max over window pairs of |rho_a - rho_b|
  std::vector<double> consecutive_frobenius;
  double mean_frobenius = 0.0;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Pearson product-moment correlation between rows. Constant rows are
/// flagged degenerate and correlate 0 with everything, including themselves.
CorrelationMatrix pearson_matrix(const Eigen::MatrixXd& data);
CorrelationMatrix pearson_matrix(const MultivariateWindow& window);

RedundancyProfile redundancy_profile(const CorrelationMatrix& matrix, double threshold);

/// Equal-width bins over [lo, hi]; the top edge is inclusive.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

CorrelationShift correlation_shift(const SeriesTable& table, std::size_t lookback,
                                   std::span<const std::size_t> starts);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace vardrop
