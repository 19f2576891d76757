#include "vardrop/analysis.hpp"

#include "vardrop/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace vardrop {

CorrelationMatrix pearson_matrix(const Eigen::MatrixXd& data) {
  require(data.cols() >= 2, "correlation needs at least 2 timestamps");
  const Eigen::Index n = data.rows();
  const Eigen::MatrixXd centered = data.colwise() - data.rowwise().mean();
  const Eigen::VectorXd norms = centered.rowwise().norm();

  CorrelationMatrix out;
  out.degenerate.resize(static_cast<std::size_t>(n));
  Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(n, data.cols());
  for (Eigen::Index v = 0; v < n; ++v) {
    // Spread no larger than round-off of the mean counts as constant.
    const double scale = data.row(v).cwiseAbs().maxCoeff();
    const bool flat = norms(v) <= 1e-12 * scale * std::sqrt(static_cast<double>(data.cols())) || norms(v) == 0.0;
    out.degenerate[static_cast<std::size_t>(v)] = flat;
    if (!flat) unit.row(v) = centered.row(v) / norms(v);
  }
  out.rho = unit * unit.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.rho(i, i) = out.degenerate[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = std::clamp(out.rho(i, j), -1.0, 1.0);
      out.rho(i, j) = r;
      out.rho(j, i) = r;
    }
  }
  return out;
}

CorrelationMatrix pearson_matrix(const MultivariateWindow& window) { return pearson_matrix(window.data); }

RedundancyProfile redundancy_profile(const CorrelationMatrix& matrix, double threshold) {
  require(threshold >= -1.0 && threshold <= 1.0, "redundancy threshold must lie in [-1, 1]");
  const Eigen::Index n = matrix.rho.rows();
  RedundancyProfile out;
  out.threshold = threshold;
  out.max_corr = Eigen::VectorXd::Constant(n, n > 1 ? -1.0 : 0.0);
  std::size_t strong = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) out.max_corr(i) = std::max(out.max_corr(i), matrix.rho(i, j));
    }
    if (n > 1 && out.max_corr(i) >= threshold) ++strong;
  }
  out.strong_frac = n == 0 ? 0.0 : static_cast<double>(strong) / static_cast<double>(n);
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  require(bins >= 1 && hi > lo, "histogram needs at least one bin and hi > lo");
  std::vector<HistogramBin> out(bins);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double x : values) {
    if (x < lo || x > hi) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    out[std::min(b, bins - 1)].count++;
  }
  return out;
}

CorrelationShift correlation_shift(const SeriesTable& table, std::size_t lookback,
                                   std::span<const std::size_t> starts) {
  require(!starts.empty(), "correlation shift needs at least one window start");
  std::vector<Eigen::MatrixXd> mats;
  for (auto s : starts) {
    require(s + lookback <= table.length(), "window start " + std::to_string(s) + " + T exceeds series length " +
                                                std::to_string(table.length()));
    mats.push_back(pearson_matrix(Eigen::MatrixXd(
                                      table.values.middleCols(static_cast<Eigen::Index>(s),
                                                              static_cast<Eigen::Index>(lookback))))
                       .rho);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(table.n_variates());
  CorrelationShift out;
  out.pair_max_abs_diff = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t a = 0; a < mats.size(); ++a) {
    for (std::size_t b = a + 1; b < mats.size(); ++b) {
      out.pair_max_abs_diff = out.pair_max_abs_diff.cwiseMax((mats[a] - mats[b]).cwiseAbs());
    }
  }
  double total = 0.0;
  for (std::size_t a = 0; a + 1 < mats.size(); ++a) {
    const double f = (mats[a + 1] - mats[a]).norm();
    out.consecutive_frobenius.push_back(f);
    total += f;
  }
  out.mean_frobenius = out.consecutive_frobenius.empty()
                           ? 0.0
                           : total / static_cast<double>(out.consecutive_frobenius.size());
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size(), "label vectors differ in length");
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  const auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, c] : joint) index += pairs(c);
  for (const auto& [key, c] : ca) sa += pairs(c);
  for (const auto& [key, c] : cb) sb += pairs(c);
  const double expected = sa * sb / pairs(n);
  const double max_index = 0.5 * (sa + sb);
  // Both partitions trivial (all singletons or one cluster): identical iff equal.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace vardrop
