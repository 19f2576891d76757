#pragma once

#include "vardrop/dataset.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vardrop {

/// Per-variate amplitudes over positive-frequency bins. `bin_freqs[j]` is the
/// DFT bin index of column j; DC is never included.
struct AmplitudeSpectrum {
  Eigen::MatrixXd amps;  // N x F
  std::vector<int> bin_freqs;
};

/// Batch-averaged spectrum of a WindowBatch.
struct MeanSpectrum {
  Eigen::MatrixXd amps;  // N x F
  std::vector<int> bin_freqs;
  std::size_t batch_size = 0;
};

/// Ordered dominant bins per variate, descending by amplitude.
struct DominantSet {
  std::vector<std::vector<int>> bins;
};

/// Ordered tuple of dominant bins. Order is significant: 4-12-8 != 12-4-8.
struct HashValue {
  std::vector<int> bins;

  std::string key() const;
  static HashValue parse(std::string_view key);

  auto operator<=>(const HashValue&) const = default;
};

struct KdfhOptions {
  std::size_t k = 3;
  std::size_t epsilon = 25;
  // z-normalize each variate within each window before the FFT.
  bool normalize_windows = false;
};

/// |X_f| for f = 1..floor(T/2), unnormalized: a unit-amplitude sinusoid on an
/// interior bin has magnitude T/2. Magnitudes at round-off level (relative to
/// the signal's L1 norm) are flushed to zero so flat rows tie exactly.
Eigen::VectorXd amplitude_spectrum(std::span<const double> signal);
Eigen::VectorXd amplitude_spectrum(const Eigen::Ref<const Eigen::VectorXd>& signal);

/// Keeps bins 1..epsilon of a spectrum that starts at bin 1.
Eigen::VectorXd low_pass(const Eigen::Ref<const Eigen::VectorXd>& spectrum, std::size_t epsilon);

AmplitudeSpectrum window_spectrum(const MultivariateWindow& window, std::size_t epsilon,
                                  bool normalize_windows = false);

/// Elementwise mean of the low-passed spectra, accumulated in instance order.
MeanSpectrum batch_mean_spectrum(const WindowBatch& batch, std::size_t epsilon, bool normalize_windows = false);

/// Top-k bins per variate; ties resolve to the lower bin index.
DominantSet dominant_frequencies(const MeanSpectrum& mean, std::size_t k);

std::vector<HashValue> hash_values(const DominantSet& dominant);

/// k-dominant frequency hashing of one batch: FFT amplitudes, low-pass,
/// batch mean, top-k, ordered-tuple key. Returns one hash per variate.
std::vector<HashValue> kdfh(const WindowBatch& batch, const KdfhOptions& options);

struct ReconstructionError {
  double mse = 0.0;
  double predicted_mse = 0.0;
};

/// Time-domain MSE of the reconstruction that keeps DC plus the k largest
/// positive bins, together with the closed-form prediction from the dropped
/// sinusoid amplitudes (0.5 * sum A^2, A = 2|X_f|/T).
ReconstructionError reconstruction_error(std::span<const double> signal, std::size_t k);

}  // namespace vardrop
