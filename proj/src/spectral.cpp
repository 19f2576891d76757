#include "vardrop/spectral.hpp"

#include "vardrop/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <charconv>
#include <complex>
#include <numeric>

namespace vardrop {

namespace {

constexpr double kFlushRelative = 1e-11;

std::vector<std::complex<double>> full_spectrum(std::span<const double> signal) {
  thread_local Eigen::FFT<double> fft;
  std::vector<double> in(signal.begin(), signal.end());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  return out;
}

double flush_threshold(std::span<const double> signal) {
  double l1 = 0.0;
  for (double x : signal) l1 += std::abs(x);
  return kFlushRelative * l1;
}

// Indices into `amps` of the k largest entries, descending, lower index first on ties.
std::vector<std::size_t> top_k_indices(const Eigen::Ref<const Eigen::VectorXd>& amps, std::size_t k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(amps.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double va = amps(static_cast<Eigen::Index>(a));
                      const double vb = amps(static_cast<Eigen::Index>(b));
                      if (va != vb) return va > vb;
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

Eigen::VectorXd normalized_row(const Eigen::Ref<const Eigen::VectorXd>& row) {
  const double mean = row.mean();
  Eigen::VectorXd centered = row.array() - mean;
  const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(row.size()));
  if (sd == 0.0) return Eigen::VectorXd::Zero(row.size());
  return centered / sd;
}

}  // namespace

std::string HashValue::key() const {
  std::string out;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(bins[i]);
  }
  return out;
}

HashValue HashValue::parse(std::string_view key) {
  HashValue h;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    const std::size_t dash = std::min(key.find('-', pos), key.size());
    int value = 0;
    auto [ptr, ec] = std::from_chars(key.data() + pos, key.data() + dash, value);
    if (ec != std::errc() || ptr != key.data() + dash) fail(ErrorKind::Parse, "invalid hash key '" + std::string(key) + "'");
    h.bins.push_back(value);
    pos = dash + 1;
  }
  return h;
}

Eigen::VectorXd amplitude_spectrum(std::span<const double> signal) {
  require(signal.size() >= 2, "amplitude spectrum needs at least 2 samples");
  const auto spectrum = full_spectrum(signal);
  const std::size_t half = signal.size() / 2;
  const double floor = flush_threshold(signal);
  Eigen::VectorXd amps(static_cast<Eigen::Index>(half));
  for (std::size_t f = 1; f <= half; ++f) {
    const double m = std::abs(spectrum[f]);
    amps(static_cast<Eigen::Index>(f - 1)) = m <= floor ? 0.0 : m;
  }
  return amps;
}

Eigen::VectorXd amplitude_spectrum(const Eigen::Ref<const Eigen::VectorXd>& signal) {
  const Eigen::VectorXd copy = signal;
  return amplitude_spectrum(std::span<const double>(copy.data(), static_cast<std::size_t>(copy.size())));
}

Eigen::VectorXd low_pass(const Eigen::Ref<const Eigen::VectorXd>& spectrum, std::size_t epsilon) {
  const auto available = static_cast<std::size_t>(spectrum.size());
  if (epsilon < 1 || epsilon > available) {
    fail(ErrorKind::Parameter, "cutoff epsilon=" + std::to_string(epsilon) + " outside [1, " +
                                   std::to_string(available) + "]");
  }
  return spectrum.head(static_cast<Eigen::Index>(epsilon));
}

AmplitudeSpectrum window_spectrum(const MultivariateWindow& window, std::size_t epsilon, bool normalize_windows) {
  const auto n = static_cast<Eigen::Index>(window.n_variates());
  require(window.length() >= 2, "window length must be at least 2");
  AmplitudeSpectrum out;
  out.amps.resize(n, static_cast<Eigen::Index>(epsilon));
  for (Eigen::Index v = 0; v < n; ++v) {
    Eigen::VectorXd row = window.data.row(v).transpose();
    if (normalize_windows) row = normalized_row(row);
    out.amps.row(v) = low_pass(amplitude_spectrum(row), epsilon).transpose();
  }
  out.bin_freqs.resize(epsilon);
  std::iota(out.bin_freqs.begin(), out.bin_freqs.end(), 1);
  return out;
}

MeanSpectrum batch_mean_spectrum(const WindowBatch& batch, std::size_t epsilon, bool normalize_windows) {
  batch.validate();
  MeanSpectrum out;
  out.batch_size = batch.size();
  out.amps = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(batch.n_variates()), static_cast<Eigen::Index>(epsilon));
  for (const auto& w : batch.windows) {
    auto s = window_spectrum(w, epsilon, normalize_windows);
    out.amps += s.amps;
    if (out.bin_freqs.empty()) out.bin_freqs = std::move(s.bin_freqs);
  }
  out.amps /= static_cast<double>(batch.size());
  return out;
}

DominantSet dominant_frequencies(const MeanSpectrum& mean, std::size_t k) {
  const auto bins = static_cast<std::size_t>(mean.amps.cols());
  if (k < 1 || k > bins) {
    fail(ErrorKind::Parameter, "k=" + std::to_string(k) + " outside [1, " + std::to_string(bins) + "]");
  }
  DominantSet out;
  out.bins.reserve(static_cast<std::size_t>(mean.amps.rows()));
  for (Eigen::Index v = 0; v < mean.amps.rows(); ++v) {
    const Eigen::VectorXd row = mean.amps.row(v).transpose();
    std::vector<int> chosen;
    chosen.reserve(k);
    for (auto j : top_k_indices(row, k)) chosen.push_back(mean.bin_freqs[j]);
    out.bins.push_back(std::move(chosen));
  }
  return out;
}

std::vector<HashValue> hash_values(const DominantSet& dominant) {
  std::vector<HashValue> out;
  out.reserve(dominant.bins.size());
  for (const auto& b : dominant.bins) out.push_back(HashValue{b});
  return out;
}

std::vector<HashValue> kdfh(const WindowBatch& batch, const KdfhOptions& options) {
  const auto mean = batch_mean_spectrum(batch, options.epsilon, options.normalize_windows);
  return hash_values(dominant_frequencies(mean, options.k));
}

ReconstructionError reconstruction_error(std::span<const double> signal, std::size_t k) {
  require(signal.size() >= 2, "reconstruction needs at least 2 samples");
  const std::size_t n = signal.size();
  const std::size_t half = n / 2;
  const auto spectrum = full_spectrum(signal);
  const double floor = flush_threshold(signal);

  Eigen::VectorXd amps(static_cast<Eigen::Index>(half));
  for (std::size_t f = 1; f <= half; ++f) {
    const double m = std::abs(spectrum[f]);
    amps(static_cast<Eigen::Index>(f - 1)) = m <= floor ? 0.0 : m;
  }
  const std::size_t keep_count = std::min(k, half);
  std::vector<bool> keep(half + 1, false);
  for (auto j : top_k_indices(amps, keep_count)) keep[j + 1] = true;

  std::vector<std::complex<double>> kept(n, {0.0, 0.0});
  kept[0] = spectrum[0];
  const double nd = static_cast<double>(n);
  double predicted = 0.0;
  for (std::size_t f = 1; f <= half; ++f) {
    const bool nyquist = (n % 2 == 0) && f == half;
    if (keep[f]) {
      kept[f] = spectrum[f];
      if (!nyquist) kept[n - f] = spectrum[n - f];
      continue;
    }
    const double m = amps(static_cast<Eigen::Index>(f - 1));
    // The Nyquist term is a single real cosine of amplitude |X|/T whose mean
    // square is its amplitude squared; interior bins follow 0.5 * (2|X|/T)^2.
    predicted += nyquist ? (m / nd) * (m / nd) : 0.5 * (2.0 * m / nd) * (2.0 * m / nd);
  }

  thread_local Eigen::FFT<double> fft;
  std::vector<std::complex<double>> recon;
  fft.inv(recon, kept);
  double sse = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double e = signal[t] - recon[t].real();
    sse += e * e;
  }
  return {sse / nd, predicted};
}

}  // namespace vardrop
