#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vardrop {

/// N variates by L timestamps. Rows are variates.
struct SeriesTable {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  std::optional<std::string> interval;

  std::size_t n_variates() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t length() const { return static_cast<std::size_t>(values.cols()); }

  // Throws unless the table is nonempty, finite and consistent with `names`.
  void validate() const;

  // Columns [begin, begin + count) as a new table.
  SeriesTable slice(std::size_t begin, std::size_t count) const;
};

struct MultivariateWindow {
  Eigen::MatrixXd data;  // N x T lookback
  std::size_t start = 0;
  std::optional<Eigen::MatrixXd> horizon;  // N x H

  std::size_t n_variates() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t length() const { return static_cast<std::size_t>(data.cols()); }
  std::size_t horizon_length() const { return horizon ? static_cast<std::size_t>(horizon->cols()) : 0; }
};

struct WindowBatch {
  std::vector<MultivariateWindow> windows;

  std::size_t size() const { return windows.size(); }
  std::size_t n_variates() const { return windows.front().n_variates(); }
  std::size_t length() const { return windows.front().length(); }

  // Nonempty and every member shares N, T and H.
  void validate() const;
};

struct SplitSpec {
  double train_frac = 0.7;
  double val_frac = 0.1;
  double test_frac = 0.2;

  void validate() const;
};

struct SplitLengths {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

struct TableSplits {
  SeriesTable train;
  SeriesTable val;
  SeriesTable test;
};

struct CsvOptions {
  char delimiter = ',';
  bool has_header = true;
  char comment = '#';
};

SeriesTable parse_csv(std::istream& in, const CsvOptions& options = {});
SeriesTable load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_csv(std::ostream& out, const SeriesTable& table, char delimiter = ',');

std::size_t window_count(std::size_t length, std::size_t lookback, std::size_t horizon, std::size_t stride);

std::vector<MultivariateWindow> sliding_windows(const SeriesTable& table, std::size_t lookback,
                                                std::size_t horizon, std::size_t stride);

// Consecutive groups of `batch_size` windows in the given order; the last batch
// may be short.
std::vector<WindowBatch> make_batches(std::span<const MultivariateWindow> windows, std::size_t batch_size);

// floor(frac * L) for val and test, remainder to train.
SplitLengths split_lengths(std::size_t length, const SplitSpec& spec);
TableSplits chronological_split(const SeriesTable& table, const SplitSpec& spec);

struct Prototype {
  std::vector<int> bins;
  std::vector<double> amps;
  std::vector<double> phases;
};

struct SynthSpec {
  std::size_t n_variates = 64;
  std::size_t n_prototypes = 8;
  std::size_t length = 4096;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
  // Bins are integer cycles per `period` samples, so every window of this
  // length sees each component on an exact DFT bin.
  std::size_t period = 96;
  int max_bin = 24;
  std::size_t min_components = 3;
  std::size_t max_components = 4;
};

struct SynthData {
  SeriesTable table;
  std::vector<int> labels;
  std::vector<Prototype> prototypes;
};

SynthData synth_redundant(const SynthSpec& spec);

// {"labels":[...],"prototypes":[{"bins":[...],"amps":[...]}]}
std::string synth_labels_json(const SynthData& data);

}  // namespace vardrop
