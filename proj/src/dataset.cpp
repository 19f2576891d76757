#include "vardrop/dataset.hpp"

#include "vardrop/error.hpp"
#include "vardrop/format.hpp"
#include "vardrop/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace vardrop {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// Full-token numeric parse; accepts nan/inf spellings so they can be rejected
// as non-finite rather than as non-numeric.
std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string coord(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

void SeriesTable::validate() const {
  if (values.rows() < 1 || values.cols() < 1) fail(ErrorKind::EmptyInput, "series table is empty");
  if (names.size() != n_variates()) {
    fail(ErrorKind::Parameter, "series table has " + std::to_string(names.size()) + " names for " +
                                   std::to_string(n_variates()) + " variates");
  }
  if (!values.allFinite()) fail(ErrorKind::Numeric, "series table contains non-finite values");
}

SeriesTable SeriesTable::slice(std::size_t begin, std::size_t count) const {
  require(begin + count <= length(), "slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                         ") exceeds table length " + std::to_string(length()));
  SeriesTable out;
  out.names = names;
  out.interval = interval;
  out.values = values.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
  return out;
}

void WindowBatch::validate() const {
  if (windows.empty()) fail(ErrorKind::EmptyInput, "window batch is empty");
  const auto& first = windows.front();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (w.n_variates() != first.n_variates() || w.length() != first.length() ||
        w.horizon_length() != first.horizon_length() || w.horizon.has_value() != first.horizon.has_value()) {
      fail(ErrorKind::Parameter, "window " + std::to_string(i) + " in batch has inconsistent dimensions");
    }
  }
}

void SplitSpec::validate() const {
  if (train_frac < 0 || val_frac < 0 || test_frac < 0) fail(ErrorKind::Split, "split fractions must be nonnegative");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    fail(ErrorKind::Split, "split fractions must sum to 1");
  }
}

SeriesTable parse_csv(std::istream& in, const CsvOptions& options) {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  bool drop_first = false;
  bool decided_first = false;
  std::size_t data_rows = 0;
  std::size_t line_no = 0;
  std::size_t width = 0;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == options.comment) continue;
    auto cells = split_line(line, options.delimiter);

    if (options.has_header && header.empty()) {
      for (auto& c : cells) header.push_back(trim(c));
      width = header.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      fail(ErrorKind::Parse, "malformed row " + std::to_string(data_rows) + " (line " + std::to_string(line_no) +
                                 "): expected " + std::to_string(width) + " cells, got " +
                                 std::to_string(cells.size()));
    }
    if (!decided_first) {
      drop_first = width > 1 && !parse_number(cells.front()).has_value();
      decided_first = true;
      columns.resize(width - (drop_first ? 1 : 0));
    }
    for (std::size_t c = drop_first ? 1 : 0; c < width; ++c) {
      auto v = parse_number(cells[c]);
      if (!v) fail(ErrorKind::Parse, "non-numeric cell at " + coord(data_rows, c) + ": '" + trim(cells[c]) + "'");
      if (!std::isfinite(*v)) fail(ErrorKind::Numeric, "non-finite value at " + coord(data_rows, c));
      columns[c - (drop_first ? 1 : 0)].push_back(*v);
    }
    ++data_rows;
  }

  if (data_rows == 0) fail(ErrorKind::EmptyInput, "csv contains no data rows");

  SeriesTable table;
  const std::size_t n = columns.size();
  table.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(data_rows));
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t t = 0; t < data_rows; ++t) {
      table.values(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(t)) = columns[v][t];
    }
  }
  if (options.has_header) {
    table.names.assign(header.begin() + (drop_first ? 1 : 0), header.end());
  } else {
    for (std::size_t v = 0; v < n; ++v) table.names.push_back("v" + std::to_string(v));
  }
  table.validate();
  return table;
}

SeriesTable load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return parse_csv(in, options);
}

void write_csv(std::ostream& out, const SeriesTable& table, char delimiter) {
  for (std::size_t v = 0; v < table.names.size(); ++v) {
    if (v) out << delimiter;
    out << table.names[v];
  }
  out << '\n';
  for (Eigen::Index t = 0; t < table.values.cols(); ++t) {
    for (Eigen::Index v = 0; v < table.values.rows(); ++v) {
      if (v) out << delimiter;
      out << format_real(table.values(v, t));
    }
    out << '\n';
  }
}

std::size_t window_count(std::size_t length, std::size_t lookback, std::size_t horizon, std::size_t stride) {
  if (length < lookback + horizon) return 0;
  return (length - lookback - horizon) / stride + 1;
}

std::vector<MultivariateWindow> sliding_windows(const SeriesTable& table, std::size_t lookback, std::size_t horizon,
                                                std::size_t stride) {
  require(lookback >= 2, "lookback length must be at least 2");
  require(stride >= 1, "stride must be at least 1");
  const std::size_t length = table.length();
  if (length < lookback + horizon) {
    fail(ErrorKind::InsufficientLength, "series length " + std::to_string(length) + " is shorter than T + H = " +
                                            std::to_string(lookback + horizon));
  }
  const std::size_t count = window_count(length, lookback, horizon, stride);
  std::vector<MultivariateWindow> out;
  out.reserve(count);
  const auto T = static_cast<Eigen::Index>(lookback);
  const auto H = static_cast<Eigen::Index>(horizon);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * stride;
    MultivariateWindow w;
    w.start = start;
    w.data = table.values.middleCols(static_cast<Eigen::Index>(start), T);
    if (horizon > 0) w.horizon = table.values.middleCols(static_cast<Eigen::Index>(start) + T, H);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<WindowBatch> make_batches(std::span<const MultivariateWindow> windows, std::size_t batch_size) {
  require(batch_size >= 1, "batch size must be at least 1");
  std::vector<WindowBatch> batches;
  for (std::size_t i = 0; i < windows.size(); i += batch_size) {
    WindowBatch b;
    const std::size_t end = std::min(windows.size(), i + batch_size);
    b.windows.assign(windows.begin() + static_cast<std::ptrdiff_t>(i), windows.begin() + static_cast<std::ptrdiff_t>(end));
    batches.push_back(std::move(b));
  }
  return batches;
}

SplitLengths split_lengths(std::size_t length, const SplitSpec& spec) {
  spec.validate();
  SplitLengths out;
  out.val = static_cast<std::size_t>(std::floor(spec.val_frac * static_cast<double>(length)));
  out.test = static_cast<std::size_t>(std::floor(spec.test_frac * static_cast<double>(length)));
  out.train = length - out.val - out.test;
  return out;
}

TableSplits chronological_split(const SeriesTable& table, const SplitSpec& spec) {
  const auto lens = split_lengths(table.length(), spec);
  if (lens.train == 0 || lens.val == 0 || lens.test == 0) {
    fail(ErrorKind::Split, "split of length " + std::to_string(table.length()) + " leaves an empty partition (" +
                               std::to_string(lens.train) + "/" + std::to_string(lens.val) + "/" +
                               std::to_string(lens.test) + ")");
  }
  return {table.slice(0, lens.train), table.slice(lens.train, lens.val),
          table.slice(lens.train + lens.val, lens.test)};
}

SynthData synth_redundant(const SynthSpec& spec) {
  require(spec.n_prototypes >= 1, "prototype count must be at least 1");
  require(spec.n_prototypes <= spec.n_variates, "prototype count " + std::to_string(spec.n_prototypes) +
                                                    " exceeds variate count " + std::to_string(spec.n_variates));
  require(spec.noise_sigma >= 0.0, "noise sigma must be nonnegative");
  require(spec.length >= 1, "length must be at least 1");
  require(spec.period >= 2, "period must be at least 2");
  require(spec.min_components >= 1 && spec.min_components <= spec.max_components, "invalid component range");
  require(spec.max_bin >= 1 && static_cast<std::size_t>(spec.max_bin) * 2 < spec.period,
          "max_bin must lie below the Nyquist bin of the period");
  require(spec.max_components <= static_cast<std::size_t>(spec.max_bin), "more components than available bins");

  // Amplitude grid with 0.5 spacing keeps component orderings well separated.
  const std::vector<double> amp_grid = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  require(spec.max_components <= amp_grid.size(), "too many components per prototype");

  Rng rng(mix_seed(spec.seed, 0x5eedULL));
  SynthData out;
  std::set<std::vector<int>> used_signatures;
  for (std::size_t g = 0; g < spec.n_prototypes; ++g) {
    Prototype proto;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) fail(ErrorKind::Parameter, "cannot draw distinct prototypes; reduce the prototype count");
      const std::size_t ncomp = spec.min_components + rng.index(spec.max_components - spec.min_components + 1);
      std::vector<int> bins(static_cast<std::size_t>(spec.max_bin));
      for (int b = 0; b < spec.max_bin; ++b) bins[static_cast<std::size_t>(b)] = b + 1;
      rng.shuffle(bins.begin(), bins.end());
      bins.resize(ncomp);
      std::vector<double> amps = amp_grid;
      rng.shuffle(amps.begin(), amps.end());
      amps.resize(ncomp);

      // Signature: leading min_components bins ordered by descending amplitude.
      std::vector<std::size_t> order(ncomp);
      for (std::size_t i = 0; i < ncomp; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return amps[a] > amps[b]; });
      std::vector<int> signature;
      for (std::size_t i = 0; i < spec.min_components; ++i) signature.push_back(bins[order[i]]);
      if (!used_signatures.insert(signature).second) continue;

      for (auto i : order) {
        proto.bins.push_back(bins[i]);
        proto.amps.push_back(amps[i]);
      }
      for (std::size_t i = 0; i < ncomp; ++i) proto.phases.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
      break;
    }
    out.prototypes.push_back(std::move(proto));
  }

  const auto L = static_cast<Eigen::Index>(spec.length);
  Eigen::MatrixXd patterns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.n_prototypes), L);
  for (std::size_t g = 0; g < spec.n_prototypes; ++g) {
    const auto& p = out.prototypes[g];
    for (Eigen::Index t = 0; t < L; ++t) {
      double x = 0.0;
      for (std::size_t c = 0; c < p.bins.size(); ++c) {
        x += p.amps[c] * std::sin(2.0 * std::numbers::pi * p.bins[c] * static_cast<double>(t) /
                                      static_cast<double>(spec.period) +
                                  p.phases[c]);
      }
      patterns(static_cast<Eigen::Index>(g), t) = x;
    }
  }

  out.table.values.resize(static_cast<Eigen::Index>(spec.n_variates), L);
  for (std::size_t v = 0; v < spec.n_variates; ++v) {
    const auto g = static_cast<int>(v % spec.n_prototypes);
    out.labels.push_back(g);
    out.table.names.push_back("v" + std::to_string(v));
    out.table.values.row(static_cast<Eigen::Index>(v)) = patterns.row(g);
  }
  if (spec.noise_sigma > 0.0) {
    for (Eigen::Index v = 0; v < out.table.values.rows(); ++v) {
      for (Eigen::Index t = 0; t < L; ++t) out.table.values(v, t) += spec.noise_sigma * rng.normal();
    }
  }
  return out;
}

std::string synth_labels_json(const SynthData& data) {
  nlohmann::ordered_json j;
  j["labels"] = data.labels;
  auto protos = nlohmann::ordered_json::array();
  for (const auto& p : data.prototypes) {
    nlohmann::ordered_json pj;
    pj["bins"] = p.bins;
    auto amps = nlohmann::ordered_json::array();
    for (double a : p.amps) amps.push_back(round_sig12(a));
    pj["amps"] = amps;
    protos.push_back(pj);
  }
  j["prototypes"] = protos;
  return j.dump();
}

}  // namespace vardrop
