#pragma once

#include "vardrop/dataset.hpp"
#include "vardrop/model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vardrop {

/// Everything a run needs. Defaults follow the reference setup: T=96, B=32,
/// epsilon=25, k=3, gs=10, with a desk-scale synthetic source when no CSV is
/// given.
struct RunConfig {
  std::string data;  // csv path; empty selects the synthetic source
  std::size_t synth_n = 64;
  std::size_t synth_g = 8;
  std::size_t synth_length = 4096;
  double synth_sigma = 0.05;

  std::size_t T = 96;
  std::size_t H = 96;
  std::size_t B = 32;
  std::size_t stride = 1;
  bool shuffle = true;
  double train_frac = 0.7;
  double val_frac = 0.1;
  double test_frac = 0.2;

  std::size_t k = 3;
  std::size_t epsilon = 25;
  std::size_t gs = 10;
  std::size_t d = 32;
  std::size_t d_k = 16;
  double lr = 1e-2;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  bool vardrop_on = true;
  bool normalize_windows = false;

  ModelShape model_shape() const { return {T, d, d_k, H}; }
  TrainConfig train_config() const { return {k, epsilon, gs, lr, seed, vardrop_on, normalize_windows}; }
  SplitSpec split_spec() const { return {train_frac, val_frac, test_frac}; }
  SynthSpec synth_spec() const;
};

using RawConfig = std::map<std::string, std::string>;

/// Every accepted key, in echo order.
const std::vector<std::string>& config_keys();

/// Flat `key = value` lines; '#' starts a comment. Duplicate keys: last wins.
RawConfig parse_config(std::istream& in);
RawConfig load_config(const std::string& path);

/// Applies `raw` over the defaults and range-checks the result. Unknown keys
/// are errors. `fallback_seed` is used when `seed` is absent.
RunConfig validate_config(const RawConfig& raw, std::optional<std::uint64_t> fallback_seed = std::nullopt);

/// Canonical `key=value` listing of every field, one per line.
std::string config_echo(const RunConfig& config);

}  // namespace vardrop
