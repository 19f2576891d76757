// vardrop command-line driver: synth, hash, reduce, analyze, train, sweep, bench.

#include "vardrop/analysis.hpp"
#include "vardrop/config.hpp"
#include "vardrop/dataset.hpp"
#include "vardrop/error.hpp"
#include "vardrop/experiment.hpp"
#include "vardrop/format.hpp"
#include "vardrop/model.hpp"
#include "vardrop/reduction.hpp"
#include "vardrop/report.hpp"
#include "vardrop/spectral.hpp"
#include "vardrop/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace vardrop;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "vardrop_out";
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "key=value config file");
  cmd->add_option("-o,--out", args.out_dir, "output directory");
  for (const auto& key : config_keys()) {
    args.flag_options[key] = cmd->add_option("--" + key, args.flag_values[key], "override config key " + key);
  }
}

RunConfig resolve_config(const CommonArgs& args) {
  RawConfig raw;
  if (!args.config_path.empty()) raw = load_config(args.config_path);
  for (const auto& [key, opt] : args.flag_options) {
    if (opt->count() > 0) raw[key] = args.flag_values.at(key);
  }
  std::optional<std::uint64_t> env_seed;
  if (const char* s = std::getenv("VARDROP_SEED"); s && *s) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (*end != '\0') fail(ErrorKind::Parameter, std::string("VARDROP_SEED is not an integer: ") + s);
    env_seed = v;
  }
  return validate_config(raw, env_seed);
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory " + dir);
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

SeriesTable load_source(const RunConfig& cfg) {
  if (!cfg.data.empty()) return load_csv(cfg.data);
  return synth_redundant(cfg.synth_spec()).table;
}

WindowBatch first_batch(const SeriesTable& table, const RunConfig& cfg, std::size_t start) {
  require(start + cfg.T <= table.length(), "start + T exceeds the series length");
  const auto windows = sliding_windows(table.slice(start, table.length() - start), cfg.T, 0, 1);
  WindowBatch batch;
  for (std::size_t i = 0; i < windows.size() && i < cfg.B; ++i) batch.windows.push_back(windows[i]);
  return batch;
}

std::vector<std::size_t> parse_list(const std::string& text) {
  // "2,3,4" or "1-15" or a mix: "1-3,5".
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoul(item));
      } else {
        const auto lo = std::stoul(item.substr(0, dash));
        const auto hi = std::stoul(item.substr(dash + 1));
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::exception&) {
      fail(ErrorKind::Parse, "invalid list item '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorKind::Parse, "empty list '" + text + "'");
  return out;
}

int cmd_synth(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto data = synth_redundant(cfg.synth_spec());
  const auto dir = ensure_dir(args.out_dir);
  std::ostringstream csv;
  write_csv(csv, data.table);
  write_file(dir / "synth.csv", csv.str());
  write_file(dir / "synth_labels.json", synth_labels_json(data));
  std::cout << "wrote " << data.table.n_variates() << " variates x " << data.table.length() << " steps to "
            << (dir / "synth.csv").string() << '\n';
  return 0;
}

int cmd_hash(const CommonArgs& args, std::size_t start) {
  const auto cfg = resolve_config(args);
  const auto table = load_source(cfg);
  const auto batch = first_batch(table, cfg, start);
  const auto hashes = kdfh(batch, {cfg.k, cfg.epsilon, cfg.normalize_windows});
  const auto text = hashes_json(cfg.k, cfg.epsilon, hashes);
  write_file(ensure_dir(args.out_dir) / "hashes.json", text);
  std::cout << text << '\n';
  return 0;
}

int cmd_reduce(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto data = prepare_data(cfg);
  const auto windows = sliding_windows(data.splits.train, cfg.T, cfg.H, cfg.stride);
  const auto batches = epoch_batches(cfg, windows, 0);
  std::vector<ReductionPlan> plans;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto hashes = kdfh(batches[b], {cfg.k, cfg.epsilon, cfg.normalize_windows});
    plans.push_back(stratified_sample(group_by_hash(hashes), cfg.gs, cfg.seed, b));
  }
  const auto dir = ensure_dir(args.out_dir);
  write_file(dir / "reduce.json", reduce_json(plans.front()));
  write_file(dir / "reduction.csv", reduction_csv(plans));
  const auto summary = reduction_report(plans);
  std::cout << "iterations=" << summary.iterations << " mean_tokens=" << format_real(summary.mean_tokens)
            << " std_tokens=" << format_real(summary.std_tokens) << " mean_delta=" << format_real(summary.mean_delta)
            << '\n';
  return 0;
}

int cmd_analyze(const CommonArgs& args, std::optional<std::size_t> start, double threshold, std::size_t bins,
                std::size_t shift_count, std::size_t shift_step) {
  const auto cfg = resolve_config(args);
  const auto table = load_source(cfg);
  const auto train = chronological_split(table, cfg.split_spec()).train;
  require(train.length() >= cfg.T, "training split is shorter than T");

  // Default window: the last T steps of the training split.
  const std::size_t s = start.value_or(train.length() - cfg.T);
  const auto& source = start ? table : train;
  require(s + cfg.T <= source.length(), "analysis window exceeds the series");
  const auto corr = pearson_matrix(Eigen::MatrixXd(
      source.values.middleCols(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(cfg.T))));
  const auto profile = redundancy_profile(corr, threshold);
  std::vector<double> maxes(profile.max_corr.data(), profile.max_corr.data() + profile.max_corr.size());
  const auto hist = histogram(maxes, bins, -1.0, 1.0);

  const std::size_t step = shift_step ? shift_step : cfg.T;
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < shift_count && i * step + cfg.T <= train.length(); ++i) starts.push_back(i * step);
  const auto shift = correlation_shift(train, cfg.T, starts);

  const auto dir = ensure_dir(args.out_dir);
  write_file(dir / "correlation.csv", correlation_csv(corr));
  write_file(dir / "redundancy_hist.csv", histogram_csv(hist));
  write_file(dir / "shift.json", shift_json(shift, starts, cfg.T));
  std::cout << "strong_frac(>=" << format_real(threshold) << ")=" << format_real(profile.strong_frac)
            << " mean_frobenius_shift=" << format_real(shift.mean_frobenius) << '\n';
  return 0;
}

int cmd_train(const CommonArgs& args, bool timing) {
  const auto cfg = resolve_config(args);
  const auto data = prepare_data(cfg);
  const auto dir = ensure_dir(args.out_dir);
  write_file(dir / "config.echo", config_echo(cfg));

  const auto first = epoch_batches(cfg, sliding_windows(data.splits.train, cfg.T, cfg.H, cfg.stride), 0).front();
  write_file(dir / "hashes.json",
             hashes_json(cfg.k, cfg.epsilon, kdfh(first, {cfg.k, cfg.epsilon, cfg.normalize_windows})));

  const auto result = run_experiment(cfg, data);
  for (const auto& e : result.epochs) {
    std::cout << "epoch " << e.epoch << " train_loss=" << format_real(e.train_loss)
              << " val_loss=" << format_real(e.val_loss) << " mean_tokens=" << format_real(e.mean_tokens)
              << " mean_delta=" << format_real(e.mean_delta) << '\n';
  }
  write_file(dir / "metrics.csv", metrics_csv(result.batches));
  write_file(dir / "reduction.csv", reduction_csv(result.plans));
  write_file(dir / "report.json", report_json(cfg, result, timing));
  write_file(dir / "checkpoint.json", checkpoint_json(result.params, cfg.seed));
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& ks, const std::string& gss) {
  const auto cfg = resolve_config(args);
  const auto data = prepare_data(cfg);
  const auto k_list = parse_list(ks);
  const auto gs_list = parse_list(gss);
  const auto result = sensitivity_sweep(cfg, data, k_list, gs_list);
  write_file(ensure_dir(args.out_dir) / "sweep.csv", sweep_csv(result));
  std::cout << sweep_csv(result);
  return 0;
}

int cmd_bench(const CommonArgs& args, std::size_t n, std::optional<double> delta, std::optional<std::size_t> tokens,
              bool timing) {
  const auto cfg = resolve_config(args);
  require(n >= 1, "--n must be at least 1");
  const auto shape = cfg.model_shape();
  std::size_t reduced = n;
  double effective_delta = 0.0;
  if (tokens) {
    require(*tokens >= 1 && *tokens <= n, "--tokens must lie in [1, n]");
    reduced = *tokens;
    effective_delta = 1.0 - static_cast<double>(reduced) / static_cast<double>(n);
  } else if (delta) {
    require(*delta >= 0.0 && *delta < 1.0, "--delta must lie in [0, 1)");
    effective_delta = *delta;
    reduced = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((1.0 - *delta) * static_cast<double>(n))));
  }
  const auto dense = count_flops(n, shape);
  const auto sparse = count_flops(reduced, shape);
  nlohmann::ordered_json j;
  j["n"] = n;
  j["n_reduced"] = reduced;
  j["delta"] = round_sig12(effective_delta);
  j["dense"] = nlohmann::ordered_json::parse(flop_ledger_json(dense));
  j["reduced"] = nlohmann::ordered_json::parse(flop_ledger_json(sparse));
  j["attention_flop_ratio"] =
      round_sig12(static_cast<double>(sparse.attention()) / static_cast<double>(dense.attention()));
  j["attention_flop_ratio_analytic"] = round_sig12((1.0 - effective_delta) * (1.0 - effective_delta));
  j["total_flop_ratio"] = round_sig12(static_cast<double>(sparse.total()) / static_cast<double>(dense.total()));

  if (timing) {
    // One batch of random windows at the requested width.
    RunConfig local = cfg;
    local.synth_n = n;
    local.synth_g = std::min<std::size_t>(n, 8);
    local.synth_length = cfg.T + cfg.B;
    const auto table = synth_redundant(local.synth_spec()).table;
    const auto batch = first_batch(table, local, 0);
    const auto t0 = std::chrono::steady_clock::now();
    const auto hashes = kdfh(batch, {cfg.k, cfg.epsilon, cfg.normalize_windows});
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    j["kdfh_seconds"] = dt.count();
    j["kdfh_groups"] = group_by_hash(hashes).group_count();
  }
  const auto text = j.dump(2);
  write_file(ensure_dir(args.out_dir) / "bench.json", text);
  std::cout << text << '\n';
  return 0;
}

int exit_code(ErrorKind kind) {
  const auto cat = error_category(kind);
  if (cat == "parse") return 2;
  if (cat == "validation") return 3;
  if (cat == "numeric") return 4;
  return 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VarDrop: frequency-hash variate token reduction"};
  app.require_subcommand(1);

  CommonArgs synth_args, hash_args, reduce_args, analyze_args, train_args, sweep_args, bench_args;

  auto* synth = app.add_subcommand("synth", "generate a redundant synthetic dataset (CSV + labels JSON)");
  add_common(synth, synth_args);

  auto* hash = app.add_subcommand("hash", "k-dominant frequency hashes for one batch of windows");
  add_common(hash, hash_args);
  std::size_t hash_start = 0;
  hash->add_option("--start", hash_start, "first window offset");

  auto* reduce = app.add_subcommand("reduce", "stratified reduction plans over one training epoch");
  add_common(reduce, reduce_args);

  auto* analyze = app.add_subcommand("analyze", "correlation, redundancy histogram and correlation shift");
  add_common(analyze, analyze_args);
  std::optional<std::size_t> analyze_start;
  double threshold = 0.9;
  std::size_t hist_bins = 20, shift_count = 10, shift_step = 0;
  analyze->add_option("--start", analyze_start, "window offset into the full series (default: last T of train)");
  analyze->add_option("--threshold", threshold, "strong-correlation threshold");
  analyze->add_option("--bins", hist_bins, "histogram bins over [-1, 1]");
  analyze->add_option("--shift-count", shift_count, "windows used for the shift report");
  analyze->add_option("--shift-step", shift_step, "offset between shift windows (default T)");

  auto* train = app.add_subcommand("train", "train the forecaster with or without VarDrop");
  add_common(train, train_args);
  bool train_timing = false;
  train->add_flag("--timing", train_timing, "include wall-clock per iteration in report.json");

  auto* sweep = app.add_subcommand("sweep", "k x gs sensitivity sweep");
  add_common(sweep, sweep_args);
  std::string ks = "2,3,4,5", gss = "1-15";
  sweep->add_option("--ks", ks, "k values, e.g. 2,3,4,5");
  sweep->add_option("--gss", gss, "gs values, e.g. 1-15");

  auto* bench = app.add_subcommand("bench", "attention FLOP ledger, dense vs reduced");
  add_common(bench, bench_args);
  std::size_t bench_n = 321;
  std::optional<double> bench_delta;
  std::optional<std::size_t> bench_tokens;
  bool bench_timing = false;
  bench->add_option("--n", bench_n, "dense token count N");
  bench->add_option("--delta", bench_delta, "token reduction ratio");
  bench->add_option("--tokens", bench_tokens, "reduced token count (overrides --delta)");
  bench->add_flag("--timing", bench_timing, "time k-DFH on one synthetic batch of width N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(synth_args);
    if (*hash) return cmd_hash(hash_args, hash_start);
    if (*reduce) return cmd_reduce(reduce_args);
    if (*analyze) return cmd_analyze(analyze_args, analyze_start, threshold, hist_bins, shift_count, shift_step);
    if (*train) return cmd_train(train_args, train_timing);
    if (*sweep) return cmd_sweep(sweep_args, ks, gss);
    if (*bench) return cmd_bench(bench_args, bench_n, bench_delta, bench_tokens, bench_timing);
  } catch (const Error& e) {
    std::cerr << "error [" << error_category(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error [io]: " << e.what() << '\n';
    return 5;
  }
  return 1;
}
