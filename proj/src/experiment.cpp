#include "vardrop/experiment.hpp"

#include "vardrop/error.hpp"
#include "vardrop/rng.hpp"

#include <chrono>
#include <numeric>

namespace vardrop {

ExperimentData prepare_data(const RunConfig& config) {
  ExperimentData out;
  if (config.data.empty()) {
    out.synth = synth_redundant(config.synth_spec());
    out.full = out.synth->table;
  } else {
    out.full = load_csv(config.data);
  }
  out.splits = chronological_split(out.full, config.split_spec());
  const std::size_t need = config.T + config.H;
  const auto check = [&](const SeriesTable& t, const char* name) {
    if (t.length() < need) {
      fail(ErrorKind::Split, std::string(name) + " split has " + std::to_string(t.length()) +
                                 " timestamps, fewer than T + H = " + std::to_string(need));
    }
  };
  check(out.splits.train, "train");
  check(out.splits.val, "validation");
  return out;
}

std::vector<WindowBatch> epoch_batches(const RunConfig& config, const std::vector<MultivariateWindow>& windows,
                                       std::size_t epoch) {
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (config.shuffle) {
    Rng rng(mix_seed(config.seed, 0xE90C0000ULL + epoch));
    rng.shuffle(order.begin(), order.end());
  }
  std::vector<MultivariateWindow> ordered;
  ordered.reserve(windows.size());
  for (auto i : order) ordered.push_back(windows[i]);
  return make_batches(ordered, config.B);
}

ExperimentResult run_experiment(const RunConfig& config, const ExperimentData& data) {
  const auto train_windows = sliding_windows(data.splits.train, config.T, config.H, config.stride);
  const auto val_windows = sliding_windows(data.splits.val, config.T, config.H, 1);

  ExperimentResult out;
  out.params = ModelParams::init(config.model_shape(), config.seed);
  const TrainConfig train = config.train_config();

  const auto t0 = std::chrono::steady_clock::now();
  std::size_t iterations = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = epoch_batches(config, train_windows, epoch);
    auto result = train_epoch(batches, out.params, train, epoch);

    EpochSummary s;
    s.epoch = epoch;
    s.train_loss = result.mean_loss;
    s.val_loss = evaluate_mse(val_windows, out.params);
    double tokens = 0.0, delta = 0.0;
    for (const auto& m : result.batches) {
      tokens += static_cast<double>(m.tokens_used);
      delta += m.delta;
      s.flops += m.flops;
      s.attention_flops += m.attention_flops;
    }
    s.mean_tokens = tokens / static_cast<double>(result.batches.size());
    s.mean_delta = delta / static_cast<double>(result.batches.size());
    out.total_flops += s.flops;
    out.total_attention_flops += s.attention_flops;
    out.final_val_loss = s.val_loss;
    out.epochs.push_back(s);

    iterations += result.batches.size();
    out.batches.insert(out.batches.end(), result.batches.begin(), result.batches.end());
    for (auto& p : result.plans) out.plans.push_back(std::move(p));
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
  out.seconds_per_iteration = iterations ? elapsed.count() / static_cast<double>(iterations) : 0.0;
  if (!out.plans.empty()) out.reduction = reduction_report(out.plans);
  return out;
}

}  // namespace vardrop
