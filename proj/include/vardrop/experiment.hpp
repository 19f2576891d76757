#pragma once

#include "vardrop/config.hpp"
#include "vardrop/dataset.hpp"
#include "vardrop/model.hpp"
#include "vardrop/reduction.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vardrop {

struct ExperimentData {
  SeriesTable full;
  TableSplits splits;
  std::optional<SynthData> synth;  // present for the synthetic source
};

struct EpochSummary {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double mean_tokens = 0.0;
  double mean_delta = 0.0;
  std::uint64_t flops = 0;
  std::uint64_t attention_flops = 0;
};

struct ExperimentResult {
  std::vector<BatchMetrics> batches;
  std::vector<ReductionPlan> plans;
  std::vector<EpochSummary> epochs;
  std::optional<ReductionSummary> reduction;
  std::uint64_t total_flops = 0;
  std::uint64_t total_attention_flops = 0;
  double final_val_loss = 0.0;
  double seconds_per_iteration = 0.0;  // wall clock; never written to deterministic reports
  ModelParams params;
};

/// Loads the CSV named by `config.data` or generates the synthetic source, then
/// splits chronologically.
ExperimentData prepare_data(const RunConfig& config);

/// Training-split batches for one epoch. Window order is shuffled from
/// (seed, epoch) when `config.shuffle` is set, so every run with the same seed
/// sees the same batches regardless of k, gs or VarDrop.
std::vector<WindowBatch> epoch_batches(const RunConfig& config, const std::vector<MultivariateWindow>& windows,
                                       std::size_t epoch);

ExperimentResult run_experiment(const RunConfig& config, const ExperimentData& data);

}  // namespace vardrop
