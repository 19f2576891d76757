#pragma once

#include "vardrop/analysis.hpp"
#include "vardrop/config.hpp"
#include "vardrop/experiment.hpp"
#include "vardrop/model.hpp"
#include "vardrop/reduction.hpp"
#include "vardrop/spectral.hpp"
#include "vardrop/sweep.hpp"

#include <span>
#include <string>

namespace vardrop {

// Text serializers for every artifact the CLI writes. Reals use the fixed
// 12-significant-digit form so identical inputs give identical bytes.

std::string hashes_json(std::size_t k, std::size_t epsilon, std::span<const HashValue> hashes);
std::string reduce_json(const ReductionPlan& plan);

// iteration,tokens_used,delta
std::string reduction_csv(std::span<const ReductionPlan> plans);

// epoch,batch,loss,tokens_used,delta,flops
std::string metrics_csv(std::span<const BatchMetrics> batches);

std::string report_json(const RunConfig& config, const ExperimentResult& result, bool include_timing = false);
std::string checkpoint_json(const ModelParams& params, std::uint64_t seed);

std::string correlation_csv(const CorrelationMatrix& matrix);
// bin_lo,bin_hi,count
std::string histogram_csv(std::span<const HistogramBin> bins);
std::string shift_json(const CorrelationShift& shift, std::span<const std::size_t> starts, std::size_t lookback);

// k,gs,delta,val_loss
std::string sweep_csv(const SweepResult& result);

std::string flop_ledger_json(const FlopLedger& ledger);

}  // namespace vardrop
