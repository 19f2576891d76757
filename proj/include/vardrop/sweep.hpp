#pragma once

#include "vardrop/config.hpp"
#include "vardrop/experiment.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace vardrop {

struct SweepCell {
  std::size_t k = 0;
  std::size_t gs = 0;
  double delta = 0.0;     // mean over every training batch of the run
  double val_loss = 0.0;  // after the final epoch
};

/// Cells in grid order: k outer, gs inner.
struct SweepResult {
  std::vector<SweepCell> cells;

  const SweepCell* find(std::size_t k, std::size_t gs) const;
};

/// Trains one VarDrop run per (k, gs) on the same data and seed.
SweepResult sensitivity_sweep(const RunConfig& base, const ExperimentData& data, std::span<const std::size_t> ks,
                              std::span<const std::size_t> gss);

}  // namespace vardrop
