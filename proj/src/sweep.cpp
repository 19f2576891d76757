#include "vardrop/sweep.hpp"

#include "vardrop/error.hpp"

namespace vardrop {

const SweepCell* SweepResult::find(std::size_t k, std::size_t gs) const {
  for (const auto& c : cells) {
    if (c.k == k && c.gs == gs) return &c;
  }
  return nullptr;
}

SweepResult sensitivity_sweep(const RunConfig& base, const ExperimentData& data, std::span<const std::size_t> ks,
                              std::span<const std::size_t> gss) {
  require(!ks.empty() && !gss.empty(), "sweep grid must be nonempty");
  SweepResult out;
  for (auto k : ks) {
    for (auto gs : gss) {
      RunConfig cfg = base;
      cfg.k = k;
      cfg.gs = gs;
      cfg.vardrop_on = true;
      require(k >= 1 && k <= cfg.epsilon, "sweep k=" + std::to_string(k) + " outside [1, epsilon]");
      require(gs >= 1, "sweep gs must be at least 1");
      const auto result = run_experiment(cfg, data);
      SweepCell cell{k, gs, result.reduction ? result.reduction->mean_delta : 0.0, result.final_val_loss};
      out.cells.push_back(cell);
    }
  }
  return out;
}

}  // namespace vardrop
