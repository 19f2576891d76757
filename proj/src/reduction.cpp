#include "vardrop/reduction.hpp"

#include "vardrop/error.hpp"
#include "vardrop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vardrop {

std::vector<int> GroupTable::labels() const {
  std::vector<int> out(n_variates, -1);
  int g = 0;
  for (const auto& [key, members] : groups) {
    for (auto v : members) out[v] = g;
    ++g;
  }
  return out;
}

GroupTable group_by_key(std::span<const std::string> keys) {
  if (keys.empty()) fail(ErrorKind::EmptyInput, "cannot group an empty hash list");
  GroupTable table;
  table.n_variates = keys.size();
  for (std::size_t v = 0; v < keys.size(); ++v) table.groups[keys[v]].push_back(v);
  return table;
}

GroupTable group_by_hash(std::span<const HashValue> hashes) {
  std::vector<std::string> keys;
  keys.reserve(hashes.size());
  for (const auto& h : hashes) keys.push_back(h.key());
  return group_by_key(keys);
}

ReductionPlan stratified_sample(const GroupTable& table, std::size_t gs, std::uint64_t seed,
                                std::uint64_t batch_index) {
  if (gs < 1) fail(ErrorKind::Parameter, "group size gs must be at least 1");
  ReductionPlan plan;
  plan.gs = gs;
  plan.seed = seed;
  plan.batch_index = batch_index;
  plan.n_variates = table.n_variates;

  const std::uint64_t batch_seed = mix_seed(seed, batch_index);
  for (const auto& [key, members] : table.groups) {
    std::vector<std::size_t> chosen;
    if (members.size() <= gs) {
      chosen = members;
    } else {
      // Partial Fisher-Yates: the first gs slots become a uniform sample.
      Rng rng(mix_seed(batch_seed, fnv1a(key)));
      std::vector<std::size_t> pool = members;
      for (std::size_t i = 0; i < gs; ++i) {
        const auto j = i + rng.index(pool.size() - i);
        std::swap(pool[i], pool[j]);
      }
      chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(gs));
      std::sort(chosen.begin(), chosen.end());
    }
    plan.retained.insert(plan.retained.end(), chosen.begin(), chosen.end());
    plan.per_group.emplace(key, std::move(chosen));
  }
  std::sort(plan.retained.begin(), plan.retained.end());
  plan.delta = 1.0 - static_cast<double>(plan.retained.size()) / static_cast<double>(table.n_variates);
  return plan;
}

double reduction_ratio(const GroupTable& table, std::size_t gs) {
  std::size_t kept = 0;
  for (const auto& [key, members] : table.groups) kept += std::min(members.size(), gs);
  return 1.0 - static_cast<double>(kept) / static_cast<double>(table.n_variates);
}

ReductionSummary reduction_report(std::span<const ReductionPlan> plans) {
  if (plans.empty()) fail(ErrorKind::Parameter, "reduction report needs at least one plan");
  ReductionSummary out;
  out.iterations = plans.size();
  const double n = static_cast<double>(plans.size());
  double tokens = 0.0;
  double delta = 0.0;
  for (const auto& p : plans) {
    tokens += static_cast<double>(p.tokens_used());
    delta += p.delta;
  }
  out.mean_tokens = tokens / n;
  out.mean_delta = delta / n;
  double var = 0.0;
  for (const auto& p : plans) {
    const double d = static_cast<double>(p.tokens_used()) - out.mean_tokens;
    var += d * d;
  }
  out.std_tokens = std::sqrt(var / n);
  return out;
}

}  // namespace vardrop
