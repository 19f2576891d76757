#pragma once

#include "vardrop/spectral.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vardrop {

/// Partition of variates by exact hash key. std::map keeps keys in
/// lexicographic order, which is the iteration order everywhere downstream.
struct GroupTable {
  std::map<std::string, std::vector<std::size_t>> groups;
  std::size_t n_variates = 0;

  std::size_t group_count() const { return groups.size(); }
  // Group index per variate, in key order.
  std::vector<int> labels() const;
};

struct ReductionPlan {
  std::vector<std::size_t> retained;  // sorted
  std::map<std::string, std::vector<std::size_t>> per_group;
  std::size_t gs = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t batch_index = 0;
  std::size_t n_variates = 0;

  std::size_t tokens_used() const { return retained.size(); }
};

struct ReductionSummary {
  std::size_t iterations = 0;
  double mean_tokens = 0.0;
  double std_tokens = 0.0;  // population
  double mean_delta = 0.0;
};

GroupTable group_by_hash(std::span<const HashValue> hashes);
GroupTable group_by_key(std::span<const std::string> keys);

/// Keeps min(|G_i|, gs) variates per group. Oversized groups are sampled
/// uniformly without replacement by a generator seeded from
/// (seed, batch_index, group key).
ReductionPlan stratified_sample(const GroupTable& table, std::size_t gs, std::uint64_t seed,
                                std::uint64_t batch_index = 0);

/// 1 - (1/N) * sum_i min(|G_i|, gs), evaluated directly from group sizes.
double reduction_ratio(const GroupTable& table, std::size_t gs);

ReductionSummary reduction_report(std::span<const ReductionPlan> plans);

}  // namespace vardrop
