#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "vardrop/error.hpp"
#include "vardrop/reduction.hpp"
#include "vardrop/rng.hpp"

#include <algorithm>
#include <set>

using namespace vardrop;

namespace {

// Keys "g0", "g1", ... with the given sizes, interleaved across variates.
std::vector<std::string> keys_with_sizes(const std::vector<std::size_t>& sizes, Rng& rng) {
  std::vector<std::string> keys;
  for (std::size_t g = 0; g < sizes.size(); ++g)
    for (std::size_t i = 0; i < sizes[g]; ++i) keys.push_back("g" + std::to_string(g));
  rng.shuffle(keys.begin(), keys.end());
  return keys;
}

std::vector<std::string> keys_with_sizes(const std::vector<std::size_t>& sizes) {
  Rng rng(0);
  return keys_with_sizes(sizes, rng);
}

}  // namespace

TEST_CASE("grouping by key") {
  const std::vector<std::string> keys{"a", "b", "a"};
  const auto g = group_by_key(keys);
  CHECK(g.group_count() == 2);
  CHECK(g.groups.at("a") == std::vector<std::size_t>{0, 2});
  CHECK(g.groups.at("b") == std::vector<std::size_t>{1});
  CHECK(g.labels() == std::vector<int>{0, 1, 0});

  const std::vector<std::string> distinct{"e", "d", "c", "b", "a"};
  CHECK(group_by_key(distinct).group_count() == 5);

  CHECK_THROWS_AS(group_by_key(std::vector<std::string>{}), Error);
}

TEST_CASE("groups iterate in lexicographic key order") {
  const std::vector<HashValue> h{{{4, 12, 8}}, {{12, 4, 8}}, {{2, 3, 1}}};
  const auto g = group_by_hash(h);
  std::vector<std::string> order;
  for (const auto& [k, v] : g.groups) order.push_back(k);
  CHECK(order == std::vector<std::string>{"12-4-8", "2-3-1", "4-12-8"});
}

TEST_CASE("stratified sample examples") {
  const auto g = group_by_key(keys_with_sizes({5, 3, 1}));
  const auto p = stratified_sample(g, 2, 0);
  CHECK(p.tokens_used() == 5);
  CHECK(p.delta == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
  CHECK(p.per_group.at("g0").size() == 2);
  CHECK(p.per_group.at("g1").size() == 2);
  CHECK(p.per_group.at("g2").size() == 1);

  const auto all = stratified_sample(g, 5, 0);
  CHECK(all.delta == 0.0);
  CHECK(all.retained == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("one large group") {
  std::vector<std::string> keys(137, "solo");
  const auto p = stratified_sample(group_by_key(keys), 20, 3);
  CHECK(p.tokens_used() == 20);
  CHECK(p.delta == doctest::Approx(117.0 / 137.0).epsilon(1e-15));
  CHECK(std::abs(p.delta - 0.8538) < 0.001);
}

TEST_CASE("gs below one is rejected") {
  const std::vector<std::string> keys{"a"};
  try {
    stratified_sample(group_by_key(keys), 0, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parameter);
  }
}

TEST_CASE("per-group retention and delta identity over random partitions") {
  Rng rng(1234);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::size_t> sizes(1 + rng.index(12));
    for (auto& s : sizes) s = 1 + rng.index(20);
    const auto keys = keys_with_sizes(sizes, rng);
    const auto g = group_by_key(keys);
    const std::size_t gs = 1 + rng.index(25);
    const auto p = stratified_sample(g, gs, rng.next(), rng.next());

    std::size_t kept = 0;
    std::set<std::size_t> uni;
    for (const auto& [key, members] : g.groups) {
      const auto& s = p.per_group.at(key);
      CHECK(s.size() == std::min(members.size(), gs));
      CHECK(!s.empty());
      for (auto v : s) CHECK(std::binary_search(members.begin(), members.end(), v));
      kept += std::min(members.size(), gs);
      uni.insert(s.begin(), s.end());
    }
    CHECK(std::vector<std::size_t>(uni.begin(), uni.end()) == p.retained);
    CHECK(p.delta == 1.0 - static_cast<double>(kept) / static_cast<double>(keys.size()));
    CHECK(reduction_ratio(g, gs) == p.delta);
    CHECK(p.delta < 1.0);
  }
}

TEST_CASE("sampling determinism and seed independence of sizes") {
  const auto g = group_by_key(keys_with_sizes({9, 7, 4, 12}));
  const auto a = stratified_sample(g, 3, 42, 5);
  const auto b = stratified_sample(g, 3, 42, 5);
  CHECK(a.retained == b.retained);
  CHECK(a.per_group == b.per_group);

  bool any_different = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = stratified_sample(g, 3, seed, 5);
    CHECK(c.delta == a.delta);
    for (const auto& [k, s] : c.per_group) CHECK(s.size() == a.per_group.at(k).size());
    any_different |= c.retained != a.retained;
  }
  CHECK(any_different);
  CHECK(stratified_sample(g, 3, 42, 6).retained != a.retained);
}

TEST_CASE("sampling is uniform within a group") {
  std::vector<std::string> keys(10, "x");
  const auto g = group_by_key(keys);
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int i = 0; i < trials; ++i)
    for (auto v : stratified_sample(g, 3, 7, static_cast<std::uint64_t>(i)).retained) ++hits[v];
  for (int h : hits) CHECK(static_cast<double>(h) / trials == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("delta is monotone in gs and in fragmentation") {
  const auto coarse = group_by_key(keys_with_sizes({16, 16}));
  const auto fine = group_by_key(keys_with_sizes({8, 8, 8, 8}));
  double prev = 1.0;
  for (std::size_t gs = 1; gs <= 20; ++gs) {
    const double d = reduction_ratio(coarse, gs);
    CHECK(d <= prev);
    CHECK(reduction_ratio(fine, gs) <= d);
    prev = d;
  }
}

TEST_CASE("reduction report") {
  const auto g = group_by_key(keys_with_sizes({5, 3, 1}));
  std::vector<ReductionPlan> same(4, stratified_sample(g, 2, 0));
  const auto r = reduction_report(same);
  CHECK(r.iterations == 4);
  CHECK(r.std_tokens == 0.0);
  CHECK(r.mean_tokens == 5.0);

  std::vector<ReductionPlan> three(3);
  for (std::size_t i = 0; i < 3; ++i) {
    three[i].retained.resize(117 + i);
    three[i].n_variates = 321;
    three[i].delta = 1.0 - (117.0 + i) / 321.0;
  }
  CHECK(reduction_report(three).mean_tokens == 118.0);
  CHECK(reduction_report(three).std_tokens == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));

  CHECK_THROWS_AS(reduction_report(std::vector<ReductionPlan>{}), Error);
}

TEST_CASE("reduction report against a two-pass oracle") {
  Rng rng(77);
  std::vector<ReductionPlan> plans;
  oracle::Vec tokens, deltas;
  for (int i = 0; i < 50; ++i) {
    std::vector<std::size_t> sizes(1 + rng.index(10));
    for (auto& s : sizes) s = 1 + rng.index(15);
    const auto g = group_by_key(keys_with_sizes(sizes, rng));
    plans.push_back(stratified_sample(g, 1 + rng.index(6), 1, static_cast<std::uint64_t>(i)));
    tokens.push_back(static_cast<double>(plans.back().tokens_used()));
    deltas.push_back(plans.back().delta);
  }
  const auto r = reduction_report(plans);
  const auto t = oracle::two_pass(tokens);
  CHECK(std::abs(r.mean_tokens - t.mean) <= 1e-12 * t.mean);
  CHECK(std::abs(r.std_tokens - t.std) <= 1e-12 * t.std);
  CHECK(std::abs(r.mean_delta - oracle::two_pass(deltas).mean) <= 1e-12);
}
