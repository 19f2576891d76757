#pragma once

#include "oracles.hpp"
#include "vardrop/model.hpp"
#include "vardrop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gradcheck {

struct Instance {
  vardrop::MultivariateWindow window;
  vardrop::ModelParams params;
  std::vector<std::size_t> retained;
};

// Random window with N variates, of which every other one (up to n_retained)
// is kept, so the retained set is a strict subset.
inline Instance make_instance(std::size_t N, std::size_t n_retained, const vardrop::ModelShape& shape,
                              std::uint64_t seed) {
  vardrop::Rng rng(seed ^ 0x5eedULL);
  Instance inst;
  inst.window.data.resize(N, shape.lookback);
  inst.window.horizon = Eigen::MatrixXd(N, shape.horizon);
  for (Eigen::Index i = 0; i < inst.window.data.size(); ++i) inst.window.data.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < inst.window.horizon->size(); ++i) inst.window.horizon->data()[i] = rng.normal();
  inst.params = vardrop::ModelParams::init(shape, seed);
  // Larger query/key weights make the softmax Jacobian path non-negligible.
  inst.params.w_q *= 3.0;
  inst.params.w_k *= 3.0;
  for (std::size_t v = 0; v < N && inst.retained.size() < n_retained; v += 2) inst.retained.push_back(v);
  for (std::size_t v = 1; v < N && inst.retained.size() < n_retained; v += 2) inst.retained.push_back(v);
  std::sort(inst.retained.begin(), inst.retained.end());
  return inst;
}

struct Result {
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

// Relative error |a - n| / max(|a|, |n|), with an absolute floor so entries
// that are zero up to round-off are not divided by noise.
inline Result compare(Instance& inst, double step = 1e-5, double floor = 1e-7) {
  const auto tr = vardrop::forward(inst.window, inst.params, inst.retained);
  const auto g = vardrop::backward(tr, inst.window, inst.params);
  std::vector<double> analytic;
  g.for_each([&](Eigen::Map<const Eigen::VectorXd> t) { analytic.insert(analytic.end(), t.data(), t.data() + t.size()); });

  std::vector<double*> slots;
  inst.params.for_each([&](Eigen::Map<Eigen::VectorXd> t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) slots.push_back(t.data() + i);
  });

  const auto loss = [&] { return vardrop::forward(inst.window, inst.params, inst.retained).loss; };
  Result r;
  r.entries = slots.size();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double numeric = oracle::central_difference(loss, *slots[i], step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    r.max_rel_error = std::max(r.max_rel_error, std::abs(analytic[i] - numeric) / denom);
  }
  return r;
}

}  // namespace gradcheck
