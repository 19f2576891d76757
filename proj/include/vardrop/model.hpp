#pragma once

#include "vardrop/dataset.hpp"
#include "vardrop/reduction.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace vardrop {

struct ModelShape {
  std::size_t lookback = 96;  // T
  std::size_t d_model = 32;   // d
  std::size_t d_k = 16;
  std::size_t horizon = 96;   // H

  bool operator==(const ModelShape&) const = default;
};

/// Single-block variate-token forecaster:
///   tokens = X W_embed + b_embed        (shared across variates)
///   ctx    = softmax(Q K^T / sqrt(d_k)) V,  Q/K/V = tokens W_{q,k,v}
///   pred   = (ctx W_out) W_head + b_head
struct ModelParams {
  Eigen::MatrixXd w_embed;  // T x d
  Eigen::VectorXd b_embed;  // d
  Eigen::MatrixXd w_q;      // d x d_k
  Eigen::MatrixXd w_k;
  Eigen::MatrixXd w_v;
  Eigen::MatrixXd w_out;    // d_k x d
  Eigen::MatrixXd w_head;   // d x H
  Eigen::VectorXd b_head;   // H

  static ModelParams zeros(const ModelShape& shape);
  // Uniform in +-1/sqrt(fan_in), seeded.
  static ModelParams init(const ModelShape& shape, std::uint64_t seed);

  ModelShape shape() const;
  bool all_finite() const;

  // Visits every tensor as a flat mutable view, in declaration order.
  void for_each(const std::function<void(Eigen::Map<Eigen::VectorXd>)>& fn);
  void for_each(const std::function<void(Eigen::Map<const Eigen::VectorXd>)>& fn) const;

  // this += scale * other
  void axpy(double scale, const ModelParams& other);
};

using Gradients = ModelParams;

struct AttentionTrace {
  Eigen::MatrixXd q;        // N' x d_k
  Eigen::MatrixXd k;
  Eigen::MatrixXd v;
  Eigen::MatrixXd weights;  // N' x N', row-stochastic
  Eigen::MatrixXd context;  // N' x d_k
};

struct ForwardTrace {
  std::vector<std::size_t> retained;
  Eigen::MatrixXd inputs;     // N' x T
  Eigen::MatrixXd tokens;     // N' x d
  AttentionTrace attention;
  Eigen::MatrixXd projected;  // N' x d
  Eigen::MatrixXd predictions;  // N' x H
  double loss = 0.0;  // MSE over retained rows
};

struct FlopLedger {
  std::uint64_t embed = 0;
  std::uint64_t qkv = 0;
  std::uint64_t scores = 0;
  std::uint64_t softmax = 0;
  std::uint64_t context = 0;
  std::uint64_t head = 0;

  std::uint64_t attention() const { return scores + softmax + context; }
  std::uint64_t total() const { return embed + qkv + scores + softmax + context + head; }
  FlopLedger& operator+=(const FlopLedger& o);
  bool operator==(const FlopLedger&) const = default;
};

std::vector<std::size_t> all_indices(std::size_t n);

Eigen::MatrixXd embed(const MultivariateWindow& window, const ModelParams& params,
                      std::span<const std::size_t> retained);

AttentionTrace attention(const Eigen::MatrixXd& tokens, const ModelParams& params);

ForwardTrace forward(const MultivariateWindow& window, const ModelParams& params,
                     std::span<const std::size_t> retained);

/// Gradients of `scale * trace.loss` with respect to every parameter.
Gradients backward(const ForwardTrace& trace, const MultivariateWindow& window, const ModelParams& params,
                   double scale = 1.0);

/// Dense inference over all variates.
Eigen::MatrixXd predict_full(const MultivariateWindow& window, const ModelParams& params);

/// Mean squared error of predict_full over every window, variate and step.
double evaluate_mse(std::span<const MultivariateWindow> windows, const ModelParams& params);

/// Multiply-add = 2 FLOPs, bias add = 1, softmax = 4 per score element.
FlopLedger count_flops(std::size_t n_tokens, std::size_t lookback, std::size_t d_model, std::size_t d_k,
                       std::size_t horizon);
FlopLedger count_flops(std::size_t n_tokens, const ModelShape& shape);

struct TrainConfig {
  std::size_t k = 3;
  std::size_t epsilon = 25;
  std::size_t gs = 10;
  double lr = 1e-2;
  std::uint64_t seed = 0;
  bool vardrop_on = true;
  bool normalize_windows = false;
};

struct BatchMetrics {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double loss = 0.0;
  std::size_t tokens_used = 0;
  double delta = 0.0;
  std::uint64_t flops = 0;
  std::uint64_t attention_flops = 0;
};

struct EpochResult {
  std::vector<BatchMetrics> batches;
  std::vector<ReductionPlan> plans;  // empty when VarDrop is off
  double mean_loss = 0.0;
};

/// One pass of plain gradient descent over `batches`. With VarDrop on, each
/// batch is hashed, reduced, and only retained variates are embedded, attended
/// and scored. Reduction seeds are drawn from (seed, epoch, batch).
EpochResult train_epoch(std::span<const WindowBatch> batches, ModelParams& params, const TrainConfig& config,
                        std::size_t epoch = 0);

}  // namespace vardrop
