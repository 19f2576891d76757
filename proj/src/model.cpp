#include "vardrop/model.hpp"

#include "vardrop/error.hpp"
#include "vardrop/rng.hpp"
#include "vardrop/spectral.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace vardrop {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

void check_finite(const Eigen::MatrixXd& m, const char* stage) {
  if (!m.allFinite()) fail(ErrorKind::Numeric, std::string("non-finite values in ") + stage);
}

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
}

void fill_uniform(Eigen::VectorXd& v, double bound, Rng& rng) {
  for (Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-bound, bound);
}

void check_retained(std::span<const std::size_t> retained, std::size_t n) {
  require(!retained.empty(), "retained index list is empty");
  std::vector<bool> seen(n, false);
  for (auto r : retained) {
    require(r < n, "retained index " + std::to_string(r) + " out of range for " + std::to_string(n) + " variates");
    require(!seen[r], "retained index " + std::to_string(r) + " is duplicated");
    seen[r] = true;
  }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(idx(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(idx(i)) = m.row(idx(rows[i]));
  return out;
}

void check_shape(const MultivariateWindow& window, const ModelParams& params) {
  require(window.length() == static_cast<std::size_t>(params.w_embed.rows()),
          "window length " + std::to_string(window.length()) + " does not match model lookback " +
              std::to_string(params.w_embed.rows()));
}

}  // namespace

ModelParams ModelParams::zeros(const ModelShape& s) {
  ModelParams p;
  p.w_embed = Eigen::MatrixXd::Zero(idx(s.lookback), idx(s.d_model));
  p.b_embed = Eigen::VectorXd::Zero(idx(s.d_model));
  p.w_q = Eigen::MatrixXd::Zero(idx(s.d_model), idx(s.d_k));
  p.w_k = p.w_q;
  p.w_v = p.w_q;
  p.w_out = Eigen::MatrixXd::Zero(idx(s.d_k), idx(s.d_model));
  p.w_head = Eigen::MatrixXd::Zero(idx(s.d_model), idx(s.horizon));
  p.b_head = Eigen::VectorXd::Zero(idx(s.horizon));
  return p;
}

ModelParams ModelParams::init(const ModelShape& s, std::uint64_t seed) {
  require(s.lookback >= 1 && s.d_model >= 1 && s.d_k >= 1 && s.horizon >= 1, "model dimensions must be positive");
  ModelParams p = zeros(s);
  Rng rng(mix_seed(seed, 0x1417ULL));
  const auto bound = [](std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };
  fill_uniform(p.w_embed, bound(s.lookback), rng);
  fill_uniform(p.b_embed, bound(s.lookback), rng);
  fill_uniform(p.w_q, bound(s.d_model), rng);
  fill_uniform(p.w_k, bound(s.d_model), rng);
  fill_uniform(p.w_v, bound(s.d_model), rng);
  fill_uniform(p.w_out, bound(s.d_k), rng);
  fill_uniform(p.w_head, bound(s.d_model), rng);
  fill_uniform(p.b_head, bound(s.d_model), rng);
  return p;
}

ModelShape ModelParams::shape() const {
  return {static_cast<std::size_t>(w_embed.rows()), static_cast<std::size_t>(w_embed.cols()),
          static_cast<std::size_t>(w_q.cols()), static_cast<std::size_t>(w_head.cols())};
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each([&](Eigen::Map<const Eigen::VectorXd> t) { ok = ok && t.allFinite(); });
  return ok;
}

void ModelParams::for_each(const std::function<void(Eigen::Map<Eigen::VectorXd>)>& fn) {
  fn({w_embed.data(), w_embed.size()});
  fn({b_embed.data(), b_embed.size()});
  for (Eigen::MatrixXd* m : {&w_q, &w_k, &w_v, &w_out, &w_head}) fn({m->data(), m->size()});
  fn({b_head.data(), b_head.size()});
}

void ModelParams::for_each(const std::function<void(Eigen::Map<const Eigen::VectorXd>)>& fn) const {
  fn({w_embed.data(), w_embed.size()});
  fn({b_embed.data(), b_embed.size()});
  for (const Eigen::MatrixXd* m : {&w_q, &w_k, &w_v, &w_out, &w_head}) fn({m->data(), m->size()});
  fn({b_head.data(), b_head.size()});
}

void ModelParams::axpy(double scale, const ModelParams& o) {
  require(shape() == o.shape(), "parameter shape mismatch");
  w_embed += scale * o.w_embed;
  b_embed += scale * o.b_embed;
  w_q += scale * o.w_q;
  w_k += scale * o.w_k;
  w_v += scale * o.w_v;
  w_out += scale * o.w_out;
  w_head += scale * o.w_head;
  b_head += scale * o.b_head;
}

FlopLedger& FlopLedger::operator+=(const FlopLedger& o) {
  embed += o.embed;
  qkv += o.qkv;
  scores += o.scores;
  softmax += o.softmax;
  context += o.context;
  head += o.head;
  return *this;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

Eigen::MatrixXd embed(const MultivariateWindow& window, const ModelParams& params,
                      std::span<const std::size_t> retained) {
  check_shape(window, params);
  check_retained(retained, window.n_variates());
  Eigen::MatrixXd tokens = gather_rows(window.data, retained) * params.w_embed;
  tokens.rowwise() += params.b_embed.transpose();
  return tokens;
}

AttentionTrace attention(const Eigen::MatrixXd& tokens, const ModelParams& params) {
  require(tokens.rows() >= 1, "attention needs at least one token");
  AttentionTrace out;
  out.q = tokens * params.w_q;
  out.k = tokens * params.w_k;
  out.v = tokens * params.w_v;
  check_finite(out.q, "query projection");
  check_finite(out.k, "key projection");
  check_finite(out.v, "value projection");

  const double scale = 1.0 / std::sqrt(static_cast<double>(params.w_q.cols()));
  Eigen::MatrixXd scores = (out.q * out.k.transpose()) * scale;
  check_finite(scores, "attention scores");
  for (Index i = 0; i < scores.rows(); ++i) {
    const double row_max = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - row_max).exp().matrix();
    scores.row(i) /= scores.row(i).sum();
  }
  check_finite(scores, "softmax");
  out.weights = std::move(scores);
  out.context = out.weights * out.v;
  return out;
}

namespace {

ForwardTrace forward_lookback(const MultivariateWindow& window, const ModelParams& params,
                              std::span<const std::size_t> retained) {
  ForwardTrace tr;
  tr.tokens = embed(window, params, retained);
  tr.retained.assign(retained.begin(), retained.end());
  tr.inputs = gather_rows(window.data, retained);
  tr.attention = attention(tr.tokens, params);
  tr.projected = tr.attention.context * params.w_out;
  tr.predictions = tr.projected * params.w_head;
  tr.predictions.rowwise() += params.b_head.transpose();
  check_finite(tr.predictions, "prediction head");
  return tr;
}

}  // namespace

ForwardTrace forward(const MultivariateWindow& window, const ModelParams& params,
                     std::span<const std::size_t> retained) {
  require(window.horizon.has_value(), "forward needs a window with a horizon");
  require(window.horizon_length() == static_cast<std::size_t>(params.w_head.cols()),
          "window horizon does not match model horizon");
  ForwardTrace tr = forward_lookback(window, params, retained);
  const Eigen::MatrixXd target = gather_rows(*window.horizon, retained);
  tr.loss = (tr.predictions - target).squaredNorm() / static_cast<double>(target.size());
  return tr;
}

Gradients backward(const ForwardTrace& tr, const MultivariateWindow& window, const ModelParams& params,
                   double scale) {
  require(window.horizon.has_value(), "backward needs a window with a horizon");
  require(static_cast<std::size_t>(tr.predictions.rows()) == tr.retained.size() &&
              tr.predictions.cols() == params.w_head.cols() && tr.inputs.cols() == params.w_embed.rows(),
          "forward trace does not match parameter shapes");
  const auto& at = tr.attention;
  const Eigen::MatrixXd target = gather_rows(*window.horizon, tr.retained);

  Gradients g;
  Eigen::MatrixXd d_pred = (tr.predictions - target) * (2.0 * scale / static_cast<double>(target.size()));
  g.w_head = tr.projected.transpose() * d_pred;
  g.b_head = d_pred.colwise().sum().transpose();
  const Eigen::MatrixXd d_proj = d_pred * params.w_head.transpose();
  g.w_out = at.context.transpose() * d_proj;
  const Eigen::MatrixXd d_ctx = d_proj * params.w_out.transpose();

  const Eigen::MatrixXd d_weights = d_ctx * at.v.transpose();
  const Eigen::MatrixXd d_v = at.weights.transpose() * d_ctx;
  // Row-wise softmax Jacobian: dS = W .* (dW - rowsum(dW .* W)).
  const Eigen::VectorXd inner = (d_weights.array() * at.weights.array()).rowwise().sum();
  Eigen::MatrixXd d_scores = at.weights.array() * (d_weights.colwise() - inner).array();
  d_scores /= std::sqrt(static_cast<double>(params.w_q.cols()));
  const Eigen::MatrixXd d_q = d_scores * at.k;
  const Eigen::MatrixXd d_k = d_scores.transpose() * at.q;

  g.w_q = tr.tokens.transpose() * d_q;
  g.w_k = tr.tokens.transpose() * d_k;
  g.w_v = tr.tokens.transpose() * d_v;
  const Eigen::MatrixXd d_tokens =
      d_q * params.w_q.transpose() + d_k * params.w_k.transpose() + d_v * params.w_v.transpose();
  g.w_embed = tr.inputs.transpose() * d_tokens;
  g.b_embed = d_tokens.colwise().sum().transpose();
  return g;
}

Eigen::MatrixXd predict_full(const MultivariateWindow& window, const ModelParams& params) {
  const auto all = all_indices(window.n_variates());
  return forward_lookback(window, params, all).predictions;
}

double evaluate_mse(std::span<const MultivariateWindow> windows, const ModelParams& params) {
  require(!windows.empty(), "evaluation needs at least one window");
  double sse = 0.0;
  double count = 0.0;
  for (const auto& w : windows) {
    require(w.horizon.has_value(), "evaluation windows need a horizon");
    const Eigen::MatrixXd pred = predict_full(w, params);
    sse += (pred - *w.horizon).squaredNorm();
    count += static_cast<double>(pred.size());
  }
  return sse / count;
}

FlopLedger count_flops(std::size_t n, std::size_t t, std::size_t d, std::size_t dk, std::size_t h) {
  using U = std::uint64_t;
  const U N = n, T = t, D = d, DK = dk, H = h;
  FlopLedger f;
  f.embed = 2 * N * T * D + N * D;
  f.qkv = 3 * 2 * N * D * DK;
  f.scores = 2 * N * N * DK;
  f.softmax = 4 * N * N;
  f.context = 2 * N * N * DK;
  f.head = 2 * N * DK * D + 2 * N * D * H + N * H;
  return f;
}

FlopLedger count_flops(std::size_t n_tokens, const ModelShape& s) {
  return count_flops(n_tokens, s.lookback, s.d_model, s.d_k, s.horizon);
}

EpochResult train_epoch(std::span<const WindowBatch> batches, ModelParams& params, const TrainConfig& config,
                        std::size_t epoch) {
  require(config.lr > 0.0, "learning rate must be positive");
  const ModelShape shape = params.shape();
  EpochResult out;
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const WindowBatch& batch = batches[b];
    batch.validate();
    const std::size_t n = batch.n_variates();

    BatchMetrics m;
    m.epoch = epoch;
    m.batch = b;
    std::vector<std::size_t> retained;
    if (config.vardrop_on) {
      const auto hashes = kdfh(batch, {config.k, config.epsilon, config.normalize_windows});
      const auto groups = group_by_hash(hashes);
      const std::uint64_t batch_index = (static_cast<std::uint64_t>(epoch) << 32) | b;
      auto plan = stratified_sample(groups, config.gs, config.seed, batch_index);
      retained = plan.retained;
      m.delta = plan.delta;
      out.plans.push_back(std::move(plan));
    } else {
      retained = all_indices(n);
    }
    m.tokens_used = retained.size();

    Gradients grad = ModelParams::zeros(shape);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    FlopLedger ledger;
    for (const auto& w : batch.windows) {
      const auto tr = forward(w, params, retained);
      m.loss += tr.loss * inv_b;
      grad.axpy(1.0, backward(tr, w, params, inv_b));
      ledger += count_flops(retained.size(), shape);
    }
    params.axpy(-config.lr, grad);
    if (!params.all_finite()) {
      fail(ErrorKind::Numeric, "parameters diverged at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(b) + "; lower the learning rate");
    }
    m.flops = ledger.total();
    m.attention_flops = ledger.attention();
    loss_sum += m.loss;
    out.batches.push_back(m);
  }
  out.mean_loss = batches.empty() ? 0.0 : loss_sum / static_cast<double>(batches.size());
  return out;
}

}  // namespace vardrop
