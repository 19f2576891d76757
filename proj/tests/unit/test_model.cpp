#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "vardrop/error.hpp"
#include "vardrop/model.hpp"
#include "vardrop/reduction.hpp"
#include "vardrop/rng.hpp"
#include "vardrop/spectral.hpp"

#include <numbers>

using namespace vardrop;

namespace {

oracle::Mat to_mat(const Eigen::MatrixXd& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

oracle::Vec to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

oracle::CountingForward::Params to_oracle(const ModelParams& p) {
  return {to_mat(p.w_embed), to_vec(p.b_embed), to_mat(p.w_q), to_mat(p.w_k), to_mat(p.w_v),
          to_mat(p.w_out),   to_mat(p.w_head),  to_vec(p.b_head)};
}

double max_abs_diff(const Eigen::MatrixXd& a, const oracle::Mat& b) {
  double m = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b[i][j]));
  return m;
}

const ModelShape kSmall{16, 8, 4, 4};

std::vector<WindowBatch> synthetic_batches(std::size_t n_batches, std::size_t B, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_variates = 16;
  spec.n_prototypes = 4;
  spec.length = 400;
  spec.period = 16;
  spec.max_bin = 7;
  spec.noise_sigma = 0.05;
  spec.seed = seed;
  const auto d = synth_redundant(spec);
  const auto w = sliding_windows(d.table, 16, 4, 3);
  std::vector<MultivariateWindow> used(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n_batches * B));
  return make_batches(used, B);
}

}  // namespace

TEST_CASE("parameter shapes and seeded init") {
  const auto p = ModelParams::init(kSmall, 3);
  CHECK(p.shape() == kSmall);
  CHECK(p.w_embed.rows() == 16);
  CHECK(p.w_embed.cols() == 8);
  CHECK(p.w_q.cols() == 4);
  CHECK(p.w_out.rows() == 4);
  CHECK(p.w_head.cols() == 4);
  CHECK(p.w_embed.cwiseAbs().maxCoeff() <= 0.25);
  CHECK(p.w_q.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0));
  CHECK(p.all_finite());
  CHECK(ModelParams::init(kSmall, 3).w_head == p.w_head);
  CHECK(ModelParams::init(kSmall, 4).w_head != p.w_head);
}

TEST_CASE("embedding") {
  auto inst = gradcheck::make_instance(6, 3, kSmall, 1);
  SUBCASE("zero window gives the bias in every row") {
    MultivariateWindow zero{Eigen::MatrixXd::Zero(6, 16), 0, std::nullopt};
    const auto t = embed(zero, inst.params, all_indices(6));
    for (Eigen::Index r = 0; r < 6; ++r) CHECK(t.row(r) == inst.params.b_embed.transpose());
  }
  SUBCASE("retained rows match a naive matmul") {
    const std::vector<std::size_t> keep{5, 1, 3};
    const auto t = embed(inst.window, inst.params, keep);
    oracle::Mat x;
    for (auto r : keep) x.push_back(to_vec(inst.window.data.row(r).transpose()));
    auto ref = oracle::matmul(x, to_mat(inst.params.w_embed));
    for (auto& row : ref)
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += inst.params.b_embed(j);
    CHECK(max_abs_diff(t, ref) < 1e-9);
    CHECK(embed(inst.window, inst.params, all_indices(6)).rows() == 6);
  }
  SUBCASE("bad indices") {
    const std::vector<std::size_t> out_of_range{6};
    const std::vector<std::size_t> duplicated{1, 1};
    CHECK_THROWS_AS(embed(inst.window, inst.params, out_of_range), Error);
    CHECK_THROWS_AS(embed(inst.window, inst.params, duplicated), Error);
  }
}

TEST_CASE("attention") {
  auto p = ModelParams::init(kSmall, 2);
  SUBCASE("single token") {
    Eigen::MatrixXd tok = Eigen::MatrixXd::Random(1, 8);
    const auto a = attention(tok, p);
    CHECK(a.weights(0, 0) == 1.0);
    CHECK((a.context - a.v).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("identical tokens attend uniformly") {
    Eigen::MatrixXd tok = Eigen::RowVectorXd::LinSpaced(8, -1, 1).replicate(5, 1);
    const auto a = attention(tok, p);
    CHECK((a.weights.array() - 0.2).abs().maxCoeff() < 1e-12);
    const Eigen::RowVectorXd mean_v = a.v.colwise().mean();
    for (Eigen::Index r = 0; r < 5; ++r) CHECK((a.context.row(r) - mean_v).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("two-token hand case") {
    // Scores [[0, ln 3], [0, 0]] with d_k = 1.
    ModelParams s = ModelParams::zeros({2, 2, 1, 1});
    s.w_q(0, 0) = 1.0;
    s.w_k(1, 0) = std::log(3.0);
    s.w_v(0, 0) = 1.0;
    const Eigen::MatrixXd tok = Eigen::MatrixXd::Identity(2, 2);
    const auto a = attention(tok, s);
    CHECK(a.weights(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(a.weights(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(a.weights(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.context(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("rows are stochastic") {
    auto inst = gradcheck::make_instance(9, 9, kSmall, 5);
    const auto t = forward(inst.window, inst.params, inst.retained);
    for (Eigen::Index r = 0; r < 9; ++r) CHECK(std::abs(t.attention.weights.row(r).sum() - 1.0) < 1e-9);
    CHECK(t.attention.weights.minCoeff() >= 0.0);
  }
  SUBCASE("non-finite tokens name the stage") {
    Eigen::MatrixXd tok = Eigen::MatrixXd::Zero(2, 8);
    tok(0, 0) = std::numeric_limits<double>::infinity();
    try {
      attention(tok, p);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Numeric);
      CHECK(std::string(e.what()).find("projection") != std::string::npos);
    }
  }
}

TEST_CASE("forward") {
  SUBCASE("zero weights predict the head bias") {
    auto p = ModelParams::zeros(kSmall);
    p.b_head << 1, 2, 3, 4;
    auto inst = gradcheck::make_instance(4, 4, kSmall, 1);
    const auto t = forward(inst.window, p, inst.retained);
    for (Eigen::Index r = 0; r < 4; ++r) CHECK(t.predictions.row(r) == p.b_head.transpose());
  }
  SUBCASE("perfect predictions have zero loss and zero gradient") {
    auto inst = gradcheck::make_instance(5, 5, kSmall, 2);
    inst.window.horizon = predict_full(inst.window, inst.params);
    const auto t = forward(inst.window, inst.params, inst.retained);
    CHECK(t.loss == 0.0);
    const auto g = backward(t, inst.window, inst.params);
    g.for_each([](Eigen::Map<const Eigen::VectorXd> x) { CHECK(x.cwiseAbs().maxCoeff() == 0.0); });
  }
  SUBCASE("matches a straight-line recomputation") {
    auto inst = gradcheck::make_instance(7, 4, kSmall, 3);
    const auto t = forward(inst.window, inst.params, inst.retained);
    oracle::Mat x, y;
    for (auto r : inst.retained) {
      x.push_back(to_vec(inst.window.data.row(r).transpose()));
      y.push_back(to_vec(inst.window.horizon->row(r).transpose()));
    }
    oracle::CountingForward naive;
    oracle::Mat w;
    const auto pred = naive.run(x, to_oracle(inst.params), &w);
    CHECK(max_abs_diff(t.predictions, pred) < 1e-9);
    CHECK(max_abs_diff(t.attention.weights, w) < 1e-12);
    CHECK(std::abs(t.loss - oracle::mse(pred, y)) < 1e-9 * oracle::mse(pred, y));
  }
  SUBCASE("missing horizon is a parameter error") {
    auto inst = gradcheck::make_instance(3, 3, kSmall, 4);
    inst.window.horizon.reset();
    try {
      forward(inst.window, inst.params, inst.retained);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parameter);
    }
  }
}

TEST_CASE("permuting retained tokens permutes predictions") {
  auto inst = gradcheck::make_instance(6, 6, kSmall, 8);
  const auto base = forward(inst.window, inst.params, inst.retained);
  MultivariateWindow shuffled = inst.window;
  const std::vector<int> perm{2, 5, 0, 4, 1, 3};
  for (int r = 0; r < 6; ++r) {
    shuffled.data.row(r) = inst.window.data.row(perm[r]);
    shuffled.horizon->row(r) = inst.window.horizon->row(perm[r]);
  }
  const auto moved = forward(shuffled, inst.params, inst.retained);
  for (int r = 0; r < 6; ++r) CHECK((moved.predictions.row(r) - base.predictions.row(perm[r])).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(moved.loss == doctest::Approx(base.loss).epsilon(1e-12));
}

TEST_CASE("predict_full") {
  auto inst = gradcheck::make_instance(5, 5, kSmall, 6);
  const auto full = predict_full(inst.window, inst.params);
  CHECK(full == forward(inst.window, inst.params, all_indices(5)).predictions);
  CHECK(full == predict_full(inst.window, inst.params));

  const ModelShape wide{96, 8, 4, 96};
  MultivariateWindow big{Eigen::MatrixXd::Random(321, 96), 0, std::nullopt};
  const auto out = predict_full(big, ModelParams::init(wide, 0));
  CHECK(out.rows() == 321);
  CHECK(out.cols() == 96);
}

TEST_CASE("gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = gradcheck::make_instance(8, 5, kSmall, seed);
    const auto r = gradcheck::compare(inst);
    CHECK(r.entries == 16 * 8 + 8 + 3 * 8 * 4 + 4 * 8 + 8 * 4 + 4);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("gradient scale is linear in the loss weight") {
  auto inst = gradcheck::make_instance(6, 4, kSmall, 12);
  const auto t = forward(inst.window, inst.params, inst.retained);
  const auto g1 = backward(t, inst.window, inst.params, 1.0);
  const auto g2 = backward(t, inst.window, inst.params, 2.0);
  std::vector<double> a, b;
  g1.for_each([&](Eigen::Map<const Eigen::VectorXd> x) { a.insert(a.end(), x.data(), x.data() + x.size()); });
  g2.for_each([&](Eigen::Map<const Eigen::VectorXd> x) { b.insert(b.end(), x.data(), x.data() + x.size()); });
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(2 * a[i]).epsilon(1e-14).scale(1e-300));
}

TEST_CASE("flop ledger") {
  const auto f = count_flops(64, 96, 32, 16, 96);
  CHECK(f.scores == 2ull * 64 * 64 * 16);
  CHECK(f.softmax == 4ull * 64 * 64);
  CHECK(f.attention() == f.scores + f.softmax + f.context);
  const auto half = count_flops(32, 96, 32, 16, 96);
  CHECK(f.scores == 4 * half.scores);
  CHECK(f.attention() == 4 * half.attention());
  CHECK(count_flops(32, ModelShape{96, 32, 16, 96}) == half);
}

TEST_CASE("flop ledger equals an instrumented counter") {
  for (std::size_t n : {1u, 3u, 5u}) {
    auto inst = gradcheck::make_instance(n, n, kSmall, n);
    oracle::Mat x;
    for (std::size_t r = 0; r < n; ++r) x.push_back(to_vec(inst.window.data.row(r).transpose()));
    oracle::CountingForward counter;
    counter.run(x, to_oracle(inst.params));
    CHECK(count_flops(n, kSmall).total() == counter.flops);
  }
}

TEST_CASE("train_epoch") {
  const auto batches = synthetic_batches(4, 4, 3);
  TrainConfig cfg;
  cfg.k = 2;
  cfg.epsilon = 8;
  cfg.lr = 0.01;

  SUBCASE("a no-op reduction matches the dense path bit for bit") {
    auto dense_params = ModelParams::init(kSmall, 1);
    auto sparse_params = dense_params;
    TrainConfig dense = cfg, sparse = cfg;
    dense.vardrop_on = false;
    sparse.gs = 16;
    const auto a = train_epoch(batches, dense_params, dense);
    const auto b = train_epoch(batches, sparse_params, sparse);
    REQUIRE(a.batches.size() == b.batches.size());
    for (std::size_t i = 0; i < a.batches.size(); ++i) {
      CHECK(a.batches[i].loss == b.batches[i].loss);
      CHECK(a.batches[i].tokens_used == 16);
      CHECK(b.batches[i].tokens_used == 16);
      CHECK(a.batches[i].flops == b.batches[i].flops);
    }
    CHECK(dense_params.w_embed == sparse_params.w_embed);
    CHECK(a.plans.empty());
  }

  SUBCASE("reported delta equals the reduction module") {
    auto p = ModelParams::init(kSmall, 1);
    cfg.gs = 1;
    const auto r = train_epoch(batches, p, cfg, 2);
    REQUIRE(r.plans.size() == batches.size());
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto g = group_by_hash(kdfh(batches[b], {cfg.k, cfg.epsilon, false}));
      CHECK(r.batches[b].delta == reduction_ratio(g, cfg.gs));
      CHECK(r.batches[b].delta == r.plans[b].delta);
      CHECK(r.batches[b].tokens_used == g.group_count());
      const auto ledger = count_flops(g.group_count(), kSmall);
      CHECK(r.batches[b].flops == ledger.total() * batches[b].size());
      CHECK(r.batches[b].attention_flops == ledger.attention() * batches[b].size());
      CHECK(r.batches[b].epoch == 2);
    }
  }

  SUBCASE("loss decreases over twenty epochs") {
    auto p = ModelParams::init(kSmall, 5);
    cfg.gs = 2;
    cfg.lr = 0.01;
    const auto all = synthetic_batches(8, 4, 9);
    const double first = train_epoch(all, p, cfg, 0).mean_loss;
    double last = first;
    for (std::size_t e = 1; e < 20; ++e) last = train_epoch(all, p, cfg, e).mean_loss;
    CHECK(last < 0.8 * first);
  }

  SUBCASE("divergence is a numeric error") {
    auto p = ModelParams::init(kSmall, 5);
    cfg.lr = 1e6;
    try {
      for (std::size_t e = 0; e < 5; ++e) train_epoch(batches, p, cfg, e);
      FAIL("expected divergence");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Numeric);
    }
  }
}
