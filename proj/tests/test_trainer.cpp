#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "slgad/benchkit.hpp"
#include "slgad/error.hpp"
#include "slgad/trainer.hpp"

using namespace slgad;

namespace {

RunConfig small_config() {
  RunConfig cfg;
  cfg.k = 3;
  cfg.d_hidden = 3;
  cfg.batch_size = 6;
  cfg.epochs = 1;
  cfg.rounds = 1;
  return cfg;
}

struct BatchFixture {
  Graph graph;
  std::vector<NodeId> batch;
  std::vector<ViewPair> views;
  std::vector<std::vector<std::size_t>> partners;
  oracle::BatchInstance inst;
};

BatchFixture make_batch(std::size_t b, std::size_t d, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  auto g = slgad::testing::random_graph(15, d, 12, rng);
  // Non-negative features keep more ReLU units alive.
  Matrix x = g.features();
  for (auto& v : x.values()) v = std::abs(v);
  Graph graph(g.num_nodes(), g.edge_list(), x);
  BatchFixture f{std::move(graph), {}, {}, {}, {}};
  for (NodeId t = 0; t < b; ++t) {
    f.batch.push_back(static_cast<NodeId>(2 * t));
    f.views.push_back(sample_view_pair(f.graph, 2 * t, SamplerConfig::for_view_size(3), rng));
  }
  f.partners = negative_partners(b, m, rng);
  for (std::size_t i = 0; i < b; ++i) {
    auto row = f.graph.feature_row(f.batch[i]);
    f.inst.x_target.emplace_back(row.begin(), row.end());
    f.inst.view1.push_back(oracle::to_scalar(f.views[i].first));
    f.inst.view2.push_back(oracle::to_scalar(f.views[i].second));
  }
  f.inst.partners = f.partners;
  return f;
}

double oracle_total(const ModelParams& p, const oracle::BatchInstance& inst, const RunConfig& cfg) {
  auto parts = oracle::batch_loss(p, inst);
  return cfg.effective_alpha() * parts.con + cfg.effective_beta() * parts.gen;
}

}  // namespace

TEST(Losses, ZeroLogitsGiveLogTwo) {
  std::vector<double> zero{0.0};
  auto l = contrastive_loss(zero, zero, zero, zero);
  EXPECT_NEAR(l.value, 0.6931471805599453, 1e-12);
  EXPECT_NEAR(l.per_view[0], std::log(2.0), 1e-12);
}

TEST(Losses, GenerativeSingleEntry) {
  auto l = generative_loss(Matrix({{0.0}}), Matrix({{2.0}}), Matrix({{2.0}}));
  EXPECT_DOUBLE_EQ(l.value, 4.0);
  EXPECT_DOUBLE_EQ(l.per_view[1], 4.0);
}

TEST(Losses, CombinedUsesModeWeights) {
  RunConfig cfg;
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 0.5, cfg), 1.1);
  cfg.mode = Mode::kGenOnly;
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 0.5, cfg), 0.6);
  cfg.mode = Mode::kConOnly;
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 0.5, cfg), 0.5);
  cfg.mode = Mode::kUnweighted;
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 0.5, cfg), 1.5);
}

TEST(Losses, MatchScalarOracleAndFiniteDifferences) {
  Rng rng(4);
  std::normal_distribution<double> nd(0.0, 2.0);
  const std::size_t b = 5, m = 2, d = 3;
  std::vector<double> p1(b), p2(b), q1(b * m), q2(b * m);
  for (auto* v : {&p1, &p2, &q1, &q2})
    for (auto& x : *v) x = nd(rng);
  Matrix x(b, d), r1(b, d), r2(b, d);
  for (auto* mat : {&x, &r1, &r2})
    for (auto& v : mat->values()) v = nd(rng);

  // Scalar form of the objective with the naive sigmoid.
  auto con_ref = [&] {
    double s[2] = {0.0, 0.0};
    const std::vector<double>* pos[2] = {&p1, &p2};
    const std::vector<double>* neg[2] = {&q1, &q2};
    for (int j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < b; ++i) {
        s[j] += std::log(oracle::naive_sigmoid((*pos[j])[i]));
        for (std::size_t k = 0; k < m; ++k)
          s[j] += std::log(1.0 - oracle::naive_sigmoid((*neg[j])[i * m + k])) / m;
      }
    return 0.5 * (-s[0] / (2.0 * b) - s[1] / (2.0 * b));
  };
  auto gen_ref = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < b * d; ++i)
      s += std::pow(r1.values()[i] - x.values()[i], 2) + std::pow(r2.values()[i] - x.values()[i], 2);
    return 0.5 * s / static_cast<double>(b * d);
  };

  auto con = contrastive_loss(p1, p2, q1, q2);
  auto gen = generative_loss(x, r1, r2);
  EXPECT_NEAR(con.value, con_ref(), 1e-12);
  EXPECT_NEAR(gen.value, gen_ref(), 1e-12);

  const double eps = 1e-6;
  auto fd = [&](double& slot, auto&& f) {
    const double saved = slot;
    slot = saved + eps;
    const double up = f();
    slot = saved - eps;
    const double down = f();
    slot = saved;
    return (up - down) / (2 * eps);
  };
  for (std::size_t i = 0; i < b; ++i) {
    EXPECT_NEAR(con.grad_pos[0][i], fd(p1[i], con_ref), 1e-7);
    EXPECT_NEAR(con.grad_pos[1][i], fd(p2[i], con_ref), 1e-7);
    for (std::size_t k = 0; k < m; ++k) {
      EXPECT_NEAR(con.grad_neg[0][i * m + k], fd(q1[i * m + k], con_ref), 1e-7);
      EXPECT_NEAR(con.grad_neg[1][i * m + k], fd(q2[i * m + k], con_ref), 1e-7);
    }
    for (std::size_t c = 0; c < d; ++c) {
      EXPECT_NEAR(gen.grad_recon[0](i, c), fd(r1(i, c), gen_ref), 1e-7);
      EXPECT_NEAR(gen.grad_recon[1](i, c), fd(r2(i, c), gen_ref), 1e-7);
    }
  }
}

TEST(Losses, SaturatedLogitsStayFinite) {
  std::vector<double> pos{-800.0}, neg{800.0};
  auto l = contrastive_loss(pos, pos, neg, neg);
  EXPECT_TRUE(std::isfinite(l.value));
  EXPECT_NEAR(l.value, 800.0, 1e-9);
}

TEST(BatchGradients, LossAndGradientsMatchScalarOracle) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (std::size_t m : {1u, 2u}) {
      auto f = make_batch(4, 3, m, seed);
      auto cfg = small_config();
      cfg.negative_ratio = m;
      Rng prng(seed + 9);
      auto params = ModelParams::glorot(3, 3, prng);
      Gradients grads;
      auto report = batch_gradients(f.graph, params, cfg, f.batch, f.views, f.partners, grads);
      auto parts = oracle::batch_loss(params, f.inst);
      EXPECT_NEAR(report.l_gen, parts.gen, 1e-12);
      EXPECT_NEAR(report.l_con, parts.con, 1e-12);
      EXPECT_NEAR(report.l_total, oracle_total(params, f.inst, cfg), 1e-12);

      auto loss = [&] { return oracle_total(params, f.inst, cfg); };
      EXPECT_LT(oracle::max_relative_error(grads.w_enc,
                                           oracle::central_difference(params.w_enc, 1e-6, loss)),
                1e-4);
      EXPECT_LT(oracle::max_relative_error(grads.w_dec,
                                           oracle::central_difference(params.w_dec, 1e-6, loss)),
                1e-4);
      EXPECT_LT(oracle::max_relative_error(grads.w_s,
                                           oracle::central_difference(params.w_s, 1e-6, loss)),
                1e-4);
    }
  }
}

TEST(BatchGradients, HeadsOnlyReachTheirOwnParameters) {
  auto f = make_batch(5, 4, 1, 3);
  Rng prng(1);
  auto params = ModelParams::glorot(4, 3, prng);
  Gradients grads;

  auto cfg = small_config();
  cfg.mode = Mode::kConOnly;
  batch_gradients(f.graph, params, cfg, f.batch, f.views, f.partners, grads);
  for (double v : grads.w_dec.values()) EXPECT_EQ(v, 0.0);

  cfg.mode = Mode::kGenOnly;
  batch_gradients(f.graph, params, cfg, f.batch, f.views, f.partners, grads);
  for (double v : grads.w_s.values()) EXPECT_EQ(v, 0.0);
  bool any = false;
  for (double v : grads.w_dec.values()) any |= v != 0.0;
  EXPECT_TRUE(any);
}

TEST(BatchGradients, ThreadCountDoesNotChangeResult) {
  auto f = make_batch(7, 3, 2, 5);
  Rng prng(2);
  auto params = ModelParams::glorot(3, 3, prng);
  auto cfg = small_config();
  cfg.negative_ratio = 2;
  Gradients one, many;
  batch_gradients(f.graph, params, cfg, f.batch, f.views, f.partners, one);
  cfg.threads = 4;
  batch_gradients(f.graph, params, cfg, f.batch, f.views, f.partners, many);
  EXPECT_EQ(one.w_enc, many.w_enc);
  EXPECT_EQ(one.w_dec, many.w_dec);
  EXPECT_EQ(one.w_s, many.w_s);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ModelParams p = ModelParams::zeros(2, 1);
  Gradients g = ModelParams::zeros(2, 1);
  g.w_enc = Matrix({{0.5}, {-3.0}});
  auto st = AdamState::for_params(p);
  adam_step(p, g, st, 0.01);
  // m̂ = g, v̂ = g², so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(p.w_enc(0, 0), -0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(p.w_enc(1, 0), 0.01 * 3.0 / (3.0 + 1e-8), 1e-15);
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, SecondStepClosedForm) {
  ModelParams p = ModelParams::zeros(1, 1);
  auto st = AdamState::for_params(p);
  const double g1 = 0.2, g2 = -0.7, lr = 0.05;
  Gradients g = ModelParams::zeros(1, 1);
  g.w_s(0, 0) = g1;
  adam_step(p, g, st, lr);
  const double after1 = p.w_s(0, 0);
  g.w_s(0, 0) = g2;
  adam_step(p, g, st, lr);
  const double m = 0.9 * 0.1 * g1 + 0.1 * g2;
  const double v = 0.999 * 0.001 * g1 * g1 + 0.001 * g2 * g2;
  const double m_hat = m / (1 - 0.9 * 0.9), v_hat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p.w_s(0, 0), after1 - lr * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-15);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  Rng rng(1);
  auto p = ModelParams::glorot(3, 2, rng);
  auto before = p;
  auto st = AdamState::for_params(p);
  adam_step(p, ModelParams::zeros(3, 2), st, 0.1);
  EXPECT_EQ(p.w_enc, before.w_enc);
  EXPECT_EQ(p.w_s, before.w_s);
}

TEST(Adam, NonFiniteGradientNamesMatrix) {
  auto p = ModelParams::zeros(2, 2);
  auto st = AdamState::for_params(p);
  auto g = ModelParams::zeros(2, 2);
  g.w_dec(1, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    adam_step(p, g, st, 0.1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("w_dec"), std::string::npos) << e.what();
  }
}

TEST(ParallelChunks, CoversRangeAndPropagatesErrors) {
  std::vector<int> hits(103, 0);
  parallel_chunks(103, 4, [&](std::size_t, std::size_t b, std::size_t e) {
    for (auto i = b; i < e; ++i) hits[i]++;
  });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_chunks(10, 3,
                               [](std::size_t c, std::size_t, std::size_t) {
                                 if (c == 1) throw std::runtime_error("boom");
                               }),
               std::runtime_error);
}

TEST(Train, ZeroEpochsReturnsInitialParams) {
  auto toy = make_toy_benchmark(30, 1);
  auto cfg = small_config();
  cfg.epochs = 0;
  auto res = train(toy.graph, cfg);
  EXPECT_TRUE(res.log.empty());
  auto init = initial_params(toy.graph, cfg);
  EXPECT_EQ(res.params.w_enc, init.w_enc);
  EXPECT_EQ(res.params.w_s, init.w_s);
}

TEST(Train, LossDecreasesOnSmallGraph) {
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto toy = make_toy_benchmark(20, seed + 1);
    RunConfig cfg;
    cfg.k = 4;
    cfg.d_hidden = 8;
    cfg.batch_size = 20;
    cfg.epochs = 40;
    cfg.lr = 0.01;
    cfg.seed = seed;
    auto res = train(toy.graph, cfg);
    ASSERT_EQ(res.log.size(), 40u);
    EXPECT_EQ(res.log.front().epoch, 1u);
    double head = 0, tail = 0;
    for (int i = 0; i < 5; ++i) {
      head += res.log[i].l_total;
      tail += res.log[35 + i].l_total;
    }
    if (tail < head) ++decreased;
  }
  EXPECT_EQ(decreased, 5);
}

TEST(Train, ReproducibleAndThreadIndependent) {
  auto toy = make_toy_benchmark(40, 3);
  RunConfig cfg;
  cfg.k = 4;
  cfg.d_hidden = 6;
  cfg.batch_size = 16;
  cfg.epochs = 3;
  cfg.seed = 42;
  auto a = train(toy.graph, cfg);
  auto b = train(toy.graph, cfg);
  cfg.threads = 3;
  auto c = train(toy.graph, cfg);
  for (const auto* r : {&b, &c}) {
    EXPECT_EQ(a.params.w_enc, r->params.w_enc);
    EXPECT_EQ(a.params.w_dec, r->params.w_dec);
    EXPECT_EQ(a.params.w_s, r->params.w_s);
  }
  cfg.seed = 43;
  auto d = train(toy.graph, cfg);
  EXPECT_NE(a.params.w_enc, d.params.w_enc);
}

TEST(Train, EpochCallbackSeesEveryEpoch) {
  auto toy = make_toy_benchmark(25, 2);
  auto cfg = small_config();
  cfg.epochs = 4;
  std::vector<std::size_t> seen;
  auto res = train(toy.graph, cfg, [&](const EpochLoss& e) { seen.push_back(e.epoch); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3, 4}));
  for (const auto& e : res.log) {
    EXPECT_TRUE(std::isfinite(e.l_total));
    EXPECT_NEAR(e.l_total, cfg.alpha * e.l_con + cfg.beta * e.l_gen, 1e-12);
  }
}

TEST(Train, RejectsInvalidConfig) {
  auto toy = make_toy_benchmark(25, 2);
  auto cfg = small_config();
  cfg.batch_size = 1;
  EXPECT_THROW(train(toy.graph, cfg), ConfigError);
}
