#include "slgad/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "slgad/error.hpp"
#include "slgad/rng.hpp"

namespace slgad {

namespace {
constexpr std::size_t kReductionBlocks = 16;
}  // namespace

void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads <= 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(threads);
  pool.reserve(threads);
  for (std::size_t c = 0; c < threads; ++c) {
    const std::size_t begin = n * c / threads, end = n * (c + 1) / threads;
    pool.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

GenerativeLoss generative_loss(const Matrix& x_targets, const Matrix& recon1,
                               const Matrix& recon2) {
  if (!x_targets.same_shape(recon1) || !x_targets.same_shape(recon2)) {
    throw std::invalid_argument("generative_loss: shapes " + shape_string(x_targets) + ", " +
                                shape_string(recon1) + ", " + shape_string(recon2));
  }
  const std::size_t b = x_targets.rows(), d = x_targets.cols();
  if (b == 0 || d == 0) throw std::invalid_argument("generative_loss: empty batch");
  const double norm = 1.0 / (static_cast<double>(b) * static_cast<double>(d));

  GenerativeLoss out;
  const std::array<const Matrix*, 2> recon{&recon1, &recon2};
  for (std::size_t j = 0; j < 2; ++j) {
    out.grad_recon[j] = Matrix(b, d);
    double sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      auto x = x_targets.row(i);
      auto r = recon[j]->row(i);
      auto g = out.grad_recon[j].row(i);
      sum += squared_distance(r, x);
      // d/dr of ½ · norm · ‖r - x‖²
      for (std::size_t c = 0; c < d; ++c) g[c] = norm * (r[c] - x[c]);
    }
    out.per_view[j] = sum * norm;
  }
  out.value = 0.5 * (out.per_view[0] + out.per_view[1]);
  return out;
}

ContrastiveLoss contrastive_loss(std::span<const double> pos1, std::span<const double> pos2,
                                 std::span<const double> neg1, std::span<const double> neg2) {
  const std::size_t b = pos1.size();
  if (b == 0 || pos2.size() != b) throw std::invalid_argument("contrastive_loss: batch sizes");
  if (neg1.size() != neg2.size() || neg1.empty() || neg1.size() % b != 0) {
    throw std::invalid_argument("contrastive_loss: negative logits must be B x m");
  }
  const std::size_t m = neg1.size() / b;
  const double inv_2b = 1.0 / (2.0 * static_cast<double>(b));
  const double inv_m = 1.0 / static_cast<double>(m);

  ContrastiveLoss out;
  const std::array<std::span<const double>, 2> pos{pos1, pos2};
  const std::array<std::span<const double>, 2> neg{neg1, neg2};
  for (std::size_t j = 0; j < 2; ++j) {
    double sum = 0.0;
    out.grad_pos[j].resize(b);
    out.grad_neg[j].resize(b * m);
    for (std::size_t i = 0; i < b; ++i) {
      const double p = pos[j][i];
      sum += log_sigmoid(p);
      // ½ · -(1/2B) · d/dp log σ(p) = -(1/4B) σ(-p)
      out.grad_pos[j][i] = -0.5 * inv_2b * sigmoid(-p);
      for (std::size_t k = 0; k < m; ++k) {
        const double n = neg[j][i * m + k];
        sum += inv_m * log_sigmoid(-n);  // log(1 - σ(n))
        out.grad_neg[j][i * m + k] = 0.5 * inv_2b * inv_m * sigmoid(n);
      }
    }
    out.per_view[j] = -inv_2b * sum;
  }
  out.value = 0.5 * (out.per_view[0] + out.per_view[1]);
  return out;
}

double combined_loss(double l_gen, double l_con, const RunConfig& cfg) {
  return cfg.effective_alpha() * l_con + cfg.effective_beta() * l_gen;
}

AdamState AdamState::for_params(const ModelParams& params) {
  AdamState s;
  const std::array<const Matrix*, 3> mats{&params.w_enc, &params.w_dec, &params.w_s};
  for (std::size_t i = 0; i < 3; ++i) {
    s.m[i] = Matrix(mats[i]->rows(), mats[i]->cols());
    s.v[i] = Matrix(mats[i]->rows(), mats[i]->cols());
  }
  return s;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               const AdamHyper& hyper) {
  const std::array<Matrix*, 3> p{&params.w_enc, &params.w_dec, &params.w_s};
  const std::array<const Matrix*, 3> g{&grads.w_enc, &grads.w_dec, &grads.w_s};
  static constexpr std::array<const char*, 3> names{"w_enc", "w_dec", "w_s"};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!g[i]->same_shape(*p[i]) || !state.m[i].same_shape(*p[i]) ||
        !state.v[i].same_shape(*p[i])) {
      throw std::invalid_argument(std::string("adam_step: shape mismatch for ") + names[i]);
    }
    if (!g[i]->all_finite()) {
      throw NumericError(std::string("non-finite gradient in ") + names[i] + " at step " +
                         std::to_string(state.step + 1));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < 3; ++i) {
    auto w = p[i]->values();
    auto gv = g[i]->values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    for (std::size_t e = 0; e < w.size(); ++e) {
      m[e] = hyper.beta1 * m[e] + (1.0 - hyper.beta1) * gv[e];
      v[e] = hyper.beta2 * v[e] + (1.0 - hyper.beta2) * gv[e] * gv[e];
      const double m_hat = m[e] / c1;
      const double v_hat = v[e] / c2;
      w[e] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
  }
}

BatchLossReport batch_gradients(const Graph& graph, const ModelParams& params,
                                const RunConfig& cfg, std::span<const NodeId> batch,
                                std::span<const ViewPair> views,
                                std::span<const std::vector<std::size_t>> partners,
                                Gradients& grads) {
  const std::size_t b = batch.size();
  const std::size_t m = partners.size();
  const std::size_t d = params.input_dim(), hdim = params.hidden_dim();
  if (views.size() != b) throw std::invalid_argument("batch_gradients: one view pair per target");
  if (m == 0) throw std::invalid_argument("batch_gradients: need at least one negative");
  for (const auto& p : partners)
    if (p.size() != b) throw std::invalid_argument("batch_gradients: partner list size");

  std::vector<ForwardTrace> traces(b);
  parallel_chunks(b, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<const SubgraphView*> n1(m), n2(m);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t r = 0; r < m; ++r) {
        n1[r] = &views[partners[r][i]].first;
        n2[r] = &views[partners[r][i]].second;
      }
      traces[i] = forward_full(params, graph.feature_row(batch[i]), views[i].first,
                               views[i].second, n1, n2);
    }
  });

  Matrix x(b, d), r1(b, d), r2(b, d);
  std::vector<double> p1(b), p2(b), q1(b * m), q2(b * m);
  for (std::size_t i = 0; i < b; ++i) {
    auto src = graph.feature_row(batch[i]);
    std::copy(src.begin(), src.end(), x.row(i).begin());
    const auto& out = traces[i].outputs;
    std::copy(out.recon[0].begin(), out.recon[0].end(), r1.row(i).begin());
    std::copy(out.recon[1].begin(), out.recon[1].end(), r2.row(i).begin());
    p1[i] = out.pos_logit[0];
    p2[i] = out.pos_logit[1];
    std::copy(out.neg_logit[0].begin(), out.neg_logit[0].end(), q1.begin() + i * m);
    std::copy(out.neg_logit[1].begin(), out.neg_logit[1].end(), q2.begin() + i * m);
  }

  const auto gen = generative_loss(x, r1, r2);
  const auto con = contrastive_loss(p1, p2, q1, q2);
  const double alpha = cfg.effective_alpha(), beta = cfg.effective_beta();

  BatchLossReport report;
  report.l_gen = gen.value;
  report.l_con = con.value;
  report.l_total = combined_loss(gen.value, con.value, cfg);
  report.gen_per_view = gen.per_view;
  report.con_per_view = con.per_view;

  // Per-sample gradients are summed into a fixed number of blocks, then the
  // blocks in order, so the result does not depend on the thread count.
  const std::size_t chunks = std::min(kReductionBlocks, b);
  std::vector<Gradients> partial(chunks, ModelParams::zeros(d, hdim));
  parallel_chunks(chunks, cfg.threads, [&](std::size_t, std::size_t c0, std::size_t c1) {
    OutputGrads up;
    for (std::size_t c = c0; c < c1; ++c) {
      for (std::size_t i = b * c / chunks; i < b * (c + 1) / chunks; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          if (beta != 0.0) {
            auto g = gen.grad_recon[j].row(i);
            up.recon[j].assign(g.begin(), g.end());
            for (auto& v : up.recon[j]) v *= beta;
          } else {
            up.recon[j].clear();
          }
          up.pos_logit[j] = alpha * con.grad_pos[j][i];
          up.neg_logit[j].assign(con.grad_neg[j].begin() + i * m,
                                 con.grad_neg[j].begin() + (i + 1) * m);
          for (auto& v : up.neg_logit[j]) v *= alpha;
        }
        backward_full(params, traces[i], up, partial[c]);
      }
    }
  });

  grads = std::move(partial[0]);
  for (std::size_t c = 1; c < chunks; ++c) {
    axpy(1.0, partial[c].w_enc.values(), grads.w_enc.values());
    axpy(1.0, partial[c].w_dec.values(), grads.w_dec.values());
    axpy(1.0, partial[c].w_s.values(), grads.w_s.values());
  }
  return report;
}

ModelParams initial_params(const Graph& graph, const RunConfig& cfg) {
  auto rng = make_rng(cfg.seed, Stream::kInit);
  return ModelParams::glorot(graph.num_features(), cfg.d_hidden, rng);
}

TrainResult train(const Graph& graph, const RunConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  return train_from(graph, cfg, initial_params(graph, cfg), on_epoch);
}

TrainResult train_from(const Graph& graph, const RunConfig& cfg, ModelParams params,
                       const EpochCallback& on_epoch) {
  cfg.validate();
  params.validate();
  if (params.input_dim() != graph.num_features()) {
    throw std::invalid_argument("train: parameter input dim does not match graph features");
  }
  const std::size_t n = graph.num_nodes();
  if (cfg.epochs > 0 && n <= cfg.negative_ratio) {
    throw ConfigError("graph has too few nodes to form negatives");
  }
  const auto sampler = cfg.sampler();
  AdamState adam = AdamState::for_params(params);
  TrainResult result;
  result.log.reserve(cfg.epochs);

  std::vector<NodeId> order(n);
  Gradients grads;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), NodeId{0});
    auto order_rng = make_rng(cfg.seed, Stream::kTrainOrder, {epoch});
    std::shuffle(order.begin(), order.end(), order_rng);

    EpochLoss acc{epoch, 0.0, 0.0, 0.0};
    std::size_t seen = 0;
    for (std::size_t start = 0, batch_idx = 0; start < n; start += cfg.batch_size, ++batch_idx) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      // A trailing batch too small to hold distinct negatives is skipped.
      if (end - start <= cfg.negative_ratio) continue;
      std::span<const NodeId> batch(order.data() + start, end - start);

      std::vector<ViewPair> views(batch.size());
      parallel_chunks(batch.size(), cfg.threads, [&](std::size_t, std::size_t b0, std::size_t b1) {
        for (std::size_t i = b0; i < b1; ++i) {
          auto rng = make_rng(cfg.seed, Stream::kTrainView, {epoch, batch[i]});
          views[i] = sample_view_pair(graph, batch[i], sampler, rng);
        }
      });
      auto neg_rng = make_rng(cfg.seed, Stream::kTrainNegative, {epoch, batch_idx});
      const auto partners = negative_partners(batch.size(), cfg.negative_ratio, neg_rng);

      const auto report = batch_gradients(graph, params, cfg, batch, views, partners, grads);
      if (!std::isfinite(report.l_total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
      }
      adam_step(params, grads, adam, cfg.lr);

      const double w = static_cast<double>(batch.size());
      acc.l_gen += w * report.l_gen;
      acc.l_con += w * report.l_con;
      acc.l_total += w * report.l_total;
      seen += batch.size();
    }
    if (seen > 0) {
      acc.l_gen /= static_cast<double>(seen);
      acc.l_con /= static_cast<double>(seen);
      acc.l_total /= static_cast<double>(seen);
    }
    result.log.push_back(acc);
    if (on_epoch) on_epoch(acc);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace slgad
