#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "slgad/config.hpp"
#include "slgad/graph.hpp"
#include "slgad/matrix.hpp"
#include "slgad/model.hpp"

namespace slgad {

struct GenerativeLoss {
  double value = 0.0;                 // ½(L¹ + L²)
  std::array<double, 2> per_view{};   // L¹, L²
  std::array<Matrix, 2> grad_recon;   // dL/dX̂^{φj}[-1,:] per batch row
};

// Per view: mean over the batch of ‖recon_i - x_i‖² / D.
GenerativeLoss generative_loss(const Matrix& x_targets, const Matrix& recon1,
                               const Matrix& recon2);

struct ContrastiveLoss {
  double value = 0.0;
  std::array<double, 2> per_view{};
  std::array<std::vector<double>, 2> grad_pos;  // dL/d logit, length B
  std::array<std::vector<double>, 2> grad_neg;  // length B * m
};

// Jensen-Shannon style binary cross-entropy on logits, per view:
//   L^j = -(1/2B) Σ_i [log σ(s_i) + (1/m) Σ_k log(1 - σ(s̃_ik))]
// where neg logits are laid out row-major as B x m. Computed with log-sigmoid
// so saturated logits stay finite.
ContrastiveLoss contrastive_loss(std::span<const double> pos1, std::span<const double> pos2,
                                 std::span<const double> neg1, std::span<const double> neg2);

// alpha * l_con + beta * l_gen using the mode-adjusted weights.
double combined_loss(double l_gen, double l_con, const RunConfig& cfg);

struct AdamState {
  std::array<Matrix, 3> m;  // first moments: w_enc, w_dec, w_s
  std::array<Matrix, 3> v;  // second moments
  std::size_t step = 0;

  static AdamState for_params(const ModelParams& params);
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update of all three matrices. Throws NumericError naming
// the offending matrix if a gradient is not finite.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               const AdamHyper& hyper = {});

struct BatchLossReport {
  double l_gen = 0.0;
  double l_con = 0.0;
  double l_total = 0.0;
  std::array<double, 2> gen_per_view{};
  std::array<double, 2> con_per_view{};
};

struct EpochLoss {
  std::size_t epoch = 0;  // 1-based
  double l_gen = 0.0;
  double l_con = 0.0;
  double l_total = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLoss> log;
};

// Runs forward, loss and backward on one batch. Gradients are the exact
// gradients of the batch loss; `grads` is overwritten.
BatchLossReport batch_gradients(const Graph& graph, const ModelParams& params,
                                const RunConfig& cfg, std::span<const NodeId> batch,
                                std::span<const ViewPair> views,
                                std::span<const std::vector<std::size_t>> partners,
                                Gradients& grads);

ModelParams initial_params(const Graph& graph, const RunConfig& cfg);

using EpochCallback = std::function<void(const EpochLoss&)>;

// Training stage: E epochs of shuffled mini-batches, fresh views every epoch,
// within-batch negatives and one Adam step per batch.
TrainResult train(const Graph& graph, const RunConfig& cfg, const EpochCallback& on_epoch = {});

// Same loop starting from given parameters.
TrainResult train_from(const Graph& graph, const RunConfig& cfg, ModelParams params,
                       const EpochCallback& on_epoch = {});

// Fixed-chunk parallel loop: [0, n) split into `threads` contiguous chunks,
// fn(chunk_index, begin, end). Chunking depends only on n and threads.
void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace slgad
