#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "slgad/matrix.hpp"
#include "slgad/rng.hpp"
#include "slgad/sampler.hpp"

namespace slgad {

// Trainable weights.
//   w_enc: D x D'   shared GCN encoder (views and target node)
//   w_dec: D' x D   GCN decoder
//   w_s:   D' x D'  bilinear discriminator
struct ModelParams {
  Matrix w_enc;
  Matrix w_dec;
  Matrix w_s;

  std::size_t input_dim() const { return w_enc.rows(); }
  std::size_t hidden_dim() const { return w_enc.cols(); }

  static ModelParams zeros(std::size_t d_in, std::size_t d_hidden);
  // Symmetric uniform Glorot init, limit sqrt(6 / (fan_in + fan_out)).
  static ModelParams glorot(std::size_t d_in, std::size_t d_hidden, Rng& rng);

  void validate() const;
  bool all_finite() const;
};

using Gradients = ModelParams;

// ---- individual forward ops ---------------------------------------------

// ReLU(Â X W_enc), K x D'.
Matrix encode_view(const ModelParams& params, const SubgraphView& view);
// Same computation for an explicit (Â, X) pair.
Matrix encode_graph(const ModelParams& params, const Matrix& adj_norm, const Matrix& features);

// ReLU(x_t W_enc). Uses the original, non-anonymized target features.
std::vector<double> encode_target(const ModelParams& params, std::span<const double> x_target);

// ReLU(Â H W_dec), K x D.
Matrix decode_view(const ModelParams& params, const Matrix& embeddings,
                   const NormalizedAdj& adj_norm);

// Column-wise mean over the rows.
std::vector<double> readout(const Matrix& embeddings);

// h W_s gᵀ
double bilinear_logit(const ModelParams& params, std::span<const double> h,
                      std::span<const double> g);
// sigmoid(h W_s gᵀ)
double discriminate(const ModelParams& params, std::span<const double> h,
                    std::span<const double> g);

double sigmoid(double x);
// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x);

// ---- composed forward / backward for one target node ---------------------

// Cached intermediates of one encoded view.
struct ViewTrace {
  const SubgraphView* view = nullptr;  // non-owning
  Matrix pre;                          // Â X W_enc
  Matrix hidden;                       // ReLU(pre)
  std::vector<double> summary;         // readout(hidden)
};

struct ForwardOutputs {
  std::array<std::vector<double>, 2> recon;           // X̂^{φj}[-1,:]
  std::array<double, 2> pos_logit{};                  // h W_s g_jᵀ
  std::array<std::vector<double>, 2> neg_logit;       // one per negative view
  std::array<double, 2> pos_score{};                  // sigmoid(pos_logit)
  std::array<std::vector<double>, 2> neg_score;
};

// Everything backward_full needs. The referenced views must outlive the
// trace, and a trace can be consumed by exactly one backward pass.
struct ForwardTrace {
  std::vector<double> x_target;
  std::vector<double> target_pre;
  std::vector<double> target_embedding;            // h_t
  std::array<ViewTrace, 2> views;
  std::array<std::vector<double>, 2> decoder_input;  // Â[-1,:] H
  std::array<std::vector<double>, 2> decoder_pre;    // Â[-1,:] H W_dec
  std::array<std::vector<ViewTrace>, 2> negatives;
  ForwardOutputs outputs;
  bool consumed = false;
};

// Upstream gradients of the scalar loss w.r.t. the outputs of forward_full.
struct OutputGrads {
  std::array<std::vector<double>, 2> recon;      // empty means zero
  std::array<double, 2> pos_logit{};
  std::array<std::vector<double>, 2> neg_logit;  // empty means zero
};

// Encodes the target, both views and the negative views (one or more per
// channel), decodes the target row of both views and scores all pairs.
ForwardTrace forward_full(const ModelParams& params, std::span<const double> x_target,
                          const SubgraphView& view1, const SubgraphView& view2,
                          std::span<const SubgraphView* const> negatives1,
                          std::span<const SubgraphView* const> negatives2);

ForwardTrace forward_full(const ModelParams& params, std::span<const double> x_target,
                          const SubgraphView& view1, const SubgraphView& view2,
                          const SubgraphView& negative1, const SubgraphView& negative2);

// Adds the exact parameter gradients to `grads` (which must be shaped like
// `params`). Throws std::logic_error if the trace was already consumed.
void backward_full(const ModelParams& params, ForwardTrace& trace, const OutputGrads& upstream,
                   Gradients& grads);

Gradients backward_full(const ModelParams& params, ForwardTrace& trace,
                        const OutputGrads& upstream);

// ---- checkpoint IO -------------------------------------------------------

// Text checkpoint, see docs in README ("Checkpoint format").
void save_checkpoint(const ModelParams& params, std::uint64_t config_hash,
                     const std::filesystem::path& file);

struct Checkpoint {
  ModelParams params;
  std::uint64_t config_hash = 0;
};
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace slgad
