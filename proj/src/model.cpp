#include "slgad/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "slgad/error.hpp"

namespace slgad {

namespace {

void relu_inplace(std::span<double> v) {
  for (auto& x : v) x = x > 0.0 ? x : 0.0;
}

// g = mean of rows; gradient of a row is dg / K.
void add_readout_grad(Matrix& d_hidden, std::span<const double> d_summary) {
  const double inv_k = 1.0 / static_cast<double>(d_hidden.rows());
  for (std::size_t r = 0; r < d_hidden.rows(); ++r) axpy(inv_k, d_summary, d_hidden.row(r));
}

ViewTrace trace_view(const ModelParams& params, const SubgraphView& view) {
  ViewTrace t;
  t.view = &view;
  t.pre = matmul(view.adj_norm.matrix, matmul(view.features, params.w_enc));
  t.hidden = t.pre;
  relu_inplace(t.hidden.values());
  t.summary = readout(t.hidden);
  return t;
}

// Pushes d_hidden through ReLU, Â and X into the encoder gradient.
void backward_view(const ViewTrace& t, Matrix& d_hidden, Matrix& g_enc) {
  for (std::size_t i = 0; i < d_hidden.size(); ++i) {
    if (!(t.pre.values()[i] > 0.0)) d_hidden.values()[i] = 0.0;
  }
  const Matrix d_xw = matmul(t.view->adj_norm.matrix.transposed(), d_hidden);
  const Matrix& x = t.view->features;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (row[d] == 0.0) continue;
      axpy(row[d], d_xw.row(r), g_enc.row(d));
    }
  }
}

void check_view(const ModelParams& params, const SubgraphView& view) {
  if (view.features.cols() != params.input_dim()) {
    throw std::invalid_argument("view has " + std::to_string(view.features.cols()) +
                                " features, model expects " + std::to_string(params.input_dim()));
  }
  if (view.adj_norm.matrix.rows() != view.features.rows() ||
      view.adj_norm.matrix.cols() != view.features.rows()) {
    throw std::invalid_argument("view adjacency/feature size mismatch");
  }
  if (view.features.rows() == 0) throw std::invalid_argument("empty view");
}

}  // namespace

ModelParams ModelParams::zeros(std::size_t d_in, std::size_t d_hidden) {
  return {Matrix(d_in, d_hidden), Matrix(d_hidden, d_in), Matrix(d_hidden, d_hidden)};
}

ModelParams ModelParams::glorot(std::size_t d_in, std::size_t d_hidden, Rng& rng) {
  auto p = zeros(d_in, d_hidden);
  for (Matrix* m : {&p.w_enc, &p.w_dec, &p.w_s}) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m->rows() + m->cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : m->values()) v = dist(rng);
  }
  return p;
}

void ModelParams::validate() const {
  const auto d = input_dim(), h = hidden_dim();
  require_shape(w_dec, h, d, "w_dec");
  require_shape(w_s, h, h, "w_s");
}

bool ModelParams::all_finite() const {
  return w_enc.all_finite() && w_dec.all_finite() && w_s.all_finite();
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  // log σ(x) = -softplus(-x)
  return -(std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))));
}

Matrix encode_graph(const ModelParams& params, const Matrix& adj_norm, const Matrix& features) {
  if (features.cols() != params.input_dim()) {
    throw std::invalid_argument("encode: feature width " + std::to_string(features.cols()) +
                                " != " + std::to_string(params.input_dim()));
  }
  if (adj_norm.rows() != features.rows() || adj_norm.cols() != features.rows()) {
    throw std::invalid_argument("encode: adjacency " + shape_string(adj_norm) + " vs features " +
                                shape_string(features));
  }
  Matrix h = matmul(adj_norm, matmul(features, params.w_enc));
  relu_inplace(h.values());
  return h;
}

Matrix encode_view(const ModelParams& params, const SubgraphView& view) {
  return encode_graph(params, view.adj_norm.matrix, view.features);
}

std::vector<double> encode_target(const ModelParams& params, std::span<const double> x_target) {
  auto h = vec_matmul(x_target, params.w_enc);
  relu_inplace(h);
  return h;
}

Matrix decode_view(const ModelParams& params, const Matrix& embeddings,
                   const NormalizedAdj& adj_norm) {
  if (embeddings.cols() != params.hidden_dim()) {
    throw std::invalid_argument("decode: embedding width mismatch");
  }
  if (adj_norm.matrix.rows() != embeddings.rows() || adj_norm.matrix.cols() != embeddings.rows()) {
    throw std::invalid_argument("decode: adjacency/embedding size mismatch");
  }
  Matrix x = matmul(matmul(adj_norm.matrix, embeddings), params.w_dec);
  relu_inplace(x.values());
  return x;
}

std::vector<double> readout(const Matrix& embeddings) {
  if (embeddings.rows() == 0) throw std::invalid_argument("readout: empty embedding matrix");
  std::vector<double> g(embeddings.cols(), 0.0);
  for (std::size_t r = 0; r < embeddings.rows(); ++r) axpy(1.0, embeddings.row(r), g);
  const double inv = 1.0 / static_cast<double>(embeddings.rows());
  for (auto& v : g) v *= inv;
  return g;
}

double bilinear_logit(const ModelParams& params, std::span<const double> h,
                      std::span<const double> g) {
  if (h.size() != params.hidden_dim() || g.size() != params.hidden_dim()) {
    throw std::invalid_argument("discriminate: vector length mismatch");
  }
  return dot(vec_matmul(h, params.w_s), g);
}

double discriminate(const ModelParams& params, std::span<const double> h,
                    std::span<const double> g) {
  return sigmoid(bilinear_logit(params, h, g));
}

ForwardTrace forward_full(const ModelParams& params, std::span<const double> x_target,
                          const SubgraphView& view1, const SubgraphView& view2,
                          std::span<const SubgraphView* const> negatives1,
                          std::span<const SubgraphView* const> negatives2) {
  if (x_target.size() != params.input_dim()) {
    throw std::invalid_argument("forward: target feature length mismatch");
  }
  ForwardTrace t;
  t.x_target.assign(x_target.begin(), x_target.end());
  t.target_pre = vec_matmul(x_target, params.w_enc);
  t.target_embedding = t.target_pre;
  relu_inplace(t.target_embedding);
  // h W_s, shared by every pair of this target.
  const auto h_ws = vec_matmul(t.target_embedding, params.w_s);

  const std::array<const SubgraphView*, 2> views{&view1, &view2};
  const std::array<std::span<const SubgraphView* const>, 2> negs{negatives1, negatives2};
  auto& out = t.outputs;
  for (std::size_t j = 0; j < 2; ++j) {
    check_view(params, *views[j]);
    auto& vt = t.views[j] = trace_view(params, *views[j]);

    const std::size_t last = vt.hidden.rows() - 1;
    t.decoder_input[j] = vec_matmul(views[j]->adj_norm.matrix.row(last), vt.hidden);
    t.decoder_pre[j] = vec_matmul(t.decoder_input[j], params.w_dec);
    out.recon[j] = t.decoder_pre[j];
    relu_inplace(out.recon[j]);

    out.pos_logit[j] = dot(h_ws, vt.summary);
    out.pos_score[j] = sigmoid(out.pos_logit[j]);

    for (const SubgraphView* neg : negs[j]) {
      check_view(params, *neg);
      auto& nt = t.negatives[j].emplace_back(trace_view(params, *neg));
      const double logit = dot(h_ws, nt.summary);
      out.neg_logit[j].push_back(logit);
      out.neg_score[j].push_back(sigmoid(logit));
    }
  }
  return t;
}

ForwardTrace forward_full(const ModelParams& params, std::span<const double> x_target,
                          const SubgraphView& view1, const SubgraphView& view2,
                          const SubgraphView& negative1, const SubgraphView& negative2) {
  const SubgraphView* n1[] = {&negative1};
  const SubgraphView* n2[] = {&negative2};
  return forward_full(params, x_target, view1, view2, n1, n2);
}

void backward_full(const ModelParams& params, ForwardTrace& t, const OutputGrads& up,
                   Gradients& grads) {
  if (t.consumed) throw std::logic_error("backward_full: trace already consumed");
  t.consumed = true;
  const std::size_t d = params.input_dim(), hdim = params.hidden_dim();
  require_shape(grads.w_enc, d, hdim, "grad w_enc");
  require_shape(grads.w_dec, hdim, d, "grad w_dec");
  require_shape(grads.w_s, hdim, hdim, "grad w_s");

  const auto& h = t.target_embedding;
  const auto h_ws = vec_matmul(h, params.w_s);
  std::vector<double> d_h(hdim, 0.0);

  // logit = h W_s gᵀ:  dW_s += dl h⊗g,  dh += dl W_s g,  dg += dl hW_s
  auto pair_backward = [&](double dl, const std::vector<double>& g, std::vector<double>& d_g) {
    if (dl == 0.0) return;
    add_outer(grads.w_s, dl, h, g);
    axpy(dl, matvec(params.w_s, g), d_h);
    axpy(dl, h_ws, d_g);
  };

  for (std::size_t j = 0; j < 2; ++j) {
    const ViewTrace& vt = t.views[j];
    Matrix d_hidden(vt.hidden.rows(), hdim);

    if (!up.recon[j].empty()) {
      if (up.recon[j].size() != d) throw std::invalid_argument("backward: recon grad length");
      std::vector<double> d_pre(d);
      for (std::size_t i = 0; i < d; ++i) {
        d_pre[i] = t.decoder_pre[j][i] > 0.0 ? up.recon[j][i] : 0.0;
      }
      add_outer(grads.w_dec, 1.0, t.decoder_input[j], d_pre);
      const auto d_in = matvec(params.w_dec, d_pre);
      const std::size_t last = vt.hidden.rows() - 1;
      auto a_last = vt.view->adj_norm.matrix.row(last);
      for (std::size_t r = 0; r < a_last.size(); ++r) {
        if (a_last[r] != 0.0) axpy(a_last[r], d_in, d_hidden.row(r));
      }
    }

    std::vector<double> d_summary(hdim, 0.0);
    pair_backward(up.pos_logit[j], vt.summary, d_summary);
    add_readout_grad(d_hidden, d_summary);
    backward_view(vt, d_hidden, grads.w_enc);

    const auto& neg_grads = up.neg_logit[j];
    if (!neg_grads.empty() && neg_grads.size() != t.negatives[j].size()) {
      throw std::invalid_argument("backward: negative logit grad count mismatch");
    }
    for (std::size_t k = 0; k < neg_grads.size(); ++k) {
      if (neg_grads[k] == 0.0) continue;
      const ViewTrace& nt = t.negatives[j][k];
      std::vector<double> d_neg_summary(hdim, 0.0);
      pair_backward(neg_grads[k], nt.summary, d_neg_summary);
      Matrix d_neg_hidden(nt.hidden.rows(), hdim);
      add_readout_grad(d_neg_hidden, d_neg_summary);
      backward_view(nt, d_neg_hidden, grads.w_enc);
    }
  }

  // h_t = ReLU(x_t W_enc)
  for (std::size_t i = 0; i < hdim; ++i) {
    if (!(t.target_pre[i] > 0.0)) d_h[i] = 0.0;
  }
  add_outer(grads.w_enc, 1.0, t.x_target, d_h);
}

Gradients backward_full(const ModelParams& params, ForwardTrace& trace,
                        const OutputGrads& upstream) {
  auto grads = ModelParams::zeros(params.input_dim(), params.hidden_dim());
  backward_full(params, trace, upstream, grads);
  return grads;
}

// ---- checkpoint ----------------------------------------------------------

namespace {

constexpr const char* kCheckpointMagic = "slgad-checkpoint";
constexpr int kCheckpointVersion = 1;

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), row[c]);
      if (c) out << ' ';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in, const std::string& expected_name) {
  std::string name;
  std::size_t rows = 0, cols = 0;
  if (!(in >> name >> rows >> cols) || name != expected_name) {
    throw DataError("checkpoint: expected matrix '" + expected_name + "'");
  }
  Matrix m(rows, cols);
  for (auto& v : m.values()) {
    std::string tok;
    if (!(in >> tok)) throw DataError("checkpoint: truncated matrix '" + expected_name + "'");
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw DataError("checkpoint: bad value '" + tok + "' in " + expected_name);
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const ModelParams& params, std::uint64_t config_hash,
                     const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write checkpoint " + file.string());
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "d_in " << params.input_dim() << '\n';
  out << "d_hidden " << params.hidden_dim() << '\n';
  out << "config_hash " << std::hex << std::setw(16) << std::setfill('0') << config_hash
      << std::dec << '\n';
  write_matrix(out, "w_enc", params.w_enc);
  write_matrix(out, "w_dec", params.w_dec);
  write_matrix(out, "w_s", params.w_s);
  if (!out) throw DataError("failed writing checkpoint " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open checkpoint " + file.string());
  std::string magic, key;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) {
    throw DataError(file.string() + " is not a checkpoint");
  }
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  std::size_t d_in = 0, d_hidden = 0;
  Checkpoint ck;
  if (!(in >> key >> d_in) || key != "d_in") throw DataError("checkpoint: missing d_in");
  if (!(in >> key >> d_hidden) || key != "d_hidden") throw DataError("checkpoint: missing d_hidden");
  if (!(in >> key >> std::hex >> ck.config_hash >> std::dec) || key != "config_hash") {
    throw DataError("checkpoint: missing config_hash");
  }
  ck.params.w_enc = read_matrix(in, "w_enc");
  ck.params.w_dec = read_matrix(in, "w_dec");
  ck.params.w_s = read_matrix(in, "w_s");
  try {
    require_shape(ck.params.w_enc, d_in, d_hidden, "w_enc");
    ck.params.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  return ck;
}

}  // namespace slgad
