#include "slgad/scorer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "slgad/error.hpp"
#include "slgad/rng.hpp"
#include "slgad/trainer.hpp"

namespace slgad {

double generative_raw(std::span<const double> x, std::span<const double> recon1,
                      std::span<const double> recon2) {
  if (recon1.size() != x.size() || recon2.size() != x.size()) {
    throw std::invalid_argument("generative_raw: length mismatch");
  }
  return 0.5 * (squared_distance(recon1, x) + squared_distance(recon2, x));
}

double contrastive_raw(double pos1, double pos2, double neg1, double neg2) {
  for (double s : {pos1, pos2, neg1, neg2}) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("contrastive_raw: score outside [0,1]");
  }
  return 0.5 * ((neg1 - pos1) + (neg2 - pos2));
}

std::vector<double> scale_scores(std::span<const double> raw, ScoreKind kind) {
  std::vector<double> out(raw.size());
  if (raw.empty()) return out;
  if (kind == ScoreKind::kCon) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::clamp((raw[i] + 1.0) / 2.0, 0.0, 1.0);
    return out;
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double min = *lo, range = *hi - *lo;
  if (!(range > 0.0)) return out;  // degenerate population: all zeros
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - min) / range;
  return out;
}

RoundScores score_round(const Graph& graph, const ModelParams& params, const RunConfig& cfg,
                        std::size_t round) {
  const std::size_t n = graph.num_nodes();
  const std::size_t m = cfg.negative_ratio;
  if (n <= m) throw ConfigError("graph has too few nodes to form negatives");
  const auto sampler = cfg.sampler();

  std::vector<ViewPair> views(n);
  parallel_chunks(n, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto v = static_cast<NodeId>(i);
      auto rng = make_rng(cfg.seed, Stream::kScoreView, {round, v});
      views[i] = sample_view_pair(graph, v, sampler, rng);
    }
  });
  auto neg_rng = make_rng(cfg.seed, Stream::kScoreNegative, {round});
  const auto partners = negative_partners(n, m, neg_rng);

  RoundScores out{std::vector<double>(n), std::vector<double>(n)};
  parallel_chunks(n, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<const SubgraphView*> n1(m), n2(m);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t r = 0; r < m; ++r) {
        n1[r] = &views[partners[r][i]].first;
        n2[r] = &views[partners[r][i]].second;
      }
      const auto x = graph.feature_row(static_cast<NodeId>(i));
      const auto trace = forward_full(params, x, views[i].first, views[i].second, n1, n2);
      const auto& o = trace.outputs;
      auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      };
      out.raw_gen[i] = generative_raw(x, o.recon[0], o.recon[1]);
      out.raw_con[i] =
          contrastive_raw(o.pos_score[0], o.pos_score[1], mean(o.neg_score[0]), mean(o.neg_score[1]));
    }
  });
  return out;
}

ScoreTable score_all(const Graph& graph, const ModelParams& params, const RunConfig& cfg,
                     std::size_t round_offset) {
  cfg.validate();
  if (params.input_dim() != graph.num_features()) {
    throw std::invalid_argument("score: parameter input dim does not match graph features");
  }
  const std::size_t n = graph.num_nodes();
  const bool scaled = cfg.mode != Mode::kUnscaled;
  const bool gen_per_round = scaled && !cfg.scale_after_averaging;

  ScoreTable t;
  t.n = n;
  t.rounds_used = cfg.rounds;
  t.alpha = cfg.effective_alpha();
  t.beta = cfg.effective_beta();
  t.raw_gen.assign(n, 0.0);
  t.raw_con.assign(n, 0.0);
  t.scaled_gen.assign(n, 0.0);
  t.scaled_con.assign(n, 0.0);

  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    const auto round = score_round(graph, params, cfg, round_offset + r);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(round.raw_gen[i]) || !std::isfinite(round.raw_con[i])) {
        throw NumericError("non-finite score for node " + std::to_string(i));
      }
    }
    axpy(1.0, round.raw_gen, t.raw_gen);
    axpy(1.0, round.raw_con, t.raw_con);
    if (gen_per_round) axpy(1.0, scale_scores(round.raw_gen, ScoreKind::kGen), t.scaled_gen);
    if (scaled) {
      axpy(1.0, scale_scores(round.raw_con, ScoreKind::kCon), t.scaled_con);
    }
  }

  const double inv_r = 1.0 / static_cast<double>(cfg.rounds);
  for (auto* v : {&t.raw_gen, &t.raw_con, &t.scaled_gen, &t.scaled_con})
    for (auto& x : *v) x *= inv_r;
  if (!scaled) {
    t.scaled_gen = t.raw_gen;
    t.scaled_con = t.raw_con;
  } else if (!gen_per_round) {
    t.scaled_gen = scale_scores(t.raw_gen, ScoreKind::kGen);
  }

  t.final_score.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.final_score[i] = t.alpha * t.scaled_con[i] + t.beta * t.scaled_gen[i];
  }
  return t;
}

void write_scores(const ScoreTable& table, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  char buf[32];
  auto put = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out << '\t';
    out.write(buf, ptr - buf);
  };
  for (std::size_t i = 0; i < table.n; ++i) {
    out << i;
    put(table.final_score[i]);
    put(table.scaled_gen[i]);
    put(table.scaled_con[i]);
    put(table.raw_gen[i]);
    put(table.raw_con[i]);
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + file.string());
}

std::vector<double> read_final_scores(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  std::vector<double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos) throw DataError(file.string() + ": malformed line " + std::to_string(line_no));
    const std::string id_text = line.substr(0, t1);
    const std::string value_text = line.substr(t1 + 1, t2 == std::string::npos ? std::string::npos : t2 - t1 - 1);
    std::size_t id = 0;
    double value = 0.0;
    auto r1 = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    auto r2 = std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
    if (r1.ec != std::errc() || r2.ec != std::errc() || id != scores.size()) {
      throw DataError(file.string() + ":" + std::to_string(line_no) +
                      ": expected node id " + std::to_string(scores.size()) + " and a score");
    }
    scores.push_back(value);
  }
  return scores;
}

}  // namespace slgad
