#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "slgad/config.hpp"
#include "slgad/graph.hpp"
#include "slgad/model.hpp"

namespace slgad {

// Per-node anomaly scores averaged over evaluation rounds.
struct ScoreTable {
  std::size_t n = 0;
  std::size_t rounds_used = 0;
  double alpha = 0.0;  // weights the final column was formed with
  double beta = 0.0;
  std::vector<double> raw_gen;
  std::vector<double> raw_con;
  std::vector<double> scaled_gen;
  std::vector<double> scaled_con;
  std::vector<double> final_score;
};

// ½(‖recon1 - x‖² + ‖recon2 - x‖²)
double generative_raw(std::span<const double> x, std::span<const double> recon1,
                      std::span<const double> recon2);

// ½((neg1 - pos1) + (neg2 - pos2)). Scores must be probabilities in [0, 1].
double contrastive_raw(double pos1, double pos2, double neg1, double neg2);

enum class ScoreKind { kGen, kCon };

// kGen: population min-max to [0, 1] (all-equal maps to 0).
// kCon: x -> (x + 1) / 2 clamped to [0, 1].
std::vector<double> scale_scores(std::span<const double> raw, ScoreKind kind);

// Raw per-node components of one evaluation round.
struct RoundScores {
  std::vector<double> raw_gen;
  std::vector<double> raw_con;
};

// One evaluation round: fresh view pairs for every node, negatives drawn from
// the views of other nodes in the same round.
RoundScores score_round(const Graph& graph, const ModelParams& params, const RunConfig& cfg,
                        std::size_t round);

// Averages cfg.rounds rounds. With cfg.mode == kUnscaled the scalers are the
// identity. `round_offset` shifts the round index used to seed each round.
ScoreTable score_all(const Graph& graph, const ModelParams& params, const RunConfig& cfg,
                     std::size_t round_offset = 0);

// node_id, final, scaled_gen, scaled_con, raw_gen, raw_con per line.
void write_scores(const ScoreTable& table, const std::filesystem::path& file);

// Reads back the `final` column indexed by node id.
std::vector<double> read_final_scores(const std::filesystem::path& file);

}  // namespace slgad
