#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "slgad/graph.hpp"
#include "slgad/rng.hpp"

namespace slgad {

struct InjectionConfig {
  std::size_t clique_size = 15;
  std::size_t n_cliques = 5;
  std::size_t n_attr = 75;          // must equal n_cliques * clique_size
  std::size_t candidate_pool = 50;  // candidates searched per attribute anomaly
  std::uint64_t seed = 0;

  void validate() const;
};

struct StructuralRecord {
  std::size_t clique = 0;
  NodeId node = 0;
};

struct AttributeRecord {
  NodeId node = 0;
  NodeId source = 0;  // node whose original features were copied in
};

struct InjectionManifest {
  std::vector<StructuralRecord> structural;
  std::vector<AttributeRecord> attribute;
  std::size_t edges_added = 0;
};

struct InjectedGraph {
  Graph graph;
  InjectionManifest manifest;
};

// Plants `n_cliques` disjoint cliques and rewrites the features of `n_attr`
// further nodes with the farthest (Euclidean) of `candidate_pool` random
// candidates. Every injected node is labeled 1. Throws DataError if the graph
// already carries a positive label or has too few nodes.
InjectedGraph inject_anomalies(const Graph& graph, const InjectionConfig& cfg, Rng& rng);

// STRUCT<TAB>clique<TAB>node and ATTR<TAB>node<TAB>source lines.
void write_manifest(const InjectionManifest& manifest, const std::filesystem::path& file);
InjectionManifest read_manifest(const std::filesystem::path& file);

struct RocCurve {
  std::vector<double> thresholds;  // descending; first is +inf
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
};

// Sweeps unique score thresholds from high to low. AUC is the trapezoidal
// area, which equals P(pos > neg) + ½ P(tie). Throws std::invalid_argument when
// only one class is present.
RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

void write_roc(const RocCurve& roc, const std::filesystem::path& file);

struct ToyOptions {
  std::size_t n_features = 16;
  std::size_t n_clusters = 4;
  double p_in = 0.12;       // intra-cluster edge probability
  double p_out = 0.004;     // inter-cluster edge probability
  double noise = 0.1;       // feature noise std-dev
  std::size_t clique_size = 5;
  std::size_t n_cliques = 1;
  std::size_t candidate_pool = 50;
};

// Stochastic-block background graph with clustered non-negative features,
// followed by inject_anomalies with n_attr = n_cliques * clique_size.
// Deterministic per seed. Requires n >= 20.
InjectedGraph make_toy_benchmark(std::size_t n, std::uint64_t seed, const ToyOptions& opts = {});

}  // namespace slgad
