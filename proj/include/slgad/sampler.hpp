#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "slgad/graph.hpp"
#include "slgad/rng.hpp"

namespace slgad {

struct SamplerConfig {
  std::size_t k = 4;
  double restart_prob = 0.15;
  std::size_t max_steps = 40;  // 10 * k by convention
  std::uint64_t rng_seed = 0;

  static SamplerConfig for_view_size(std::size_t k, double restart_prob = 0.15,
                                     std::uint64_t seed = 0) {
    return {k, restart_prob, 10 * k, seed};
  }
  // Throws ConfigError.
  void validate() const;
};

// A contextual view of one target node. The target always sits in the last
// slot and its feature row is zeroed, so row size()-1 addresses the target in
// every downstream matrix.
struct SubgraphView {
  NodeId target = 0;
  std::vector<NodeId> nodes;
  NormalizedAdj adj_norm;
  Matrix features;

  std::size_t size() const { return nodes.size(); }
};

using ViewPair = std::pair<SubgraphView, SubgraphView>;

// Random walk with restart from `target`, collecting the first cfg.k distinct
// nodes (target included). Stops early once k nodes are found or after
// cfg.max_steps steps; when fewer nodes are reachable the view is smaller.
SubgraphView sample_view(const Graph& graph, NodeId target, const SamplerConfig& cfg, Rng& rng);

// Just the walk: distinct visited nodes in first-visit order, target first.
std::vector<NodeId> rwr_visit_order(const Graph& graph, NodeId target, const SamplerConfig& cfg,
                                    Rng& rng);

// Builds the anonymized, normalized view from an explicit node list. The
// target is moved to the last slot if it is not already there.
SubgraphView make_view(const Graph& graph, NodeId target, std::vector<NodeId> nodes);

ViewPair sample_view_pair(const Graph& graph, NodeId target, const SamplerConfig& cfg, Rng& rng);

// Uniformly random permutation of 0..n-1 with no fixed points (n >= 2).
std::vector<std::size_t> random_derangement(std::size_t n, Rng& rng);

// `rounds` derangements such that for every i the partners chosen across
// rounds are pairwise distinct. Requires rounds < n.
std::vector<std::vector<std::size_t>> negative_partners(std::size_t n, std::size_t rounds,
                                                        Rng& rng);

// For each batch member i, returns the view pair of a uniformly chosen other
// member. Throws std::invalid_argument for batches smaller than 2.
std::vector<ViewPair> sample_negative_views(std::span<const ViewPair> batch_views, Rng& rng);

}  // namespace slgad
