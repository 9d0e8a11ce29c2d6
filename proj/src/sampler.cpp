#include "slgad/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "slgad/error.hpp"

namespace slgad {

void SamplerConfig::validate() const {
  if (k < 1) throw ConfigError("view size k must be >= 1");
  if (!(restart_prob > 0.0 && restart_prob < 1.0)) {
    throw ConfigError("restart probability must lie in (0, 1)");
  }
  if (max_steps < k) throw ConfigError("max_steps must be >= k");
}

std::vector<NodeId> rwr_visit_order(const Graph& graph, NodeId target, const SamplerConfig& cfg,
                                    Rng& rng) {
  if (target >= graph.num_nodes()) throw std::invalid_argument("sample_view: invalid target");
  std::vector<NodeId> visited{target};
  if (cfg.k <= 1 || graph.degree(target) == 0) return visited;

  std::bernoulli_distribution restart(cfg.restart_prob);
  NodeId current = target;
  for (std::size_t step = 0; step < cfg.max_steps && visited.size() < cfg.k; ++step) {
    if (current != target && restart(rng)) {
      current = target;
      continue;
    }
    auto nb = graph.neighbors(current);
    std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
    current = nb[pick(rng)];
    if (std::find(visited.begin(), visited.end(), current) == visited.end()) {
      visited.push_back(current);
    }
  }
  return visited;
}

SubgraphView make_view(const Graph& graph, NodeId target, std::vector<NodeId> nodes) {
  auto it = std::find(nodes.begin(), nodes.end(), target);
  if (it == nodes.end()) throw std::invalid_argument("make_view: target not among nodes");
  std::rotate(it, it + 1, nodes.end());

  auto sub = subgraph(graph, nodes);
  SubgraphView view;
  view.target = target;
  view.features = std::move(sub.features);
  auto target_row = view.features.row(nodes.size() - 1);
  std::fill(target_row.begin(), target_row.end(), 0.0);
  view.adj_norm = normalize_adjacency(sub.adj, nodes);
  view.nodes = std::move(nodes);
  return view;
}

SubgraphView sample_view(const Graph& graph, NodeId target, const SamplerConfig& cfg, Rng& rng) {
  return make_view(graph, target, rwr_visit_order(graph, target, cfg, rng));
}

ViewPair sample_view_pair(const Graph& graph, NodeId target, const SamplerConfig& cfg, Rng& rng) {
  auto first = sample_view(graph, target, cfg, rng);
  auto second = sample_view(graph, target, cfg, rng);
  return {std::move(first), std::move(second)};
}

std::vector<std::size_t> random_derangement(std::size_t n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("derangement needs at least 2 elements");
  std::vector<std::size_t> perm(n);
  // Rejection sampling: a uniform permutation is a derangement with
  // probability ~1/e, so this takes about e attempts on average.
  for (;;) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = perm[i] != i;
    if (ok) return perm;
  }
}

std::vector<std::vector<std::size_t>> negative_partners(std::size_t n, std::size_t rounds,
                                                        Rng& rng) {
  if (rounds >= n) {
    throw std::invalid_argument("negative ratio " + std::to_string(rounds) +
                                " needs a batch larger than " + std::to_string(rounds));
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    for (;;) {
      auto perm = random_derangement(n, rng);
      bool distinct = true;
      for (std::size_t i = 0; i < n && distinct; ++i)
        for (const auto& prev : out) distinct = distinct && prev[i] != perm[i];
      if (distinct) {
        out.push_back(std::move(perm));
        break;
      }
    }
  }
  return out;
}

std::vector<ViewPair> sample_negative_views(std::span<const ViewPair> batch_views, Rng& rng) {
  if (batch_views.size() < 2) {
    throw std::invalid_argument("sample_negative_views: batch of size " +
                                std::to_string(batch_views.size()) + " has no negatives");
  }
  auto perm = random_derangement(batch_views.size(), rng);
  std::vector<ViewPair> out;
  out.reserve(perm.size());
  for (auto p : perm) out.push_back(batch_views[p]);
  return out;
}

}  // namespace slgad
