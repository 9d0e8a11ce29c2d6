#include "slgad/benchkit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "slgad/error.hpp"

namespace slgad {

void InjectionConfig::validate() const {
  if (n_attr != n_cliques * clique_size) {
    throw ConfigError("attribute anomaly count (" + std::to_string(n_attr) +
                      ") must equal cliques x clique size (" +
                      std::to_string(n_cliques * clique_size) + ")");
  }
  if (n_cliques > 0 && clique_size < 2) throw ConfigError("clique size must be >= 2");
  if (n_attr > 0 && candidate_pool < 1) throw ConfigError("candidate pool must be >= 1");
}

InjectedGraph inject_anomalies(const Graph& graph, const InjectionConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t n = graph.num_nodes();
  const std::size_t n_struct = cfg.n_cliques * cfg.clique_size;
  if (n < n_struct + cfg.n_attr || (cfg.n_attr > 0 && n < 2)) {
    throw DataError("graph has " + std::to_string(n) + " nodes, injection needs " +
                    std::to_string(n_struct + cfg.n_attr));
  }
  if (graph.has_labels()) {
    const auto& l = graph.labels();
    if (std::any_of(l.begin(), l.end(), [](auto v) { return v != 0; })) {
      throw DataError("graph already carries anomaly labels");
    }
  }

  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  std::shuffle(pool.begin(), pool.end(), rng);

  InjectedGraph out;
  auto& manifest = out.manifest;
  std::vector<std::uint8_t> labels(n, 0);
  std::vector<Edge> edges = graph.edge_list();

  // Structural: disjoint cliques from the front of the shuffled pool.
  for (std::size_t q = 0; q < cfg.n_cliques; ++q) {
    const auto* members = pool.data() + q * cfg.clique_size;
    for (std::size_t a = 0; a < cfg.clique_size; ++a) {
      manifest.structural.push_back({q, members[a]});
      labels[members[a]] = 1;
      for (std::size_t b = a + 1; b < cfg.clique_size; ++b) {
        if (!graph.has_edge(members[a], members[b])) ++manifest.edges_added;
        edges.emplace_back(members[a], members[b]);
      }
    }
  }

  // Attributive: copy in the farthest of `candidate_pool` random nodes,
  // measured on the original features.
  Matrix features = graph.features();
  const Matrix& original = graph.features();
  std::vector<NodeId> candidates(n);
  std::iota(candidates.begin(), candidates.end(), NodeId{0});
  for (std::size_t a = 0; a < cfg.n_attr; ++a) {
    const NodeId node = pool[n_struct + a];
    const std::size_t c = std::min(cfg.candidate_pool, n - 1);
    // Partial Fisher-Yates over all nodes except `node`.
    std::swap(candidates[node], candidates[n - 1]);
    for (std::size_t i = 0; i < c; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 2);
      std::swap(candidates[i], candidates[pick(rng)]);
    }
    NodeId best = candidates[0];
    double best_dist = -1.0;
    for (std::size_t i = 0; i < c; ++i) {
      const double dist = squared_distance(original.row(candidates[i]), original.row(node));
      if (dist > best_dist) {
        best_dist = dist;
        best = candidates[i];
      }
    }
    // Restore identity order so every draw starts from the same layout.
    std::iota(candidates.begin(), candidates.end(), NodeId{0});

    auto src = original.row(best);
    std::copy(src.begin(), src.end(), features.row(node).begin());
    labels[node] = 1;
    manifest.attribute.push_back({node, best});
  }

  out.graph = Graph(n, edges, std::move(features), std::move(labels));
  return out;
}

void write_manifest(const InjectionManifest& manifest, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  for (const auto& s : manifest.structural) out << "STRUCT\t" << s.clique << '\t' << s.node << '\n';
  for (const auto& a : manifest.attribute) out << "ATTR\t" << a.node << '\t' << a.source << '\n';
  if (!out) throw DataError("failed writing " + file.string());
}

InjectionManifest read_manifest(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  InjectionManifest m;
  std::string kind;
  std::uint64_t a = 0, b = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    if (!(fields >> kind >> a >> b)) throw DataError(file.string() + ": malformed line '" + line + "'");
    if (kind == "STRUCT") {
      m.structural.push_back({a, static_cast<NodeId>(b)});
    } else if (kind == "ATTR") {
      m.attribute.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
    } else {
      throw DataError(file.string() + ": unknown record '" + kind + "'");
    }
  }
  return m;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: length mismatch");
  const std::size_t n = scores.size();
  std::uint64_t pos = 0;
  for (auto l : labels) {
    if (l > 1) throw std::invalid_argument("roc_auc: labels must be 0/1");
    pos += l;
  }
  const std::uint64_t neg = n - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("roc_auc: need both classes");
  for (double s : scores)
    if (std::isnan(s)) throw std::invalid_argument("roc_auc: NaN score");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  std::uint64_t tp = 0, fp = 0, twice_area = 0;
  for (std::size_t i = 0; i < n;) {
    const double s = scores[order[i]];
    const std::uint64_t tp_prev = tp, fp_prev = fp;
    for (; i < n && scores[order[i]] == s; ++i) (labels[order[i]] ? tp : fp) += 1;
    twice_area += (fp - fp_prev) * (tp + tp_prev);
    roc.thresholds.push_back(s);
    roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
  }
  roc.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return roc;
}

void write_roc(const RocCurve& roc, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  out.precision(17);
  for (std::size_t i = 0; i < roc.thresholds.size(); ++i) {
    out << roc.thresholds[i] << '\t' << roc.fpr[i] << '\t' << roc.tpr[i] << '\n';
  }
  if (!out) throw DataError("failed writing " + file.string());
}

InjectedGraph make_toy_benchmark(std::size_t n, std::uint64_t seed, const ToyOptions& opts) {
  if (n < 20) throw ConfigError("toy benchmark needs n >= 20");
  if (opts.n_clusters < 1 || opts.n_features < opts.n_clusters) {
    throw ConfigError("toy benchmark needs 1 <= clusters <= features");
  }
  auto rng = make_rng(seed, Stream::kToy);
  std::vector<std::size_t> cluster(n);
  for (std::size_t i = 0; i < n; ++i) cluster[i] = i * opts.n_clusters / n;

  std::bernoulli_distribution intra(opts.p_in), inter(opts.p_out);
  std::vector<Edge> edges;
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (cluster[u] == cluster[v] ? intra(rng) : inter(rng)) {
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        ++degree[u];
        ++degree[v];
      }
    }
  }
  // No isolated nodes: attach each to a random member of its own cluster.
  for (std::size_t u = 0; u < n; ++u) {
    if (degree[u] > 0) continue;
    std::size_t first = u, last = u;
    while (first > 0 && cluster[first - 1] == cluster[u]) --first;
    while (last < n && cluster[last] == cluster[u]) ++last;
    std::uniform_int_distribution<std::size_t> pick(first, last - 1);
    std::size_t v = pick(rng);
    if (v == u) v = (v + 1 < last) ? v + 1 : first;
    if (v == u) continue;  // singleton cluster
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    ++degree[u];
    ++degree[v];
  }

  // Each cluster owns a block of feature dimensions set to 1, plus noise.
  const std::size_t block = opts.n_features / opts.n_clusters;
  std::normal_distribution<double> noise(0.0, opts.noise);
  Matrix x(n, opts.n_features);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t d = 0; d < opts.n_features; ++d) {
      const bool active = d / block == cluster[u];
      x(u, d) = (active ? 1.0 : 0.0) + noise(rng);
    }
  }

  Graph background(n, edges, std::move(x));
  InjectionConfig inj;
  inj.clique_size = opts.clique_size;
  inj.n_cliques = opts.n_cliques;
  inj.n_attr = opts.clique_size * opts.n_cliques;
  inj.candidate_pool = opts.candidate_pool;
  inj.seed = seed;
  auto inj_rng = make_rng(seed, Stream::kInject);
  return inject_anomalies(background, inj, inj_rng);
}

}  // namespace slgad
