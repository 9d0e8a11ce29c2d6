#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "slgad/matrix.hpp"

namespace slgad {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Immutable undirected attributed graph.
//
// Adjacency is kept as sorted neighbor lists in CSR form. Self-loops are never
// stored; they only appear inside normalize_adjacency().
class Graph {
 public:
  Graph() = default;

  // Edges may be given in either orientation and may repeat; they are
  // deduplicated. Self-loops and out-of-range ids throw DataError.
  Graph(std::size_t n_nodes, std::span<const Edge> edges, Matrix features,
        std::optional<std::vector<std::uint8_t>> labels = std::nullopt);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_features() const { return features_.cols(); }
  // Undirected edge count.
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  const Matrix& features() const { return features_; }
  std::span<const double> feature_row(NodeId v) const { return features_.row(v); }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<std::uint8_t>& labels() const;

  // Each undirected edge once, as (u, v) with u < v, sorted.
  std::vector<Edge> edge_list() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  Matrix features_;
  std::optional<std::vector<std::uint8_t>> labels_;
};

// Reads edges.tsv, features.tsv and (optionally) labels.tsv from `dir`.
Graph load_graph(const std::filesystem::path& dir);

// Writes the same three files. Feature values round-trip bit-exactly.
void save_graph(const Graph& graph, const std::filesystem::path& dir);

std::vector<std::uint8_t> read_labels(const std::filesystem::path& file, std::size_t n_nodes);

// Â = D̃^{-1/2} (A + I) D̃^{-1/2} for a small view adjacency.
struct NormalizedAdj {
  Matrix matrix;
  std::vector<NodeId> source;  // parent-graph ids of the rows, in order
};

// `adj` must be a symmetric 0/1 matrix with zero diagonal.
NormalizedAdj normalize_adjacency(const Matrix& adj, std::vector<NodeId> source = {});

struct InducedSubgraph {
  Matrix features;  // K x D copy
  Matrix adj;       // K x K, 0/1
};

// Rows and columns follow the order of `nodes`. Indices must be valid and distinct.
InducedSubgraph subgraph(const Graph& graph, std::span<const NodeId> nodes);

}  // namespace slgad
