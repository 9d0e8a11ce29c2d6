#include "slgad/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "slgad/error.hpp"

namespace slgad {
namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find_first_of("\t ", start);
    if (end == std::string_view::npos) end = line.size();
    if (end > start) out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string_view trim_line(const std::string& line) {
  std::string_view v(line);
  while (!v.empty() && (v.back() == '\r' || v.back() == '\n' || v.back() == ' ')) v.remove_suffix(1);
  return v;
}

std::string where(const fs::path& file, std::size_t line_no) {
  return file.filename().string() + ":" + std::to_string(line_no);
}

std::uint64_t parse_id(std::string_view tok, const fs::path& file, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DataError(where(file, line_no) + ": invalid node id '" + std::string(tok) + "'");
  }
  return v;
}

double parse_real(std::string_view tok, const fs::path& file, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DataError(where(file, line_no) + ": invalid number '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw DataError(where(file, line_no) + ": non-finite feature value");
  return v;
}

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  return in;
}

Matrix read_features(const fs::path& file) {
  auto in = open_input(file);
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim_line(line);
    if (view.empty()) continue;
    auto fields = split_fields(view);
    if (rows == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw DataError(where(file, line_no) + ": expected " + std::to_string(cols) +
                      " features, got " + std::to_string(fields.size()));
    }
    for (auto f : fields) values.push_back(parse_real(f, file, line_no));
    ++rows;
  }
  if (rows == 0 || cols == 0) throw DataError(file.string() + ": no feature rows");
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.values().begin());
  return m;
}

std::vector<Edge> read_edges(const fs::path& file, std::size_t n_nodes) {
  auto in = open_input(file);
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim_line(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split_fields(view);
    if (fields.size() != 2) throw DataError(where(file, line_no) + ": expected 'u<TAB>v'");
    auto u = parse_id(fields[0], file, line_no);
    auto v = parse_id(fields[1], file, line_no);
    if (u >= n_nodes || v >= n_nodes) {
      throw DataError(where(file, line_no) + ": node id out of range 0.." +
                      std::to_string(n_nodes - 1) + " (ids must be dense)");
    }
    if (u == v) continue;  // self-loops are implicit in normalization
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return edges;
}

void write_real(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

Graph::Graph(std::size_t n_nodes, std::span<const Edge> edges, Matrix features,
             std::optional<std::vector<std::uint8_t>> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != n_nodes) {
    throw DataError("features have " + std::to_string(features_.rows()) + " rows, expected " +
                    std::to_string(n_nodes));
  }
  if (!features_.all_finite()) throw DataError("features contain non-finite values");
  if (labels_) {
    if (labels_->size() != n_nodes) throw DataError("labels length does not match node count");
    for (auto l : *labels_)
      if (l > 1) throw DataError("label outside {0,1}");
  }

  std::vector<std::vector<NodeId>> adj(n_nodes);
  for (auto [u, v] : edges) {
    if (u >= n_nodes || v >= n_nodes) throw DataError("edge endpoint out of range");
    if (u == v) throw DataError("self-loop on node " + std::to_string(u));
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  offsets_.assign(n_nodes + 1, 0);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    auto& list = adj[i];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    offsets_[i + 1] = offsets_[i] + list.size();
  }
  neighbors_.reserve(offsets_.back());
  for (auto& list : adj) neighbors_.insert(neighbors_.end(), list.begin(), list.end());
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

const std::vector<std::uint8_t>& Graph::labels() const {
  if (!labels_) throw DataError("graph has no labels");
  return *labels_;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

std::vector<std::uint8_t> read_labels(const fs::path& file, std::size_t n_nodes) {
  auto in = open_input(file);
  std::vector<std::uint8_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim_line(line);
    if (view.empty()) continue;
    if (view == "0") {
      labels.push_back(0);
    } else if (view == "1") {
      labels.push_back(1);
    } else {
      throw DataError(where(file, line_no) + ": label must be 0 or 1, got '" +
                      std::string(view) + "'");
    }
  }
  if (labels.size() != n_nodes) {
    throw DataError(file.string() + ": " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(n_nodes) + " nodes");
  }
  return labels;
}

Graph load_graph(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  const auto edges_file = dir / "edges.tsv";
  const auto features_file = dir / "features.tsv";
  const auto labels_file = dir / "labels.tsv";
  if (!fs::exists(edges_file)) throw DataError("missing " + edges_file.string());
  if (!fs::exists(features_file)) throw DataError("missing " + features_file.string());

  Matrix features = read_features(features_file);
  const std::size_t n = features.rows();
  auto edges = read_edges(edges_file, n);
  std::optional<std::vector<std::uint8_t>> labels;
  if (fs::exists(labels_file)) labels = read_labels(labels_file, n);
  return Graph(n, edges, std::move(features), std::move(labels));
}

void save_graph(const Graph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    for (auto [u, v] : graph.edge_list()) out << u << '\t' << v << '\n';
    if (!out) throw DataError("failed writing " + (dir / "edges.tsv").string());
  }
  {
    std::ofstream out(dir / "features.tsv");
    const auto& x = graph.features();
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto row = x.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << '\t';
        write_real(out, row[c]);
      }
      out << '\n';
    }
    if (!out) throw DataError("failed writing " + (dir / "features.tsv").string());
  }
  const auto labels_file = dir / "labels.tsv";
  if (graph.has_labels()) {
    std::ofstream out(labels_file);
    for (auto l : graph.labels()) out << static_cast<int>(l) << '\n';
    if (!out) throw DataError("failed writing " + labels_file.string());
  } else if (fs::exists(labels_file)) {
    fs::remove(labels_file);
  }
}

NormalizedAdj normalize_adjacency(const Matrix& adj, std::vector<NodeId> source) {
  const std::size_t k = adj.rows();
  if (adj.cols() != k) throw std::invalid_argument("normalize_adjacency: matrix not square");
  std::vector<double> degree(k, 1.0);  // the added self-loop
  for (std::size_t i = 0; i < k; ++i) {
    if (adj(i, i) != 0.0) throw std::invalid_argument("normalize_adjacency: nonzero diagonal");
    for (std::size_t j = 0; j < k; ++j) {
      const double a = adj(i, j);
      if (a != 0.0 && a != 1.0) throw std::invalid_argument("normalize_adjacency: entry not 0/1");
      if (a != adj(j, i)) throw std::invalid_argument("normalize_adjacency: asymmetric input");
      degree[i] += a;
    }
  }
  NormalizedAdj out{Matrix(k, k), std::move(source)};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double a = (i == j) ? 1.0 : adj(i, j);
      if (a != 0.0) out.matrix(i, j) = a / std::sqrt(degree[i] * degree[j]);
    }
  }
  return out;
}

InducedSubgraph subgraph(const Graph& graph, std::span<const NodeId> nodes) {
  const std::size_t k = nodes.size();
  std::vector<NodeId> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("subgraph: repeated node index");
  }
  if (!sorted.empty() && sorted.back() >= graph.num_nodes()) {
    throw std::invalid_argument("subgraph: node index out of range");
  }
  InducedSubgraph out{Matrix(k, graph.num_features()), Matrix(k, k)};
  for (std::size_t i = 0; i < k; ++i) {
    auto src = graph.feature_row(nodes[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    for (std::size_t j = i + 1; j < k; ++j) {
      if (graph.has_edge(nodes[i], nodes[j])) {
        out.adj(i, j) = 1.0;
        out.adj(j, i) = 1.0;
      }
    }
  }
  return out;
}

}  // namespace slgad
