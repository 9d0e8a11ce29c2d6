#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "slgad/graph.hpp"
#include "slgad/rng.hpp"
#include "slgad/sampler.hpp"

namespace slgad::testing {

inline Graph graph_from_edges(std::size_t n, std::vector<Edge> edges, std::size_t d = 1) {
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) x(i, c) = static_cast<double>(i + 1) + 0.1 * c;
  return Graph(n, edges, std::move(x));
}

inline Graph path3() { return graph_from_edges(3, {{0, 1}, {1, 2}}); }

// Center 0, leaves 1..leaves.
inline Graph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return graph_from_edges(leaves + 1, e);
}

inline Graph complete(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return graph_from_edges(n, e);
}

// Connected random graph (ring + random chords) with Gaussian features.
inline Graph random_graph(std::size_t n, std::size_t d, std::size_t chords, Rng& rng) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  for (std::size_t c = 0; c < chords; ++c) {
    NodeId a = pick(rng), b = pick(rng);
    if (a != b) e.emplace_back(a, b);
  }
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix x(n, d);
  for (auto& v : x.values()) v = nd(rng);
  if (n == 2) e.resize(1);
  return Graph(n, e, std::move(x));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("slgad_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace slgad::testing
