#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "fixtures.hpp"
#include "slgad/error.hpp"
#include "slgad/sampler.hpp"

using namespace slgad;

namespace {

std::set<NodeId> component_of(const Graph& g, NodeId start) {
  std::set<NodeId> seen{start};
  std::queue<NodeId> q;
  q.push(start);
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (NodeId u : g.neighbors(v))
      if (seen.insert(u).second) q.push(u);
  }
  return seen;
}

void expect_valid_view(const Graph& g, const SubgraphView& v, std::size_t k) {
  ASSERT_GE(v.size(), 1u);
  ASSERT_LE(v.size(), k);
  EXPECT_EQ(v.nodes.back(), v.target);
  std::set<NodeId> distinct(v.nodes.begin(), v.nodes.end());
  EXPECT_EQ(distinct.size(), v.nodes.size());
  for (double x : v.features.row(v.size() - 1)) EXPECT_EQ(x, 0.0);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    auto row = v.features.row(i);
    auto src = g.feature_row(v.nodes[i]);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), src.begin()));
  }
  auto comp = component_of(g, v.target);
  for (NodeId u : v.nodes) EXPECT_TRUE(comp.count(u));
  EXPECT_EQ(v.adj_norm.matrix.rows(), v.size());
  EXPECT_EQ(v.adj_norm.source, v.nodes);
}

}  // namespace

TEST(SamplerConfig, Validation) {
  EXPECT_NO_THROW(SamplerConfig{}.validate());
  EXPECT_THROW((SamplerConfig{0, 0.15, 10, 0}.validate()), ConfigError);
  EXPECT_THROW((SamplerConfig{4, 0.0, 40, 0}.validate()), ConfigError);
  EXPECT_THROW((SamplerConfig{4, 1.0, 40, 0}.validate()), ConfigError);
  EXPECT_THROW((SamplerConfig{4, 0.15, 3, 0}.validate()), ConfigError);
}

TEST(SampleView, IsolatedTargetYieldsSingleNode) {
  auto g = slgad::testing::graph_from_edges(4, {{1, 2}}, 3);
  Rng rng(1);
  auto v = sample_view(g, 0, SamplerConfig::for_view_size(4), rng);
  EXPECT_EQ(v.nodes, std::vector<NodeId>{0});
  EXPECT_EQ(v.features, Matrix(1, 3));
  EXPECT_EQ(v.adj_norm.matrix, Matrix({{1.0}}));
}

TEST(SampleView, SizeOneIsAnonymizedTarget) {
  auto g = slgad::testing::complete(5);
  Rng rng(2);
  auto v = sample_view(g, 3, SamplerConfig::for_view_size(1), rng);
  EXPECT_EQ(v.nodes, std::vector<NodeId>{3});
  EXPECT_EQ(v.adj_norm.matrix, Matrix({{1.0}}));
  EXPECT_EQ(v.features(0, 0), 0.0);
}

TEST(SampleView, SmallComponentGivesSmallerView) {
  // Component {0,1,2} cannot fill K = 4.
  auto g = slgad::testing::graph_from_edges(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}});
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    auto v = sample_view(g, 1, SamplerConfig::for_view_size(4), rng);
    expect_valid_view(g, v, 4);
    EXPECT_LE(v.size(), 3u);
  }
}

TEST(SampleView, StarFirstVisitIsUniformOverLeaves) {
  // Exact first-visit distribution for K = 2: the walk's first move from the
  // target goes to a uniform neighbor, which is always new, so every leaf has
  // probability 1/deg = 1/5.
  auto g = slgad::testing::star(5);
  Rng rng(2024);
  std::map<NodeId, int> counts;
  const int samples = 10000;
  for (int i = 0; i < samples; ++i) {
    auto v = sample_view(g, 0, SamplerConfig::for_view_size(2), rng);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v.nodes[1], 0u);
    counts[v.nodes[0]]++;
  }
  ASSERT_EQ(counts.size(), 5u);
  for (auto [leaf, c] : counts) EXPECT_NEAR(c / double(samples), 0.2, 0.02) << "leaf " << leaf;
}

TEST(SampleView, ViewsSatisfyStructuralInvariants) {
  Rng grng(9);
  auto g = slgad::testing::random_graph(60, 4, 40, grng);
  Rng rng(10);
  for (std::size_t k : {1u, 2u, 4u, 8u}) {
    for (NodeId t = 0; t < 60; t += 7) {
      auto v = sample_view(g, t, SamplerConfig::for_view_size(k), rng);
      expect_valid_view(g, v, k);
    }
  }
}

TEST(SampleView, DeterministicForSameSeed) {
  Rng grng(4);
  auto g = slgad::testing::random_graph(50, 3, 30, grng);
  for (NodeId t : {0u, 13u, 49u}) {
    Rng a(77), b(77);
    auto va = sample_view(g, t, SamplerConfig::for_view_size(4), a);
    auto vb = sample_view(g, t, SamplerConfig::for_view_size(4), b);
    EXPECT_EQ(va.nodes, vb.nodes);
    EXPECT_EQ(va.features, vb.features);
    EXPECT_EQ(va.adj_norm.matrix, vb.adj_norm.matrix);
  }
}

TEST(SampleView, InvalidTargetThrows) {
  auto g = slgad::testing::path3();
  Rng rng(1);
  EXPECT_THROW(sample_view(g, 3, SamplerConfig{}, rng), std::invalid_argument);
}

TEST(SampleViewPair, SizeOneBothViewsAreTarget) {
  auto g = slgad::testing::complete(4);
  Rng rng(1);
  auto [a, b] = sample_view_pair(g, 2, SamplerConfig::for_view_size(1), rng);
  EXPECT_EQ(a.nodes, std::vector<NodeId>{2});
  EXPECT_EQ(b.nodes, std::vector<NodeId>{2});
}

TEST(SampleViewPair, CompleteGraphPairsAreIndependentAndUniform) {
  // K4, target 0, K = 2: each view is (u, 0) with u uniform on {1,2,3}; the
  // joint (u1, u2) should be uniform over 9 cells. Chi-square, 8 dof,
  // critical value 26.12 at p = 0.001.
  auto g = slgad::testing::complete(4);
  Rng rng(31337);
  const int samples = 9000;
  std::map<std::pair<NodeId, NodeId>, int> cells;
  for (int i = 0; i < samples; ++i) {
    auto [a, b] = sample_view_pair(g, 0, SamplerConfig::for_view_size(2), rng);
    cells[{a.nodes[0], b.nodes[0]}]++;
  }
  ASSERT_EQ(cells.size(), 9u);
  const double expected = samples / 9.0;
  double chi2 = 0.0;
  for (auto [cell, c] : cells) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 26.12);
}

TEST(NegativeViews, PairSwaps) {
  auto g = slgad::testing::complete(4);
  Rng rng(5);
  auto cfg = SamplerConfig::for_view_size(2);
  std::vector<ViewPair> batch{sample_view_pair(g, 0, cfg, rng), sample_view_pair(g, 1, cfg, rng)};
  auto neg = sample_negative_views(batch, rng);
  EXPECT_EQ(neg[0].first.target, 1u);
  EXPECT_EQ(neg[1].first.target, 0u);
  EXPECT_EQ(neg[0].second.nodes, batch[1].second.nodes);
}

TEST(NegativeViews, SingletonBatchIsRejected) {
  auto g = slgad::testing::complete(3);
  Rng rng(5);
  std::vector<ViewPair> batch{sample_view_pair(g, 0, SamplerConfig::for_view_size(2), rng)};
  EXPECT_THROW(sample_negative_views(batch, rng), std::invalid_argument);
}

TEST(NegativeViews, LargeBatchAssignmentIsDerangement) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto perm = random_derangement(300, rng);
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 300; ++i) {
      EXPECT_EQ(sorted[i], i);
      EXPECT_NE(perm[i], i);
    }
  }
  Rng grng(1);
  auto g = slgad::testing::random_graph(300, 2, 100, grng);
  std::vector<ViewPair> batch;
  for (NodeId t = 0; t < 300; ++t) batch.push_back(sample_view_pair(g, t, SamplerConfig{}, rng));
  auto neg = sample_negative_views(batch, rng);
  std::set<NodeId> partners;
  for (NodeId t = 0; t < 300; ++t) {
    EXPECT_NE(neg[t].first.target, t);
    EXPECT_EQ(neg[t].first.target, neg[t].second.target);
    partners.insert(neg[t].first.target);
  }
  EXPECT_EQ(partners.size(), 300u);
}

TEST(NegativeViews, MultiplePartnersAreDistinct) {
  Rng rng(12);
  auto rounds = negative_partners(10, 3, rng);
  ASSERT_EQ(rounds.size(), 3u);
  for (std::size_t i = 0; i < 10; ++i) {
    std::set<std::size_t> seen;
    for (const auto& r : rounds) {
      EXPECT_NE(r[i], i);
      seen.insert(r[i]);
    }
    EXPECT_EQ(seen.size(), 3u);
  }
  EXPECT_THROW(negative_partners(3, 3, rng), std::invalid_argument);
}
