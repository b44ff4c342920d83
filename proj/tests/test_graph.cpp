#include <gtest/gtest.h>

#include <queue>

#include "dsgraph/dsgraph.hpp"
#include "oracles.hpp"

using namespace dsgraph;

namespace {

bool bfs_connected(const Graph& g) {
  const auto adj = g.adjacency_lists();
  std::vector<char> seen(adj.size(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == adj.size();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(BuildGraph, SmallestPath) {
  const Graph g = build_graph(2, {{0, 1}});
  EXPECT_EQ(g.num_vertices(), 2);
  ASSERT_EQ(g.num_edges(), 1u);
  EXPECT_TRUE(g.has_edge(1, 0));
}

TEST(BuildGraph, NormalizesAndDeduplicates) {
  const Graph g = build_graph(3, {{1, 0}, {1, 2}, {1, 2}});
  const std::vector<Edge> expected{{0, 1}, {1, 2}};
  EXPECT_EQ(g.edges(), expected);
}

TEST(BuildGraph, RejectsBadInput) {
  EXPECT_EQ(kind_of([] { build_graph(3, {{0, 3}}); }), ErrorKind::IndexOutOfRange);
  EXPECT_EQ(kind_of([] { build_graph(3, {{2, 2}}); }), ErrorKind::SelfLoop);
  EXPECT_EQ(kind_of([] { build_graph(3, {{-1, 2}}); }), ErrorKind::IndexOutOfRange);
}

TEST(Laplacian, PathOfTwo) {
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  EXPECT_EQ(laplacian(oracle::p2()), expected);
}

TEST(Laplacian, PathOfThree) {
  Eigen::MatrixXd expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  EXPECT_EQ(laplacian(oracle::p3()), expected);
}

TEST(Laplacian, RowSumsVanishAndSymmetric) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = generate_graph({RandomConnectedSpec{12, 20}, seed});
    const Eigen::MatrixXd lap = laplacian(g);
    EXPECT_LT((lap * Eigen::VectorXd::Ones(12)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(lap, lap.transpose());
  }
}

TEST(GenerateGraph, PathOfFour) {
  const Graph g = generate_graph({PathSpec{4}, 0});
  const std::vector<Edge> expected{{0, 1}, {1, 2}, {2, 3}};
  EXPECT_EQ(g.edges(), expected);
}

TEST(GenerateGraph, FiveCycle) {
  const Graph g = generate_graph({CirculantSpec{5, {1}}, 0});
  EXPECT_EQ(g.num_edges(), 5u);
  for (int deg : g.degrees()) EXPECT_EQ(deg, 2);
}

TEST(GenerateGraph, CirculantDefaultOffsets) {
  const Graph g = generate_graph({CirculantSpec{8}, 0});
  EXPECT_EQ(g.num_edges(), 16u);
  for (int deg : g.degrees()) EXPECT_EQ(deg, 4);
}

TEST(GenerateGraph, CirculantRejectsLargeOffset) {
  EXPECT_EQ(kind_of([] { generate_graph({CirculantSpec{6, {4}}, 0}); }), ErrorKind::InfeasibleSpec);
}

TEST(GenerateGraph, RandomConnectedFifteenFortyFive) {
  const Graph g = generate_graph({RandomConnectedSpec{15, 45}, 7});
  EXPECT_EQ(g.num_vertices(), 15);
  EXPECT_EQ(g.num_edges(), 45u);
  EXPECT_TRUE(bfs_connected(g));
}

TEST(GenerateGraph, RandomConnectedAcrossSeedsAndDensities) {
  for (int d : {2, 5, 15, 30}) {
    const int max_edges = d * (d - 1) / 2;
    for (int edges : {d - 1, (d - 1 + max_edges) / 2, max_edges}) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = generate_graph({RandomConnectedSpec{d, edges}, seed});
        ASSERT_EQ(g.num_edges(), static_cast<std::size_t>(edges));
        ASSERT_TRUE(oracle::connected(g)) << d << " " << edges << " " << seed;
        ASSERT_TRUE(bfs_connected(g));
      }
    }
  }
}

TEST(GenerateGraph, RandomConnectedRejectsInfeasibleCounts) {
  EXPECT_EQ(kind_of([] { generate_graph({RandomConnectedSpec{5, 3}, 0}); }), ErrorKind::InfeasibleSpec);
  EXPECT_EQ(kind_of([] { generate_graph({RandomConnectedSpec{5, 11}, 0}); }), ErrorKind::InfeasibleSpec);
}

TEST(GenerateGraph, Reproducible) {
  const GraphSpec spec{RandomConnectedSpec{20, 50}, 1234};
  EXPECT_EQ(generate_graph(spec), generate_graph(spec));
  const GraphSpec other{RandomConnectedSpec{20, 50}, 1235};
  EXPECT_NE(generate_graph(spec), generate_graph(other));
  const GraphSpec clustered{ClusteredSpec{}, 99};
  EXPECT_EQ(generate_graph(clustered), generate_graph(clustered));
}

TEST(GenerateGraph, ClusteredStructure) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = generate_graph({ClusteredSpec{38, 7, 2, 2}, seed});
    ASSERT_EQ(g.num_vertices(), 45);
    const std::size_t expected = 38 * 37 / 2 - 2 + 7 * 6 / 2 - 2 + 2;
    EXPECT_EQ(g.num_edges(), expected);
    int bridges = 0;
    for (const auto& [u, v] : g.edges()) bridges += (u < 38) != (v < 38);
    EXPECT_EQ(bridges, 2);
    std::vector<int> a(38), b(7);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 38);
    EXPECT_TRUE(is_connected(g, a));
    EXPECT_TRUE(is_connected(g, b));
    EXPECT_TRUE(oracle::connected(g));
  }
}

TEST(GenerateGraph, ClusteredInfeasible) {
  EXPECT_EQ(kind_of([] { generate_graph({ClusteredSpec{3, 3, 4, 1}, 0}); }), ErrorKind::InfeasibleSpec);
  EXPECT_EQ(kind_of([] { generate_graph({ClusteredSpec{2, 2, 0, 5}, 0}); }), ErrorKind::InfeasibleSpec);
}

TEST(GeneratedLaplacian, PositiveSemidefiniteWithConstantKernel) {
  const std::vector<GraphSpec> specs{{RandomConnectedSpec{20, 40}, 3}, {ClusteredSpec{}, 4}, {PathSpec{9}, 0},
                                     {CirculantSpec{11, {1, 3}}, 0}};
  for (const auto& spec : specs) {
    const Graph g = generate_graph(spec);
    const Eigen::MatrixXd lap = laplacian(g);
    const SpectralBasis basis = eig_sym(lap);
    EXPECT_GE(basis.eigenvalues(0), -1e-9 * max_abs(lap));
    EXPECT_NEAR(basis.eigenvalues(0), 0.0, 1e-9 * max_abs(lap));
    const int d = g.num_vertices();
    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(d));
    EXPECT_NEAR(std::abs(basis.basis.row(0).dot(constant)), 1.0, 1e-8);
  }
}

TEST(ParseEdgeList, PathOfThree) {
  const Graph g = parse_edge_list("0 1\n1 2\n");
  EXPECT_EQ(g, oracle::p3());
}

TEST(ParseEdgeList, SkipsComments) {
  EXPECT_EQ(parse_edge_list("# comment\n0 1\n"), oracle::p2());
}

TEST(ParseEdgeList, ReportsLineNumber) {
  try {
    parse_edge_list("0 one\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  }
  try {
    parse_edge_list("# header\n0 1\n2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(ParseEdgeList, HeaderFixesVertexCount) {
  const Graph g = parse_edge_list("d=5\n0 1\n");
  EXPECT_EQ(g.num_vertices(), 5);
  try {
    parse_edge_list("d=2\n0 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ParseEdgeList, RoundTrip) {
  const Graph g = generate_graph({RandomConnectedSpec{12, 30}, 5});
  EXPECT_EQ(parse_edge_list(format_edge_list(g)), g);
  const Graph isolated = build_graph(4, {{0, 1}});
  EXPECT_EQ(parse_edge_list(format_edge_list(isolated)), isolated);
}
