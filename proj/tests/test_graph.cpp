#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>

#include "oracle.hpp"
#include "rgcr/graph.hpp"

using namespace rgcr;

namespace {
std::string write_tmp(const std::string& name, const std::string& content) {
  std::string path = "tmp_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}
}  // namespace

TEST_CASE("load_edge_list basic, dedup, remap") {
  Graph p3 = load_edge_list(write_tmp("p3.txt", "0 1\n1 2\n"));
  REQUIRE(p3.n == 3);
  REQUIRE(p3.m == 2);
  REQUIRE(p3.has_edge(0, 1));
  REQUIRE_FALSE(p3.has_edge(0, 2));

  Graph e = load_edge_list(write_tmp("dup.txt", "0 1\n1 0\n1 1\n"));
  REQUIRE(e.n == 2);
  REQUIRE(e.m == 1);

  Graph r = load_edge_list(write_tmp("remap.txt", "10 20\n20 30\n"));
  REQUIRE(r.n == 3);
  REQUIRE(r.m == 2);
  REQUIRE(r.degree(1) == 2);  // 20 appeared second -> id 1, the middle of the path

  REQUIRE_THROWS(load_edge_list(write_tmp("bad.txt", "0 x\n")));
  REQUIRE_THROWS(load_edge_list(write_tmp("empty.txt", "# nothing\n")));
}

TEST_CASE("edge list round trip") {
  Graph g = gen_small_world(5, 2.3, 99);
  save_edge_list(g, "tmp_rt.txt");
  Graph h = load_edge_list("tmp_rt.txt");
  REQUIRE(h.n == g.n);
  REQUIRE(h.m == g.m);
  REQUIRE(h.content_hash() == g.content_hash());
}

TEST_CASE("gen_cycle shapes") {
  Graph k3 = gen_cycle(3);
  REQUIRE(k3.n == 3);
  REQUIRE(k3.m == 3);
  for (int i = 0; i < 3; ++i) REQUIRE(k3.degree(i) == 2);

  Graph c6 = gen_cycle(6);
  NodeBall b1 = ball(c6, 0, 1);
  REQUIRE(b1.members == std::vector<int>{0, 1, 5});
  NodeBall b2 = ball(c6, 0, 2);
  REQUIRE(b2.members == std::vector<int>{0, 1, 2, 4, 5});

  Graph c12 = gen_cycle(12);
  auto d = oracle::dist_matrix(c12);
  REQUIRE(d[0][6] == 6);
  REQUIRE_THROWS(gen_cycle(2));
}

TEST_CASE("ball agrees with oracle distances exhaustively") {
  for (const Graph& g : {gen_cycle(9), gen_small_world(5, 2.3, 4)}) {
    auto d = oracle::dist_matrix(g);
    for (int i = 0; i < g.n; ++i)
      for (int r = 0; r <= 4; ++r) {
        NodeBall b = ball(g, i, r);
        std::set<int> mem(b.members.begin(), b.members.end());
        for (int j = 0; j < g.n; ++j) REQUIRE(mem.count(j) == (d[i][j] <= r ? 1u : 0u));
      }
    for (int i = 0; i < g.n; ++i)
      REQUIRE(static_cast<int>(ball(g, i, 1).members.size()) == 1 + g.degree(i));
  }
  REQUIRE_THROWS(ball(gen_cycle(5), 7, 1));
}

TEST_CASE("squared graph") {
  Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
  Graph p3sq = squared_graph(p3);
  REQUIRE(p3sq.m == 3);  // triangle

  Graph c6sq = squared_graph(gen_cycle(6));
  for (int i = 0; i < 6; ++i) REQUIRE(c6sq.degree(i) == 4);
  REQUIRE(c6sq.has_edge(0, 2));
  REQUIRE_FALSE(c6sq.has_edge(0, 3));

  Graph k3 = gen_cycle(3);
  REQUIRE(squared_graph(k3).content_hash() == k3.content_hash());

  // adjacency of i in g^2 equals B_2(i) minus i
  Graph g = gen_small_world(4, 2.3, 8);
  Graph g2 = squared_graph(g);
  for (int i = 0; i < g.n; ++i) {
    NodeBall b = ball(g, i, 2);
    std::vector<int> expect;
    for (int j : b.members)
      if (j != i) expect.push_back(j);
    std::vector<int> got(g2.nbr_begin(i), g2.nbr_end(i));
    REQUIRE(got == expect);
  }
}

TEST_CASE("growth coefficient") {
  GrowthStats cyc = growth_coefficient(gen_cycle(15), 5);
  REQUIRE(cyc.kappa == Catch::Approx(5.0 / 3.0));

  GrowthStats k3 = growth_coefficient(gen_cycle(3), 5);
  REQUIRE(k3.kappa == Catch::Approx(1.0));

  // star with 5 leaves
  Graph s5 = build_graph(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
  GrowthStats st = growth_coefficient(s5, 1);
  REQUIRE(st.kappa == Catch::Approx(3.0));  // |B_2(leaf)| / |B_1(leaf)| = 6/2

  // re-check the defining inequality
  Graph g = gen_small_world(5, 2.3, 21);
  GrowthStats gs = growth_coefficient(g, 5);
  for (int i = 0; i < g.n; ++i)
    for (int r = 1; r <= 5; ++r) {
      double lo = ball(g, i, r).members.size();
      double hi = ball(g, i, r + 1).members.size();
      REQUIRE(hi <= gs.kappa * lo + 1e-12);
    }
}

TEST_CASE("small world generator") {
  Graph big = gen_small_world(96, 2.3, 1);
  REQUIRE(big.n == 9216);
  REQUIRE(big.m >= 18432);  // lattice floor
  REQUIRE(big.max_degree() >= 4);

  Graph torus = gen_small_world(4, 2.3, 1, /*max_long_edges=*/0);
  REQUIRE(torus.n == 16);
  REQUIRE(torus.m == 32);
  for (int i = 0; i < torus.n; ++i) REQUIRE(torus.degree(i) == 4);

  REQUIRE(gen_small_world(8, 2.3, 5).content_hash() == gen_small_world(8, 2.3, 5).content_hash());
  REQUIRE(gen_small_world(8, 2.3, 5).content_hash() != gen_small_world(8, 2.3, 6).content_hash());
  REQUIRE_THROWS(gen_small_world(2, 2.3, 1));
}

TEST_CASE("graph invariants") {
  Graph g = gen_small_world(6, 2.3, 17);
  long long edge_count = 0;
  for (int i = 0; i < g.n; ++i) {
    int prev = -1;
    for (const int* j = g.nbr_begin(i); j != g.nbr_end(i); ++j) {
      REQUIRE(*j != i);        // no self loop
      REQUIRE(*j > prev);      // sorted, no duplicates
      REQUIRE(g.has_edge(*j, i));  // symmetric
      prev = *j;
      ++edge_count;
    }
  }
  REQUIRE(edge_count == 2 * g.m);
  REQUIRE(is_connected(g));
}
