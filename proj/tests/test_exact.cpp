#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "oracle.hpp"
#include "rgcr/exact.hpp"

using namespace rgcr;

TEST_CASE("ordering enumeration is a probability distribution") {
  WeightVector w{1.0, 2.0, 0.5, 1.5};
  double total = 0;
  int count = 0;
  for_each_ordering(w, [&](const std::vector<int>& order, double prob) {
    total += prob;
    ++count;
    REQUIRE(prob > 0);
  });
  REQUIRE(count == 24);
  REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("assignment enumeration matches the oracle for both schemes") {
  for (int K = 2; K <= 7; ++K)
    for (bool complete : {false, true}) {
      double p = complete ? 0.5 : 0.35;
      std::map<std::vector<int>, double> want;
      oracle::for_each_assignment(K, complete, p,
                                  [&](const std::vector<int>& arms, double pr) {
                                    want[arms] += pr;
                                  });
      std::map<std::vector<int>, double> got;
      for_each_assignment(K, complete ? Scheme::complete : Scheme::independent, p,
                          [&](const std::vector<std::uint8_t>& arms, double pr) {
                            got[std::vector<int>(arms.begin(), arms.end())] += pr;
                          });
      REQUIRE(got.size() == want.size());
      double total = 0;
      for (const auto& [arms, pr] : want) {
        REQUIRE(got.count(arms) == 1);
        REQUIRE(got[arms] == Catch::Approx(pr).margin(1e-12));
        total += got[arms];
      }
      REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("exact clustering distributions match the oracle") {
  Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
  Graph c6 = gen_cycle(6);
  Graph k3 = gen_cycle(3);
  for (const Graph* g : {&p3, &c6, &k3}) {
    WeightVector wu(g->n, 1.0);
    WeightVector ww(g->n);
    Rng rng(71);
    for (double& x : ww) x = 0.5 + 2 * rng.uniform();
    for (ClusterAlgo algo : {ClusterAlgo::one_hop_max, ClusterAlgo::three_net})
      for (const WeightVector* w : {&wu, &ww}) {
        auto lib = exact_clustering_distribution(*g, algo, *w);
        auto want = oracle::clustering_distribution(
            *g, algo == ClusterAlgo::one_hop_max ? oracle::Algo::one_hop_max
                                                 : oracle::Algo::three_net,
            *w);
        REQUIRE(lib.size() == want.size());
        double total = 0;
        for (const auto& wc : lib) {
          auto it = want.find(wc.clustering.labels);
          REQUIRE(it != want.end());
          REQUIRE(wc.prob == Catch::Approx(it->second).margin(1e-12));
          total += wc.prob;
        }
        REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
      }
  }
}

TEST_CASE("exact tables match full oracle computation") {
  Graph c6 = gen_cycle(6);
  WeightVector w{1.0, 2.0, 1.0, 0.5, 1.0, 3.0};
  for (ClusterAlgo algo : {ClusterAlgo::one_hop_max, ClusterAlgo::three_net})
    for (bool complete : {false, true}) {
      double p = complete ? 0.5 : 0.3;
      Scheme scheme = complete ? Scheme::complete : Scheme::independent;
      ExactTables t = exact_tables(c6, algo, w, scheme, p);
      auto cdist = oracle::clustering_distribution(
          c6, algo == ClusterAlgo::one_hop_max ? oracle::Algo::one_hop_max
                                               : oracle::Algo::three_net,
          w);
      for (int i = 0; i < 6; ++i) {
        double want = 0;
        for (const auto& [lab, cp] : cdist) {
          int K = *std::max_element(lab.begin(), lab.end()) + 1;
          want += cp * oracle::exposure_prob(c6, lab, K, i, 1, complete, p);
        }
        REQUIRE(t.marginals.p_treat[i] == Catch::Approx(want).margin(1e-12));
      }
      for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j)
          for (int ai = 0; ai < 2; ++ai)
            for (int aj = 0; aj < 2; ++aj) {
              if (i == j && ai != aj) continue;
              double want = 0;
              for (const auto& [lab, cp] : cdist) {
                int K = *std::max_element(lab.begin(), lab.end()) + 1;
                want += cp * oracle::joint_prob(c6, lab, K, i, ai, j, aj, complete, p);
              }
              REQUIRE(t.pairs.get(i, j, static_cast<Arm>(ai), static_cast<Arm>(aj)) ==
                      Catch::Approx(want).margin(1e-12));
            }
    }
}

TEST_CASE("enumerated estimator moments: unbiasedness and variance identity") {
  Graph c6 = gen_cycle(6);
  WeightVector w(6, 1.0);
  PotentialOutcomes po;
  po.y1 = {1.2, 0.8, 1.5, 2.0, 0.5, 1.0};
  po.y0 = {1.0, 0.7, 1.1, 1.6, 0.4, 0.9};
  for (Scheme scheme : {Scheme::independent, Scheme::complete}) {
    auto dist = exact_clustering_distribution(c6, ClusterAlgo::one_hop_max, w);
    ExactTables t = exact_tables_from_distribution(c6, dist, scheme, 0.5);
    EnumMoments m = enum_estimator_moments(c6, dist, scheme, 0.5, po, t.marginals);
    double mu1 = 0, mu0 = 0;
    for (int i = 0; i < 6; ++i) {
      mu1 += po.y1[i] / 6;
      mu0 += po.y0[i] / 6;
    }
    REQUIRE(m.e_mu1 == Catch::Approx(mu1).margin(1e-10));
    REQUIRE(m.e_mu0 == Catch::Approx(mu0).margin(1e-10));
    REQUIRE(m.e_tau == Catch::Approx(mu1 - mu0).margin(1e-10));
    REQUIRE(m.var_mu1 ==
            Catch::Approx(ht_variance_mu(po, t.marginals, t.pairs, Arm::treatment))
                .margin(1e-10));
    REQUIRE(m.var_tau ==
            Catch::Approx(ht_variance_gate(po, t.marginals, t.pairs)).margin(1e-10));
    // complete randomization on C6's coarse clusterings often exposes only one
    // arm, so the defined-probability is genuinely small there
    REQUIRE(m.prob_hajek_defined > 0.2);
  }
}

TEST_CASE("mixture variance decomposition equals per-table evaluation") {
  Graph g = gen_small_world(4, 2.3, 80);
  PotentialOutcomes po;
  po.y1.resize(g.n);
  po.y0.resize(g.n);
  Rng rng(81);
  for (int i = 0; i < g.n; ++i) {
    po.y0[i] = 0.5 + rng.uniform();
    po.y1[i] = po.y0[i] * (1.3 + 0.2 * rng.uniform());
  }
  for (ClusterAlgo algo : {ClusterAlgo::one_hop_max, ClusterAlgo::three_net})
    for (Scheme scheme : {Scheme::independent, Scheme::complete}) {
      double p = scheme == Scheme::complete ? 0.5 : 0.45;
      std::vector<Clustering> cs = sample_many(g, algo, WeightVector(g.n, 1.0), 7, 82);
      std::vector<double> mix(7, 1.0 / 7);
      MixtureVariance mv = mixture_variance(g, cs, mix, po, scheme, p);

      // reference route: explicit distribution-level tables for this mixture
      std::vector<WeightedClustering> dist;
      for (int k = 0; k < 7; ++k) dist.push_back({cs[k], mix[k]});
      ExactTables t = exact_tables_from_distribution(g, dist, scheme, p);
      for (int i = 0; i < g.n; ++i)
        REQUIRE(mv.p_treat[i] == Catch::Approx(t.marginals.p_treat[i]).margin(1e-12));
      REQUIRE(mv.var_mu1 ==
              Catch::Approx(ht_variance_mu(po, t.marginals, t.pairs, Arm::treatment,
                                           TruncationPolicy::strict))
                  .margin(1e-10));
      REQUIRE(mv.var_mu0 ==
              Catch::Approx(ht_variance_mu(po, t.marginals, t.pairs, Arm::control,
                                           TruncationPolicy::strict))
                  .margin(1e-10));
      REQUIRE(mv.cov ==
              Catch::Approx(ht_covariance(po, t.marginals, t.pairs,
                                          TruncationPolicy::strict))
                  .margin(1e-10));
      REQUIRE(mv.var_tau == Catch::Approx(mv.var_mu1 + mv.var_mu0 - 2 * mv.cov)
                                .margin(1e-12));
    }

  // positivity violation raises
  Graph c6 = gen_cycle(6);
  Clustering halves;
  halves.labels = {0, 0, 0, 1, 1, 1};
  halves.cluster_count = 2;
  PotentialOutcomes ones;
  ones.y1.assign(6, 1.0);
  ones.y0.assign(6, 1.0);
  REQUIRE_THROWS(mixture_variance(c6, {halves}, {1.0}, ones, Scheme::complete, 0.5));
}

TEST_CASE("cycle enumerator agrees with the generic exact tables") {
  for (int n : {6, 8}) {
    Graph cn = gen_cycle(n);
    WeightVector u(n, 1.0);
    for (Scheme scheme : {Scheme::independent, Scheme::complete}) {
      ExactTables want = exact_tables(cn, ClusterAlgo::one_hop_max, u, scheme, 0.5);
      CycleExactTables ct = exact_cycle_one_hop_max_tables(n, scheme, 0.5);
      ExactTables got = cycle_tables_to_full(n, ct, scheme, 0.5);
      for (int i = 0; i < n; ++i)
        REQUIRE(got.marginals.p_treat[i] ==
                Catch::Approx(want.marginals.p_treat[i]).margin(1e-12));
      for (const auto& [k, v] : want.pairs.probs)
        REQUIRE(got.pairs.probs.at(k) == Catch::Approx(v).margin(1e-12));
    }
  }
}

TEST_CASE("ring rotation clusterings") {
  auto cs = ring_rotation_clusterings(12, 4);
  REQUIRE(cs.size() == 3);  // one per rotation offset, n/k of them
  for (const Clustering& c : cs) {
    REQUIRE(c.cluster_count == 4);
    std::map<int, int> sizes;
    for (int l : c.labels) sizes[l]++;
    for (auto& [l, s] : sizes) REQUIRE(s == 3);  // contiguous arcs of length n/k
  }
  REQUIRE_THROWS(ring_rotation_clusterings(10, 3));  // k must divide n
}
