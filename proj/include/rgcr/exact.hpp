#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "rgcr/clustering.hpp"
#include "rgcr/estimators.hpp"
#include "rgcr/exposure.hpp"
#include "rgcr/graph.hpp"
#include "rgcr/randomization.hpp"

namespace rgcr {

// ---- Ordering enumeration ----------------------------------------------------
//
// Both clustering algorithms depend on the score draw only through the
// descending order of scores, and under Beta(w,1) draws that order follows
// the successive-selection law P(next = i) = w_i / sum of remaining weights.
// Enumerating all n! orders with these probabilities therefore gives the
// exact clustering distribution.

inline void for_each_ordering(const WeightVector& w,
                              const std::function<void(const std::vector<int>&, double)>& fn) {
  const int n = static_cast<int>(w.size());
  if (n > 10) throw std::invalid_argument("for_each_ordering: n > 10 not enumerable");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double wsum = 0.0;
  for (double x : w) wsum += x;
  do {
    double prob = 1.0, rem = wsum;
    for (int t = 0; t < n; ++t) {
      prob *= w[perm[t]] / rem;
      rem -= w[perm[t]];
    }
    fn(perm, prob);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

// Scores consistent with a descending order (order[0] ranks highest).
inline std::vector<double> scores_from_order(const std::vector<int>& order) {
  std::vector<double> x(order.size());
  for (std::size_t t = 0; t < order.size(); ++t)
    x[order[t]] = static_cast<double>(order.size() - t);
  return x;
}

struct WeightedClustering {
  Clustering clustering;
  double prob = 0.0;
};

// Exact distribution over clusterings for n <= 10, merging orders that
// produce the same partition.
inline std::vector<WeightedClustering> exact_clustering_distribution(
    const Graph& g, ClusterAlgo algo, const WeightVector& w) {
  std::map<std::vector<int>, WeightedClustering> acc;
  for_each_ordering(w, [&](const std::vector<int>& order, double prob) {
    Clustering c = cluster_from_scores(g, algo, scores_from_order(order));
    auto it = acc.find(c.labels);
    if (it == acc.end()) {
      std::vector<int> key = c.labels;  // key before moving the clustering
      acc.emplace(std::move(key), WeightedClustering{std::move(c), prob});
    } else {
      it->second.prob += prob;
    }
  });
  std::vector<WeightedClustering> out;
  out.reserve(acc.size());
  for (auto& [labels, wc] : acc) out.push_back(std::move(wc));
  return out;
}

// ---- Assignment enumeration ----------------------------------------------------

// Enumerates all cluster-arm vectors with their probabilities. Independent:
// 2^K outcomes. Complete: all perfect matchings x pair flips (odd K: uniform
// leftover cluster with its own fair coin).
inline void for_each_assignment(
    int K, Scheme scheme, double p,
    const std::function<void(const std::vector<std::uint8_t>&, double)>& fn) {
  if (K > 14) throw std::invalid_argument("for_each_assignment: K too large to enumerate");
  std::vector<std::uint8_t> arms(K, 0);
  if (scheme == Scheme::independent) {
    for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
      double prob = 1.0;
      for (int k = 0; k < K; ++k) {
        arms[k] = (mask >> k) & 1;
        prob *= arms[k] ? p : 1.0 - p;
      }
      fn(arms, prob);
    }
    return;
  }
  // complete: recursively match the lowest unmatched cluster
  std::vector<char> used(K, 0);
  std::function<void(int, double)> rec = [&](int matched, double prob) {
    if (matched == K) {
      fn(arms, prob);
      return;
    }
    int first = 0;
    while (used[first]) ++first;
    used[first] = 1;
    for (int other = first + 1; other < K; ++other) {
      if (used[other]) continue;
      used[other] = 1;
      for (int flip = 0; flip < 2; ++flip) {
        arms[first] = flip;
        arms[other] = 1 - flip;
        rec(matched + 2, prob * 0.5);
      }
      used[other] = 0;
    }
    used[first] = 0;
  };
  if (K % 2 == 0) {
    double num_matchings = 1.0;
    for (int x = K - 1; x > 1; x -= 2) num_matchings *= x;
    rec(0, 1.0 / num_matchings);
  } else {
    double num_matchings = 1.0;
    for (int x = K - 2; x > 1; x -= 2) num_matchings *= x;
    for (int leftover = 0; leftover < K; ++leftover) {
      used[leftover] = 1;
      for (int coin = 0; coin < 2; ++coin) {
        arms[leftover] = coin;
        rec(1, 1.0 / (K * 2.0 * num_matchings));
      }
      used[leftover] = 0;
    }
  }
}

// ---- Exact distribution-level tables for small graphs -------------------------

struct ExactTables {
  ProbTable marginals;
  PairProbTable pairs;  // all pairs
};

// Exact tables from an explicit clustering distribution, using the
// closed-form conditional exposure probabilities.
inline ExactTables exact_tables_from_distribution(
    const Graph& g, const std::vector<WeightedClustering>& dist, Scheme scheme, double p) {
  ExactTables t;
  t.marginals.p_treat.assign(g.n, 0.0);
  t.marginals.p_control.assign(g.n, 0.0);
  t.pairs.n = g.n;
  t.pairs.cutoff = std::numeric_limits<int>::max();
  for (const auto& wc : dist) {
    const Clustering& c = wc.clustering;
    for (int i = 0; i < g.n; ++i) {
      t.marginals.p_treat[i] +=
          wc.prob * exposure_prob_given_clustering(g, c, i, Arm::treatment, scheme, p);
      t.marginals.p_control[i] +=
          wc.prob * exposure_prob_given_clustering(g, c, i, Arm::control, scheme, p);
      for (int j = i + 1; j < g.n; ++j)
        for (int ai = 0; ai < 2; ++ai)
          for (int aj = 0; aj < 2; ++aj)
            t.pairs.probs[PairProbTable::key(g.n, i, j, static_cast<Arm>(ai),
                                             static_cast<Arm>(aj))] +=
                wc.prob * joint_exposure_prob_given_clustering(
                              g, c, i, static_cast<Arm>(ai), j, static_cast<Arm>(aj),
                              scheme, p);
    }
  }
  for (int i = 0; i < g.n; ++i) {
    t.pairs.set(i, i, Arm::treatment, Arm::treatment, t.marginals.p_treat[i]);
    t.pairs.set(i, i, Arm::control, Arm::control, t.marginals.p_control[i]);
  }
  t.marginals.meta.n = g.n;
  t.marginals.meta.graph_hash = g.content_hash();
  t.marginals.meta.scheme = to_string(scheme);
  t.marginals.meta.p = p;
  t.pairs.meta = t.marginals.meta;
  t.pairs.meta.cutoff = t.pairs.cutoff;
  return t;
}

inline ExactTables exact_tables(const Graph& g, ClusterAlgo algo, const WeightVector& w,
                                Scheme scheme, double p) {
  return exact_tables_from_distribution(g, exact_clustering_distribution(g, algo, w),
                                        scheme, p);
}

// ---- Exact estimator moments by full enumeration ------------------------------

struct EnumMoments {
  double e_mu1 = 0, e_mu0 = 0, e_tau = 0;
  double var_mu1 = 0, var_mu0 = 0, cov = 0, var_tau = 0;
  double e_tau_hajek = 0;
  double prob_hajek_defined = 0;  // both arms expose at least one node
};

// Expectation/variance of the HT and Hajek estimators over the full joint
// space (clustering draw x assignment draw), with estimators evaluated
// against the supplied probability table.
inline EnumMoments enum_estimator_moments(const Graph& g,
                                          const std::vector<WeightedClustering>& dist,
                                          Scheme scheme, double p,
                                          const PotentialOutcomes& po,
                                          const ProbTable& table) {
  EnumMoments m;
  double e_mu1sq = 0, e_mu0sq = 0, e_mu1mu0 = 0, e_tausq = 0;
  for (const auto& wc : dist) {
    const Clustering& c = wc.clustering;
    for_each_assignment(
        c.cluster_count, scheme, p,
        [&](const std::vector<std::uint8_t>& arms, double aprob) {
          double prob = wc.prob * aprob;
          Assignment a;
          a.scheme = scheme;
          a.p = p;
          a.cluster_arm = arms;
          a.z.resize(g.n);
          for (int i = 0; i < g.n; ++i) a.z[i] = arms[c.labels[i]];
          double mu1 = 0, mu0 = 0;
          double h1n = 0, h1d = 0, h0n = 0, h0d = 0;
          for (int i = 0; i < g.n; ++i) {
            if (is_exposed(g, a, i, Arm::treatment)) {
              mu1 += po.y1[i] / table.p_treat[i];
              h1n += po.y1[i] / table.p_treat[i];
              h1d += 1.0 / table.p_treat[i];
            } else if (is_exposed(g, a, i, Arm::control)) {
              mu0 += po.y0[i] / table.p_control[i];
              h0n += po.y0[i] / table.p_control[i];
              h0d += 1.0 / table.p_control[i];
            }
          }
          mu1 /= g.n;
          mu0 /= g.n;
          double tau = mu1 - mu0;
          m.e_mu1 += prob * mu1;
          m.e_mu0 += prob * mu0;
          m.e_tau += prob * tau;
          e_mu1sq += prob * mu1 * mu1;
          e_mu0sq += prob * mu0 * mu0;
          e_mu1mu0 += prob * mu1 * mu0;
          e_tausq += prob * tau * tau;
          double h1 = h1d > 0 ? h1n / h1d : 0.0;
          double h0 = h0d > 0 ? h0n / h0d : 0.0;
          m.e_tau_hajek += prob * (h1 - h0);
          if (h1d > 0 && h0d > 0) m.prob_hajek_defined += prob;
        });
  }
  m.var_mu1 = e_mu1sq - m.e_mu1 * m.e_mu1;
  m.var_mu0 = e_mu0sq - m.e_mu0 * m.e_mu0;
  m.cov = e_mu1mu0 - m.e_mu1 * m.e_mu0;
  m.var_tau = e_tausq - m.e_tau * m.e_tau;
  return m;
}

// ---- Exact variance of the HT estimators under a finite clustering mixture ----
//
// For a mixture over explicit clusterings the variance formulas can be
// evaluated exactly without materializing the full pairwise table: given a
// clustering, the joint exposure probability of a pair factorizes through
// (m_i, m_j, o_ij) where o_ij counts shared adjacent clusters, and o_ij = 0
// for all but the pairs collected from per-cluster adjacency lists. Cross-pair
// sums then reduce to global sums plus sparse corrections.

struct MixtureVariance {
  std::vector<double> p_treat, p_control;  // exact mixture marginals
  double var_mu1 = 0, var_mu0 = 0, cov = 0, var_tau = 0;
};

namespace detail {

// Adjacent-cluster count per node via a stamp array (no per-node allocation).
inline std::vector<int> adjacent_cluster_counts(const Graph& g, const Clustering& c) {
  std::vector<int> m(g.n);
  std::vector<int> stamp(c.cluster_count, -1);
  for (int i = 0; i < g.n; ++i) {
    int cnt = 1;
    stamp[c.labels[i]] = i;
    for (const int* v = g.nbr_begin(i); v != g.nbr_end(i); ++v) {
      int l = c.labels[*v];
      if (stamp[l] != i) {
        stamp[l] = i;
        ++cnt;
      }
    }
    m[i] = cnt;
  }
  return m;
}

// Visits every unordered node pair (i < j) sharing at least one adjacent
// cluster, with the shared count o_ij, as fn(i, j, o). Works by scattering
// per-cluster member lists through counting arrays, so no global pair list is
// built or sorted -- this is the hot path of the mixture variance.
template <class Fn>
inline void for_each_overlap(const Graph& g, const Clustering& c, Fn&& fn) {
  const int n = g.n;
  const int K = c.cluster_count;
  std::vector<int> stamp(K, -1);
  auto visit_labels = [&](int i, auto&& f) {
    int li = c.labels[i];
    stamp[li] = i;
    f(li);
    for (const int* v = g.nbr_begin(i); v != g.nbr_end(i); ++v) {
      int l = c.labels[*v];
      if (stamp[l] != i) {
        stamp[l] = i;
        f(l);
      }
    }
  };
  // CSR of the nodes adjacent to each cluster
  std::vector<int> start(K + 1, 0);
  for (int i = 0; i < n; ++i) visit_labels(i, [&](int l) { ++start[l + 1]; });
  for (int l = 0; l < K; ++l) start[l + 1] += start[l];
  std::vector<int> members(start[K]);
  std::vector<int> fill(start.begin(), start.end() - 1);
  std::fill(stamp.begin(), stamp.end(), -1);
  for (int i = 0; i < n; ++i) visit_labels(i, [&](int l) { members[fill[l]++] = i; });

  std::vector<int> overlap(n, 0);
  std::vector<int> touched;
  std::fill(stamp.begin(), stamp.end(), -1);
  for (int i = 0; i < n; ++i) {
    touched.clear();
    visit_labels(i, [&](int l) {
      for (int t = start[l]; t < start[l + 1]; ++t) {
        int j = members[t];
        if (j <= i) continue;
        if (overlap[j]++ == 0) touched.push_back(j);
      }
    });
    for (int j : touched) {
      fn(i, j, overlap[j]);
      overlap[j] = 0;
    }
  }
}

}  // namespace detail

inline MixtureVariance mixture_variance(const Graph& g,
                                        const std::vector<Clustering>& clusterings,
                                        const std::vector<double>& mix_weights,
                                        const PotentialOutcomes& po, Scheme scheme,
                                        double p) {
  const int n = g.n;
  const int K = static_cast<int>(clusterings.size());
  if (static_cast<int>(mix_weights.size()) != K)
    throw std::invalid_argument("mixture_variance: weight count mismatch");

  std::vector<std::vector<int>> m_all(K);
  MixtureVariance out;
  out.p_treat.assign(n, 0.0);
  out.p_control.assign(n, 0.0);

  // pass 1: exact mixture marginals (adjacency counts only, no pair work)
  for (int k = 0; k < K; ++k) {
    std::vector<int> m = detail::adjacent_cluster_counts(g, clusterings[k]);
    for (int i = 0; i < n; ++i) {
      if (scheme == Scheme::independent) {
        out.p_treat[i] += mix_weights[k] * std::pow(p, m[i]);
        out.p_control[i] += mix_weights[k] * std::pow(1.0 - p, m[i]);
      } else {
        double q = complete_same_arm_prob(clusterings[k].cluster_count, m[i]);
        out.p_treat[i] += mix_weights[k] * q;
        out.p_control[i] += mix_weights[k] * q;
      }
    }
    m_all[k] = std::move(m);
  }

  std::vector<double> yt1(n), yt0(n);  // responses scaled by inverse marginals
  for (int i = 0; i < n; ++i) {
    if (!(out.p_treat[i] > 0.0) || !(out.p_control[i] > 0.0))
      throw std::runtime_error("mixture_variance: exposure probability is zero "
                               "(positivity violated for this mixture)");
    yt1[i] = po.y1[i] / out.p_treat[i];
    yt0[i] = po.y0[i] / out.p_control[i];
  }

  // pass 2: cross-pair sums S_zz' = sum over ordered pairs i != j of
  // P(E_i^z and E_j^z' | mixture) * yt_i * yt_j
  double S11 = 0, S00 = 0, S10 = 0;
  for (int k = 0; k < K; ++k) {
    const std::vector<int>& m = m_all[k];
    const double wk = mix_weights[k];
    if (scheme == Scheme::independent) {
      double sum1 = 0, sum0 = 0, diag11 = 0, diag00 = 0, diag10 = 0;
      std::vector<double> q1(n), q0(n);
      for (int i = 0; i < n; ++i) {
        q1[i] = std::pow(p, m[i]);
        q0[i] = std::pow(1.0 - p, m[i]);
        sum1 += q1[i] * yt1[i];
        sum0 += q0[i] * yt0[i];
        diag11 += q1[i] * q1[i] * yt1[i] * yt1[i];
        diag00 += q0[i] * q0[i] * yt0[i] * yt0[i];
        diag10 += q1[i] * q0[i] * yt1[i] * yt0[i];
      }
      double c11 = sum1 * sum1 - diag11;
      double c00 = sum0 * sum0 - diag00;
      double c10 = sum1 * sum0 - diag10;
      detail::for_each_overlap(g, clusterings[k], [&](int i, int j, int o) {
        // same arm: joint = q_i q_j p^{-o}; opposite: joint = 0
        c11 += 2.0 * q1[i] * q1[j] * yt1[i] * yt1[j] * (std::pow(p, -o) - 1.0);
        c00 += 2.0 * q0[i] * q0[j] * yt0[i] * yt0[j] * (std::pow(1.0 - p, -o) - 1.0);
        c10 -= q1[i] * q0[j] * yt1[i] * yt0[j] + q1[j] * q0[i] * yt1[j] * yt0[i];
      });
      S11 += wk * c11;
      S00 += wk * c00;
      S10 += wk * c10;
    } else {
      const int Kc = clusterings[k].cluster_count;
      int maxm = 0;
      for (int i = 0; i < n; ++i) maxm = std::max(maxm, m[i]);
      // class sums over nodes grouped by m value
      std::vector<double> s1(maxm + 1, 0.0), s0(maxm + 1, 0.0);
      std::vector<double> d11(maxm + 1, 0.0), d00(maxm + 1, 0.0), d10(maxm + 1, 0.0);
      for (int i = 0; i < n; ++i) {
        s1[m[i]] += yt1[i];
        s0[m[i]] += yt0[i];
        d11[m[i]] += yt1[i] * yt1[i];
        d00[m[i]] += yt0[i] * yt0[i];
        d10[m[i]] += yt1[i] * yt0[i];
      }
      std::vector<double> same(2 * maxm + 1, 0.0);
      for (int u = 0; u <= 2 * maxm && u <= Kc; ++u) same[u] = complete_same_arm_prob(Kc, u);
      std::vector<std::vector<double>> opp(maxm + 1, std::vector<double>(maxm + 1, 0.0));
      for (int a = 1; a <= maxm; ++a)
        for (int b = 1; b <= maxm; ++b)
          if (a + b <= Kc) opp[a][b] = complete_opposite_arm_prob(Kc, a, b);
      double c11 = 0, c00 = 0, c10 = 0;
      for (int a = 1; a <= maxm; ++a)
        for (int b = 1; b <= maxm; ++b) {
          if (a + b > Kc) continue;
          double pairs11 = s1[a] * s1[b] - (a == b ? d11[a] : 0.0);
          double pairs00 = s0[a] * s0[b] - (a == b ? d00[a] : 0.0);
          double pairs10 = s1[a] * s0[b] - (a == b ? d10[a] : 0.0);
          c11 += same[a + b] * pairs11;
          c00 += same[a + b] * pairs00;
          c10 += opp[a][b] * pairs10;
        }
      detail::for_each_overlap(g, clusterings[k], [&](int i, int j, int o) {
        int u = m[i] + m[j] - o;
        double dsame = same[u] - same[m[i] + m[j]];
        c11 += 2.0 * dsame * yt1[i] * yt1[j];
        c00 += 2.0 * dsame * yt0[i] * yt0[j];
        // opposite arms impossible with a shared cluster
        c10 -= opp[m[i]][m[j]] * yt1[i] * yt0[j] + opp[m[j]][m[i]] * yt1[j] * yt0[i];
      });
      S11 += wk * c11;
      S00 += wk * c00;
      S10 += wk * c10;
    }
  }

  double y1sum = 0, y0sum = 0, y1sq = 0, y0sq = 0, diag1 = 0;
  for (int i = 0; i < n; ++i) {
    y1sum += po.y1[i];
    y0sum += po.y0[i];
    y1sq += po.y1[i] * po.y1[i];
    y0sq += po.y0[i] * po.y0[i];
    diag1 += (1.0 / out.p_treat[i] - 1.0) * po.y1[i] * po.y1[i];
  }
  double diag0 = 0;
  for (int i = 0; i < n; ++i) diag0 += (1.0 / out.p_control[i] - 1.0) * po.y0[i] * po.y0[i];

  double nn = static_cast<double>(n) * n;
  out.var_mu1 = (diag1 + S11 - (y1sum * y1sum - y1sq)) / nn;
  out.var_mu0 = (diag0 + S00 - (y0sum * y0sum - y0sq)) / nn;
  out.cov = (S10 - y1sum * y0sum) / nn;
  out.var_tau = out.var_mu1 + out.var_mu0 - 2.0 * out.cov;
  return out;
}

// Exact mixture tables per the finite-mixture identity: the distribution-level
// probability under a K-clustering mixture is the average of conditionals.
inline ExactTables mixture_tables(const Graph& g, const std::vector<Clustering>& clusterings,
                                  const std::vector<double>& mix_weights, Scheme scheme,
                                  double p) {
  std::vector<WeightedClustering> dist(clusterings.size());
  for (std::size_t k = 0; k < clusterings.size(); ++k) {
    dist[k].clustering = clusterings[k];
    dist[k].prob = mix_weights[k];
  }
  return exact_tables_from_distribution(g, dist, scheme, p);
}

// ---- Ring oracle partitions ----------------------------------------------------

// The n/k rotations of k contiguous equal arcs on the cycle C_n; the oracle
// clustering distribution for ring analyses (uniform over rotations).
inline std::vector<Clustering> ring_rotation_clusterings(int n, int k) {
  if (n % k != 0) throw std::invalid_argument("ring_rotation_clusterings: k must divide n");
  int len = n / k;
  std::vector<Clustering> out;
  out.reserve(len);
  for (int r = 0; r < len; ++r) {
    Clustering c;
    c.labels.resize(n);
    for (int i = 0; i < n; ++i) c.labels[i] = ((i - r + n) % n) / len;
    c.cluster_count = k;
    canonicalize(c);
    out.push_back(std::move(c));
  }
  return out;
}

// ---- Exact 1-hop-max tables on a cycle (uniform weights) -----------------------
//
// Exploits vertex transitivity: conditioning on which node holds the top
// score and enumerating the (n-1)! orders of the rest, then averaging each
// statistic over all nodes / all pairs at a fixed cyclic distance, recovers
// the exact unconditional values. Feasible up to n = 12.

struct CycleExactTables {
  double p_treat = 0, p_control = 0;             // marginal (all nodes equal)
  // per cyclic distance d = 1..n/2: joint probabilities
  std::vector<double> joint_tt, joint_cc, joint_tc;  // (1,1), (0,0), (1,0) == (0,1)
};

namespace detail {

// Scheme-independent signature counts over all orderings with the global max
// fixed at node 0 (rotation symmetry) and only one ordering per reflection
// pair (reflection about node 0 preserves all per-distance statistics).
// K (cluster count) can reach roughly 2n/3 <= 8 at n = 12; dimensioned for
// K <= 12. m (adjacent clusters) <= 3, union <= 6.
struct CycleSigCounts {
  long long total = 0;                                          // orderings processed
  std::array<std::array<long long, 4>, 13> marg{};              // [K][m]
  std::vector<std::array<std::array<long long, 7>, 13>> uni;    // [d][K][u]
  std::vector<std::array<std::array<std::array<long long, 4>, 4>, 13>> disj;  // [d][K][a][b], o == 0
};

inline const CycleSigCounts& cycle_sig_counts(int n) {
  static std::map<int, CycleSigCounts> cache;
  auto hit = cache.find(n);
  if (hit != cache.end()) return hit->second;

  const int half = n / 2;
  CycleSigCounts sc;
  sc.uni.assign(half + 1, {});
  sc.disj.assign(half + 1, {});

  std::vector<int> rank(n);
  rank[0] = n;  // node 0 fixed as the global maximum
  std::vector<int> rest(n - 1);
  std::iota(rest.begin(), rest.end(), 1);
  std::vector<int> lab(n), msz(n);
  std::vector<std::array<int, 3>> A(n);
  std::vector<char> seen(n);
  do {
    if (n > 3 && rest[0] > rest[n - 2]) continue;  // one ordering per reflection pair
    for (int i = 1; i < n; ++i) rank[i] = rest[i - 1];
    for (int i = 0; i < n; ++i) {
      int im = i == 0 ? n - 1 : i - 1;
      int ip = i == n - 1 ? 0 : i + 1;
      int l = i;
      if (rank[im] > rank[l]) l = im;
      if (rank[ip] > rank[l]) l = ip;
      lab[i] = l;
    }
    int K = 0;
    std::fill(seen.begin(), seen.end(), 0);
    for (int i = 0; i < n; ++i)
      if (!seen[lab[i]]) {
        seen[lab[i]] = 1;
        ++K;
      }
    for (int i = 0; i < n; ++i) {
      int im = i == 0 ? n - 1 : i - 1;
      int ip = i == n - 1 ? 0 : i + 1;
      int a0 = lab[im], a1 = lab[i], a2 = lab[ip];
      int sz = 1;
      A[i][0] = a0;
      if (a1 != a0) A[i][sz++] = a1;
      if (a2 != a0 && a2 != a1) A[i][sz++] = a2;
      msz[i] = sz;
      ++sc.marg[K][sz];
    }
    for (int i = 0; i < n; ++i)
      for (int dd = 1; dd <= half; ++dd) {
        if (dd == half && n % 2 == 0 && i >= half) continue;  // antipodal pairs once
        int j = i + dd < n ? i + dd : i + dd - n;
        int o = 0;
        for (int x = 0; x < msz[i]; ++x)
          for (int y = 0; y < msz[j]; ++y)
            if (A[i][x] == A[j][y]) ++o;
        ++sc.uni[dd][K][msz[i] + msz[j] - o];
        if (o == 0) ++sc.disj[dd][K][msz[i]][msz[j]];
      }
    ++sc.total;
  } while (std::next_permutation(rest.begin(), rest.end()));
  return cache.emplace(n, std::move(sc)).first->second;
}

}  // namespace detail

inline CycleExactTables exact_cycle_one_hop_max_tables(int n, Scheme scheme, double p) {
  if (n < 3 || n > 12)
    throw std::invalid_argument("exact_cycle_one_hop_max_tables: need 3 <= n <= 12");
  const int half = n / 2;
  const detail::CycleSigCounts& sc = detail::cycle_sig_counts(n);

  // conditional exposure probabilities per signature (complete scheme only;
  // independent uses the power tables below)
  std::array<std::array<double, 7>, 13> same{};                // [K][u]
  std::array<std::array<std::array<double, 4>, 4>, 13> opp{};  // [K][a][b]
  if (scheme == Scheme::complete)
    for (int K = 1; K <= n; ++K) {
      for (int u = 0; u <= 6 && u <= K; ++u) same[K][u] = complete_same_arm_prob(K, u);
      for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b)
          if (a + b <= K) opp[K][a][b] = complete_opposite_arm_prob(K, a, b);
    }

  double pw_p[7], pw_q[7];
  for (int u = 0; u <= 6; ++u) {
    pw_p[u] = std::pow(p, u);
    pw_q[u] = std::pow(1.0 - p, u);
  }

  CycleExactTables t;
  t.joint_tt.assign(half + 1, 0.0);
  t.joint_cc.assign(half + 1, 0.0);
  t.joint_tc.assign(half + 1, 0.0);
  const double total = static_cast<double>(sc.total);

  double marg_t = 0, marg_c = 0;
  for (int K = 1; K <= n; ++K)
    for (int m = 1; m <= 3; ++m) {
      double cnt = static_cast<double>(sc.marg[K][m]);
      if (cnt == 0) continue;
      if (scheme == Scheme::independent) {
        marg_t += cnt * pw_p[m];
        marg_c += cnt * pw_q[m];
      } else {
        marg_t += cnt * same[K][m];
        marg_c += cnt * same[K][m];
      }
    }
  t.p_treat = marg_t / (total * n);
  t.p_control = marg_c / (total * n);

  for (int dd = 1; dd <= half; ++dd) {
    double pair_count = (dd == half && n % 2 == 0) ? n / 2.0 : static_cast<double>(n);
    double tt = 0, cc = 0, tc = 0;
    for (int K = 1; K <= n; ++K) {
      for (int u = 0; u <= 6; ++u) {
        double cnt = static_cast<double>(sc.uni[dd][K][u]);
        if (cnt == 0) continue;
        if (scheme == Scheme::independent) {
          tt += cnt * pw_p[u];
          cc += cnt * pw_q[u];
        } else {
          tt += cnt * same[K][u];
          cc += cnt * same[K][u];
        }
      }
      for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) {
          double cnt = static_cast<double>(sc.disj[dd][K][a][b]);
          if (cnt == 0) continue;
          tc += cnt * (scheme == Scheme::independent ? pw_p[a] * pw_q[b] : opp[K][a][b]);
        }
    }
    t.joint_tt[dd] = tt / (total * pair_count);
    t.joint_cc[dd] = cc / (total * pair_count);
    t.joint_tc[dd] = tc / (total * pair_count);
  }
  return t;
}

// Expands the distance-class tables into full per-node tables for C_n.
inline ExactTables cycle_tables_to_full(int n, const CycleExactTables& ct, Scheme scheme,
                                        double p) {
  ExactTables t;
  t.marginals.p_treat.assign(n, ct.p_treat);
  t.marginals.p_control.assign(n, ct.p_control);
  t.marginals.meta.n = n;
  t.marginals.meta.scheme = to_string(scheme);
  t.marginals.meta.p = p;
  t.pairs.n = n;
  t.pairs.cutoff = std::numeric_limits<int>::max();
  for (int i = 0; i < n; ++i) {
    t.pairs.set(i, i, Arm::treatment, Arm::treatment, ct.p_treat);
    t.pairs.set(i, i, Arm::control, Arm::control, ct.p_control);
    for (int j = i + 1; j < n; ++j) {
      int dd = std::min(j - i, n - (j - i));
      t.pairs.set(i, j, Arm::treatment, Arm::treatment, ct.joint_tt[dd]);
      t.pairs.set(i, j, Arm::control, Arm::control, ct.joint_cc[dd]);
      t.pairs.set(i, j, Arm::treatment, Arm::control, ct.joint_tc[dd]);
      t.pairs.set(i, j, Arm::control, Arm::treatment, ct.joint_tc[dd]);
    }
  }
  t.pairs.meta = t.marginals.meta;
  t.pairs.meta.cutoff = t.pairs.cutoff;
  return t;
}

}  // namespace rgcr
