#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rgcr/clustering.hpp"
#include "rgcr/graph.hpp"
#include "rgcr/rng.hpp"

namespace rgcr {

enum class Arm : int { control = 0, treatment = 1 };

enum class Scheme { independent, complete };

inline std::string to_string(Scheme s) {
  return s == Scheme::independent ? "independent" : "complete";
}

struct Assignment {
  std::vector<std::uint8_t> cluster_arm;  // per cluster label: 1 = treatment
  std::vector<std::uint8_t> z;            // per node
  Scheme scheme = Scheme::independent;
  double p = 0.5;
};

// Independent: each cluster treated with probability p. Complete: clusters
// are paired by a uniform random perfect matching and each pair gets opposite
// arms by a fair coin; with an odd cluster count one uniformly chosen cluster
// is left unmatched and assigned by its own fair coin.
inline Assignment assign(const Clustering& c, Scheme scheme, double p, Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("assign: p outside (0,1)");
  if (scheme == Scheme::complete && p != 0.5)
    throw std::invalid_argument("assign: complete randomization requires p = 0.5");
  Assignment a;
  a.scheme = scheme;
  a.p = p;
  const int K = c.cluster_count;
  a.cluster_arm.assign(K, 0);
  if (scheme == Scheme::independent) {
    for (int k = 0; k < K; ++k) a.cluster_arm[k] = rng.bernoulli(p) ? 1 : 0;
  } else {
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    for (int t = 0; t + 1 < K; t += 2) {
      bool first_treated = rng.bernoulli(0.5);
      a.cluster_arm[perm[t]] = first_treated ? 1 : 0;
      a.cluster_arm[perm[t + 1]] = first_treated ? 0 : 1;
    }
    if (K % 2 == 1) a.cluster_arm[perm[K - 1]] = rng.bernoulli(0.5) ? 1 : 0;
  }
  a.z.resize(c.labels.size());
  for (std::size_t i = 0; i < c.labels.size(); ++i) a.z[i] = a.cluster_arm[c.labels[i]];
  return a;
}

// Full-neighborhood exposure: node i and all its neighbors carry arm z.
inline bool is_exposed(const Graph& g, const Assignment& a, int i, Arm arm) {
  std::uint8_t want = static_cast<std::uint8_t>(arm);
  if (a.z[i] != want) return false;
  for (const int* v = g.nbr_begin(i); v != g.nbr_end(i); ++v)
    if (a.z[*v] != want) return false;
  return true;
}

// Sorted distinct cluster labels over the closed 1-hop ball of i.
inline std::vector<int> adjacent_clusters(const Graph& g, const Clustering& c, int i) {
  std::vector<int> labs;
  labs.reserve(g.degree(i) + 1);
  labs.push_back(c.labels[i]);
  for (const int* v = g.nbr_begin(i); v != g.nbr_end(i); ++v) labs.push_back(c.labels[*v]);
  std::sort(labs.begin(), labs.end());
  labs.erase(std::unique(labs.begin(), labs.end()), labs.end());
  return labs;
}

inline int adjacent_cluster_count(const Graph& g, const Clustering& c, int i) {
  return static_cast<int>(adjacent_clusters(g, c, i).size());
}

// ---- Complete-scheme matching combinatorics ---------------------------------
//
// All probabilities below are over a uniform random perfect matching of K
// clusters (odd K: uniform leftover assigned by fair coin) with opposite arms
// within each pair decided by fair coins.

// log of (2s-1)!! = (2s)! / (2^s s!)
inline double log_double_factorial_odd(int odd) {
  if (odd <= 0) return 0.0;  // (-1)!! = 1!! = ... base cases
  int s = (odd + 1) / 2;
  return std::lgamma(2 * s + 1) - s * std::log(2.0) - std::lgamma(s + 1);
}

// P(no two of m marked clusters are matched to each other), K total clusters.
inline double complete_avoid_prob(int K, int m) {
  if (m <= 1) return 1.0;
  if (m > K) throw std::invalid_argument("complete_avoid_prob: m > K");
  if (K % 2 == 1) {
    double total = (static_cast<double>(m) / K) * complete_avoid_prob(K - 1, m - 1);
    if (m < K) total += (static_cast<double>(K - m) / K) * complete_avoid_prob(K - 1, m);
    return total;
  }
  double prob = 1.0;
  for (int j = 0; j < m; ++j) {
    if (K - m - j <= 0) return 0.0;
    prob *= static_cast<double>(K - m - j) / (K - 1 - 2 * j);
  }
  return prob;
}

// P(all m marked clusters end up in the same given arm).
inline double complete_same_arm_prob(int K, int m) {
  if (m < 0 || m > K) throw std::invalid_argument("complete_same_arm_prob: bad m");
  if (m == 0) return 1.0;
  return std::pow(0.5, m) * complete_avoid_prob(K, m);
}

// P(all a clusters of one disjoint set are treated and all b clusters of the
// other are control). Even K: sum over t = number of cross-matched pairs.
inline double complete_opposite_arm_prob(int K, int a, int b) {
  if (a < 0 || b < 0 || a + b > K)
    throw std::invalid_argument("complete_opposite_arm_prob: bad sizes");
  if (a == 0) return complete_same_arm_prob(K, b);
  if (b == 0) return complete_same_arm_prob(K, a);
  if (K % 2 == 1) {
    double total =
        (static_cast<double>(a) / K) * 0.5 * complete_opposite_arm_prob(K - 1, a - 1, b) +
        (static_cast<double>(b) / K) * 0.5 * complete_opposite_arm_prob(K - 1, a, b - 1);
    if (a + b < K)
      total += (static_cast<double>(K - a - b) / K) * complete_opposite_arm_prob(K - 1, a, b);
    return total;
  }
  const int O = K - a - b;
  double total = 0.0;
  for (int t = 0; t <= std::min(a, b); ++t) {
    int r = a + b - 2 * t;  // clusters that must match into the outside set
    if (r > O) continue;
    // log of C(a,t) C(b,t) t! * O!/(O-r)! * (O-r-1)!! / (K-1)!!
    double lg = std::lgamma(a + 1) - std::lgamma(t + 1) - std::lgamma(a - t + 1) +
                std::lgamma(b + 1) - std::lgamma(b - t + 1) +
                std::lgamma(O + 1) - std::lgamma(O - r + 1) +
                log_double_factorial_odd(O - r - 1) - log_double_factorial_odd(K - 1);
    total += std::exp(lg) * std::pow(0.5, a + b - t);
  }
  return total;
}

// ---- Conditional exposure probabilities -------------------------------------

inline double exposure_prob_given_clustering(const Graph& g, const Clustering& c, int i,
                                             Arm arm, Scheme scheme, double p) {
  int m = adjacent_cluster_count(g, c, i);
  if (scheme == Scheme::independent)
    return arm == Arm::treatment ? std::pow(p, m) : std::pow(1.0 - p, m);
  return complete_same_arm_prob(c.cluster_count, m);
}

namespace detail {

inline int sorted_intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  int cnt = 0;
  std::size_t x = 0, y = 0;
  while (x < a.size() && y < b.size()) {
    if (a[x] < b[y]) ++x;
    else if (a[x] > b[y]) ++y;
    else { ++cnt; ++x; ++y; }
  }
  return cnt;
}

}  // namespace detail

// P(node i exposed to arm_i AND node j exposed to arm_j | clustering).
inline double joint_exposure_prob_given_clustering(const Graph& g, const Clustering& c,
                                                   int i, Arm arm_i, int j, Arm arm_j,
                                                   Scheme scheme, double p) {
  if (i == j)
    return arm_i == arm_j ? exposure_prob_given_clustering(g, c, i, arm_i, scheme, p) : 0.0;
  std::vector<int> A = adjacent_clusters(g, c, i);
  std::vector<int> B = adjacent_clusters(g, c, j);
  int overlap = detail::sorted_intersection_size(A, B);
  int uni = static_cast<int>(A.size() + B.size()) - overlap;
  if (arm_i == arm_j) {
    if (scheme == Scheme::independent)
      return arm_i == Arm::treatment ? std::pow(p, uni) : std::pow(1.0 - p, uni);
    return complete_same_arm_prob(c.cluster_count, uni);
  }
  if (overlap > 0) return 0.0;
  int a = static_cast<int>(arm_i == Arm::treatment ? A.size() : B.size());
  int b = static_cast<int>(arm_i == Arm::treatment ? B.size() : A.size());
  if (scheme == Scheme::independent) return std::pow(p, a) * std::pow(1.0 - p, b);
  return complete_opposite_arm_prob(c.cluster_count, a, b);
}

}  // namespace rgcr
