#pragma once

// Brute-force reference implementations used only by tests. Everything here is
// written from the definitions (adjacency matrices, Floyd-Warshall, explicit
// enumeration) rather than by calling the library's algorithms, so agreement
// between the two is a meaningful check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "rgcr/graph.hpp"

namespace oracle {

constexpr int kInf = 1 << 20;

inline std::vector<std::vector<int>> dist_matrix(const rgcr::Graph& g) {
  int n = g.n;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (int i = 0; i < n; ++i)
    for (const int* j = g.nbr_begin(i); j != g.nbr_end(i); ++j) d[i][*j] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline std::vector<int> canon(std::vector<int> labels) {
  std::map<int, int> remap;
  for (int& l : labels) {
    auto it = remap.find(l);
    if (it == remap.end()) {
      int next = static_cast<int>(remap.size());
      remap[l] = next;
      l = next;
    } else {
      l = it->second;
    }
  }
  return labels;
}

// 1-hop-max by definition: label of i = argmax of score over closed
// neighborhood, ties to the smaller id.
inline std::vector<int> one_hop_max_labels(const rgcr::Graph& g,
                                           const std::vector<double>& score) {
  std::vector<int> lab(g.n);
  for (int i = 0; i < g.n; ++i) {
    int best = i;
    for (const int* j = g.nbr_begin(i); j != g.nbr_end(i); ++j)
      if (score[*j] > score[best] || (score[*j] == score[best] && *j < best)) best = *j;
    lab[i] = best;
  }
  return canon(lab);
}

// 3-net by definition: walk the descending order, keep a node as seed if it is
// at distance >= 3 from every seed so far; assign every node to its nearest
// seed, ties to the smallest seed id.
inline std::vector<int> three_net_labels(const rgcr::Graph& g, const std::vector<int>& order,
                                         const std::vector<std::vector<int>>& dist) {
  std::vector<int> seeds;
  for (int v : order) {
    bool ok = true;
    for (int s : seeds)
      if (dist[v][s] < 3) ok = false;
    if (ok) seeds.push_back(v);
  }
  std::vector<int> lab(g.n);
  for (int i = 0; i < g.n; ++i) {
    int best = -1;
    for (int s : seeds) {
      if (best == -1 || dist[i][s] < dist[i][best] ||
          (dist[i][s] == dist[i][best] && s < best))
        best = s;
    }
    lab[i] = best;
  }
  return canon(lab);
}

inline void for_each_perm(int n, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    fn(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

// successive-selection probability of a descending order under weights w
inline double order_prob(const std::vector<int>& order, const std::vector<double>& w) {
  double rem = 0.0;
  for (double x : w) rem += x;
  double prob = 1.0;
  for (int v : order) {
    prob *= w[v] / rem;
    rem -= w[v];
  }
  return prob;
}

enum class Algo { one_hop_max, three_net };

// exact distribution over canonical label vectors
inline std::map<std::vector<int>, double> clustering_distribution(
    const rgcr::Graph& g, Algo algo, const std::vector<double>& w) {
  auto dist = dist_matrix(g);
  std::map<std::vector<int>, double> out;
  for_each_perm(g.n, [&](const std::vector<int>& order) {
    std::vector<int> lab;
    if (algo == Algo::one_hop_max) {
      std::vector<double> score(g.n);
      for (int t = 0; t < g.n; ++t) score[order[t]] = static_cast<double>(g.n - t);
      lab = one_hop_max_labels(g, score);
    } else {
      lab = three_net_labels(g, order, dist);
    }
    out[lab] += order_prob(order, w);
  });
  return out;
}

// All cluster-arm assignments with probabilities. Complete randomization is
// enumerated by listing every permutation, pairing consecutive entries, and
// deduplicating matchings (uniform over distinct matchings, fair coin per
// pair; odd K leaves one uniformly chosen cluster out with its own coin).
inline void for_each_assignment(
    int K, bool complete, double p,
    const std::function<void(const std::vector<int>&, double)>& fn) {
  std::vector<int> arms(K);
  if (!complete) {
    for (int mask = 0; mask < (1 << K); ++mask) {
      double prob = 1.0;
      for (int k = 0; k < K; ++k) {
        arms[k] = (mask >> k) & 1;
        prob *= arms[k] ? p : 1.0 - p;
      }
      fn(arms, prob);
    }
    return;
  }
  if (K % 2 == 0) {
    std::set<std::vector<std::pair<int, int>>> matchings;
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<std::pair<int, int>> m;
      for (int t = 0; t + 1 < K; t += 2)
        m.emplace_back(std::min(perm[t], perm[t + 1]), std::max(perm[t], perm[t + 1]));
      std::sort(m.begin(), m.end());
      matchings.insert(m);
    } while (std::next_permutation(perm.begin(), perm.end()));
    int pairs = K / 2;
    for (const auto& m : matchings)
      for (int flips = 0; flips < (1 << pairs); ++flips) {
        for (int t = 0; t < pairs; ++t) {
          arms[m[t].first] = (flips >> t) & 1;
          arms[m[t].second] = 1 - arms[m[t].first];
        }
        fn(arms, 1.0 / matchings.size() / (1 << pairs));
      }
  } else {
    for (int leftover = 0; leftover < K; ++leftover) {
      std::vector<int> members;
      for (int k = 0; k < K; ++k)
        if (k != leftover) members.push_back(k);
      std::set<std::vector<std::pair<int, int>>> matchings;
      std::vector<int> perm = members;
      do {
        std::vector<std::pair<int, int>> m;
        for (std::size_t t = 0; t + 1 < perm.size(); t += 2)
          m.emplace_back(std::min(perm[t], perm[t + 1]), std::max(perm[t], perm[t + 1]));
        std::sort(m.begin(), m.end());
        matchings.insert(m);
      } while (std::next_permutation(perm.begin(), perm.end()));
      int pairs = (K - 1) / 2;
      for (const auto& m : matchings)
        for (int coin = 0; coin < 2; ++coin)
          for (int flips = 0; flips < (1 << pairs); ++flips) {
            arms[leftover] = coin;
            for (int t = 0; t < pairs; ++t) {
              arms[m[t].first] = (flips >> t) & 1;
              arms[m[t].second] = 1 - arms[m[t].first];
            }
            fn(arms, 1.0 / K / 2.0 / matchings.size() / (1 << pairs));
          }
    }
  }
}

inline bool exposed(const rgcr::Graph& g, const std::vector<int>& lab,
                    const std::vector<int>& arms, int i, int arm) {
  if (arms[lab[i]] != arm) return false;
  for (const int* j = g.nbr_begin(i); j != g.nbr_end(i); ++j)
    if (arms[lab[*j]] != arm) return false;
  return true;
}

// exact conditional exposure probability by assignment enumeration
inline double exposure_prob(const rgcr::Graph& g, const std::vector<int>& lab, int K,
                            int i, int arm, bool complete, double p) {
  double total = 0.0;
  for_each_assignment(K, complete, p, [&](const std::vector<int>& arms, double prob) {
    if (exposed(g, lab, arms, i, arm)) total += prob;
  });
  return total;
}

inline double joint_prob(const rgcr::Graph& g, const std::vector<int>& lab, int K, int i,
                         int arm_i, int j, int arm_j, bool complete, double p) {
  double total = 0.0;
  for_each_assignment(K, complete, p, [&](const std::vector<int>& arms, double prob) {
    if (exposed(g, lab, arms, i, arm_i) && exposed(g, lab, arms, j, arm_j)) total += prob;
  });
  return total;
}

// ---- Dense symmetric eigensolver (cyclic Jacobi) -------------------------------

struct EigResult {
  std::vector<double> values;               // ascending
  std::vector<std::vector<double>> vectors; // vectors[k] belongs to values[k]
};

inline EigResult jacobi_eig(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-26) break;
    for (int pp = 0; pp < n; ++pp)
      for (int q = pp + 1; q < n; ++q) {
        if (std::abs(a[pp][q]) < 1e-300) continue;
        double theta = (a[q][q] - a[pp][pp]) / (2.0 * a[pp][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a[k][pp], akq = a[k][q];
          a[k][pp] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a[pp][k], aqk = a[q][k];
          a[pp][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v[k][pp], vkq = v[k][q];
          v[k][pp] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] < a[y][y]; });
  EigResult r;
  for (int k : order) {
    r.values.push_back(a[k][k]);
    std::vector<double> vec(n);
    for (int i = 0; i < n; ++i) vec[i] = v[i][k];
    r.vectors.push_back(std::move(vec));
  }
  return r;
}

}  // namespace oracle
