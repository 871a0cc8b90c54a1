#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "rgcr/graph.hpp"
#include "rgcr/rng.hpp"

namespace rgcr {

using WeightVector = std::vector<double>;

enum class ClusterAlgo { one_hop_max, three_net };

inline std::string to_string(ClusterAlgo a) {
  return a == ClusterAlgo::one_hop_max ? "one_hop_max" : "three_net";
}

struct Clustering {
  std::vector<int> labels;   // canonical: labels appear in increasing order of first node
  int cluster_count = 0;
  std::vector<int> centers;  // centers[label]: argmax node (1-hop-max) or seed (3-net)
};

// Relabels clusters so labels are 0..K-1 in order of first appearance by
// node id, permuting centers to match.
inline void canonicalize(Clustering& c) {
  std::vector<int> remap(c.labels.size(), -1);
  std::vector<int> new_centers;
  int next = 0;
  for (int& l : c.labels) {
    if (remap[l] < 0) {
      remap[l] = next++;
      if (!c.centers.empty()) new_centers.push_back(c.centers[l]);
    }
    l = remap[l];
  }
  c.cluster_count = next;
  c.centers = std::move(new_centers);
}

struct SpectralResult {
  WeightVector weights;      // leading eigenvector, normalized to max = 1
  double eigenvalue = 0.0;   // lambda*: spectral radius of the 2-hop ball sum operator
  int iterations = 0;
  bool converged = false;
};

// Power iteration on v -> sum of v over each node's 2-hop ball (including the
// node itself). The operator is symmetric and nonnegative, so the iteration
// from the all-ones vector converges to the Perron eigenpair.
inline SpectralResult spectral_weights(const Graph& g, double tol = 1e-10,
                                       int max_iter = 100000) {
  if (!is_connected(g)) throw std::invalid_argument("spectral_weights: graph not connected");
  const int n = g.n;
  // 2-hop ball adjacency (distance 1 or 2), node itself handled separately.
  Graph g2 = squared_graph(g);
  std::vector<double> v(n, 1.0), next(n);
  double lambda = 0.0;
  SpectralResult res;
  for (int it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = v[i];
      for (const int* j = g2.nbr_begin(i); j != g2.nbr_end(i); ++j) s += v[*j];
      next[i] = s;
    }
    double num = 0.0, den = 0.0, mx = 0.0;
    for (int i = 0; i < n; ++i) {
      num += next[i] * v[i];
      den += v[i] * v[i];
      mx = std::max(mx, next[i]);
    }
    double lambda_new = num / den;
    for (int i = 0; i < n; ++i) v[i] = next[i] / mx;
    res.iterations = it;
    if (it > 1 && std::abs(lambda_new - lambda) <= tol) {
      lambda = lambda_new;
      res.converged = true;
      break;
    }
    lambda = lambda_new;
  }
  res.eigenvalue = lambda;
  double mx = *std::max_element(v.begin(), v.end());
  for (double& x : v) x /= mx;
  res.weights = std::move(v);
  return res;
}

// Weight schemes: uniform (all 1), degree (max(d_i, 1)), spectral (leading
// eigenvector of the 2-hop ball sum operator), custom (caller-provided).
inline WeightVector make_weights(const Graph& g, const std::string& scheme,
                                 const WeightVector& custom = {}) {
  if (scheme == "uniform") return WeightVector(g.n, 1.0);
  if (scheme == "degree") {
    WeightVector w(g.n);
    for (int i = 0; i < g.n; ++i) w[i] = std::max(g.degree(i), 1);
    return w;
  }
  if (scheme == "spectral") return spectral_weights(g).weights;
  if (scheme == "custom") {
    if (static_cast<int>(custom.size()) != g.n)
      throw std::invalid_argument("make_weights: custom weights size mismatch");
    for (double w : custom)
      if (!(w > 0.0)) throw std::invalid_argument("make_weights: weights must be positive");
    return custom;
  }
  throw std::invalid_argument("make_weights: unknown scheme " + scheme);
}

// 1-hop-max clustering from already-drawn scores: node i joins the cluster of
// the score-argmax over its closed 1-hop ball, ties to the smaller node id.
inline Clustering one_hop_max_from_scores(const Graph& g, const std::vector<double>& x) {
  Clustering c;
  c.labels.resize(g.n);
  c.centers.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    int best = i;
    for (const int* j = g.nbr_begin(i); j != g.nbr_end(i); ++j)
      if (x[*j] > x[best] || (x[*j] == x[best] && *j < best)) best = *j;
    c.labels[i] = best;  // provisional label: argmax node id
  }
  for (int i = 0; i < g.n; ++i) c.centers[i] = i;
  canonicalize(c);
  return c;
}

// 3-net clustering from scores: greedily pick seeds in descending score
// order, each seed excluding its 2-hop ball from seeding; then assign every
// node to its nearest seed, ties to the smallest seed id.
inline Clustering three_net_from_scores(const Graph& g, const std::vector<double>& x) {
  const int n = g.n;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&x](int a, int b) {
    return x[a] != x[b] ? x[a] > x[b] : a < b;
  });

  std::vector<char> blocked(n, 0);
  std::vector<int> seeds;
  for (int v : order) {
    if (blocked[v]) continue;
    seeds.push_back(v);
    // mark B_2(v)
    blocked[v] = 1;
    for (const int* a = g.nbr_begin(v); a != g.nbr_end(v); ++a) {
      blocked[*a] = 1;
      for (const int* b = g.nbr_begin(*a); b != g.nbr_end(*a); ++b) blocked[*b] = 1;
    }
  }
  std::sort(seeds.begin(), seeds.end());

  // Multi-source BFS for distance to the nearest seed, then resolve each
  // node's label as the minimum seed id among its distance-(d-1) neighbors'
  // labels; inductively this yields the smallest nearest seed id.
  std::vector<int> dist(n, -1), label(n, -1);
  std::vector<int> queue;
  queue.reserve(n);
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    dist[seeds[s]] = 0;
    label[seeds[s]] = seeds[s];
    queue.push_back(seeds[s]);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int u = queue[head];
    for (const int* v = g.nbr_begin(u); v != g.nbr_end(u); ++v)
      if (dist[*v] < 0) {
        dist[*v] = dist[u] + 1;
        queue.push_back(*v);
      }
  }
  for (int u : queue) {
    if (dist[u] == 0) continue;
    int best = g.n;
    for (const int* v = g.nbr_begin(u); v != g.nbr_end(u); ++v)
      if (dist[*v] == dist[u] - 1 && label[*v] < best) best = label[*v];
    label[u] = best;
  }
  for (int i = 0; i < n; ++i)
    if (label[i] < 0)
      throw std::runtime_error("three_net: node unreachable from every seed (disconnected graph)");

  Clustering c;
  c.labels = std::move(label);
  c.centers.resize(n);
  for (int i = 0; i < n; ++i) c.centers[i] = i;
  canonicalize(c);
  return c;
}

// Draws per-node scores X_i ~ Beta(w_i, 1). If favored >= 0, that node's
// score is forced above every other (node-favored stratified draw: for
// 1-hop-max it is the global max; for 3-net it is picked first).
inline std::vector<double> draw_scores(const Graph& g, const WeightVector& w, Rng& rng,
                                       int favored = -1) {
  if (static_cast<int>(w.size()) != g.n)
    throw std::invalid_argument("draw_scores: weight vector size mismatch");
  std::vector<double> x(g.n);
  for (int i = 0; i < g.n; ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("draw_scores: weights must be positive");
    x[i] = rng.beta_w1(w[i]);
  }
  if (favored >= 0) x[favored] = 2.0;
  return x;
}

inline Clustering cluster_from_scores(const Graph& g, ClusterAlgo algo,
                                      const std::vector<double>& x) {
  return algo == ClusterAlgo::one_hop_max ? one_hop_max_from_scores(g, x)
                                          : three_net_from_scores(g, x);
}

inline Clustering one_hop_max(const Graph& g, const WeightVector& w, Rng& rng,
                              int favored = -1) {
  return one_hop_max_from_scores(g, draw_scores(g, w, rng, favored));
}

inline Clustering three_net(const Graph& g, const WeightVector& w, Rng& rng,
                            int favored = -1) {
  return three_net_from_scores(g, draw_scores(g, w, rng, favored));
}

inline Clustering sample_clustering(const Graph& g, ClusterAlgo algo, const WeightVector& w,
                                    Rng& rng, int favored = -1) {
  return cluster_from_scores(g, algo, draw_scores(g, w, rng, favored));
}

// Draws `count` independent clusterings; draw k uses child_seed(master, k),
// so results do not depend on evaluation order.
inline std::vector<Clustering> sample_many(const Graph& g, ClusterAlgo algo,
                                           const WeightVector& w, int count,
                                           std::uint64_t master_seed) {
  std::vector<Clustering> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Rng rng(child_seed(master_seed, static_cast<std::uint64_t>(k)));
    out.push_back(sample_clustering(g, algo, w, rng));
  }
  return out;
}

inline void save_clustering_csv(const Clustering& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_clustering_csv: cannot open " + path);
  out << "node,label\n";
  for (std::size_t i = 0; i < c.labels.size(); ++i) out << i << ',' << c.labels[i] << '\n';
}

inline void save_weights_csv(const WeightVector& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_weights_csv: cannot open " + path);
  out << "node,weight\n";
  char buf[64];
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", w[i]);
    out << i << ',' << buf << '\n';
  }
}

}  // namespace rgcr
