#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rgcr/rng.hpp"

namespace rgcr {

// Immutable undirected simple graph with contiguous node ids 0..n-1 and
// sorted adjacency stored CSR-style.
struct Graph {
  int n = 0;
  long long m = 0;  // undirected edge count
  std::vector<int> offsets;  // size n+1
  std::vector<int> adj;      // size 2m

  int degree(int i) const { return offsets[i + 1] - offsets[i]; }

  const int* nbr_begin(int i) const { return adj.data() + offsets[i]; }
  const int* nbr_end(int i) const { return adj.data() + offsets[i + 1]; }

  double mean_degree() const { return n > 0 ? 2.0 * static_cast<double>(m) / n : 0.0; }

  int max_degree() const {
    int d = 0;
    for (int i = 0; i < n; ++i) d = std::max(d, degree(i));
    return d;
  }

  bool has_edge(int u, int v) const {
    return std::binary_search(nbr_begin(u), nbr_end(u), v);
  }

  // Stable hash of (n, sorted edge list); embedded in persisted tables so a
  // table can be matched to the graph it was computed for.
  std::uint64_t content_hash() const {
    std::uint64_t h = fnv1a64(&n, sizeof(n));
    for (int u = 0; u < n; ++u)
      for (const int* v = nbr_begin(u); v != nbr_end(u); ++v)
        if (u < *v) {
          h = fnv1a64(&u, sizeof(u), h);
          h = fnv1a64(v, sizeof(*v), h);
        }
    return h;
  }
};

// Builds a graph from an edge list: drops self loops, deduplicates,
// symmetrizes, sorts adjacency.
inline Graph build_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 0) throw std::invalid_argument("build_graph: negative node count");
  std::vector<std::pair<int, int>> norm;
  norm.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::out_of_range("build_graph: endpoint outside [0, n)");
    if (u == v) continue;
    norm.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(norm.begin(), norm.end());
  norm.erase(std::unique(norm.begin(), norm.end()), norm.end());

  Graph g;
  g.n = n;
  g.m = static_cast<long long>(norm.size());
  std::vector<int> deg(n, 0);
  for (auto [u, v] : norm) {
    ++deg[u];
    ++deg[v];
  }
  g.offsets.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + deg[i];
  g.adj.resize(2 * norm.size());
  std::vector<int> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (auto [u, v] : norm) {
    g.adj[cursor[u]++] = v;
    g.adj[cursor[v]++] = u;
  }
  for (int i = 0; i < n; ++i)
    std::sort(g.adj.begin() + g.offsets[i], g.adj.begin() + g.offsets[i + 1]);
  return g;
}

// Reads a whitespace-separated edge list ("u v" per line, '#' comments).
// Node ids are remapped to 0..n-1 in order of first appearance.
inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_edge_list: cannot open " + path);
  std::vector<std::pair<int, int>> edges;
  std::vector<long long> raw_ids;
  std::unordered_map<long long, int> remap;
  auto id_of = [&](long long raw) {
    auto it = remap.find(raw);
    if (it != remap.end()) return it->second;
    int id = static_cast<int>(remap.size());
    remap.emplace(raw, id);
    return id;
  };
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u)) continue;  // blank or comment-only line
    if (!(ls >> v)) throw std::runtime_error("load_edge_list: malformed line: " + line);
    int uid = id_of(u);  // named to fix evaluation order: u remaps first
    int vid = id_of(v);
    edges.emplace_back(uid, vid);
    raw_ids.push_back(u);
    raw_ids.push_back(v);
  }
  if (edges.empty()) throw std::runtime_error("load_edge_list: no edges in " + path);
  int n = static_cast<int>(remap.size());
  // Files already on contiguous ids 0..n-1 keep them, so save/load round-trips;
  // anything else gets first-appearance ids.
  bool dense = true;
  for (long long r : raw_ids)
    if (r < 0 || r >= n) { dense = false; break; }
  if (dense) {
    edges.clear();
    for (std::size_t t = 0; t + 1 < raw_ids.size(); t += 2)
      edges.emplace_back(static_cast<int>(raw_ids[t]), static_cast<int>(raw_ids[t + 1]));
  }
  return build_graph(n, std::move(edges));
}

// Writes "u v" lines with u < v, sorted; the inverse of load_edge_list for
// graphs already on contiguous ids.
inline void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_edge_list: cannot open " + path);
  for (int u = 0; u < g.n; ++u)
    for (const int* v = g.nbr_begin(u); v != g.nbr_end(u); ++v)
      if (u < *v) out << u << ' ' << *v << '\n';
}

inline Graph gen_cycle(int n) {
  if (n < 3) throw std::invalid_argument("gen_cycle: need n >= 3");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(n);
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return build_graph(n, std::move(edges));
}

// BFS distances from src, truncated at max_dist (remaining entries = -1).
inline std::vector<int> bfs_distances(const Graph& g, int src,
                                      int max_dist = std::numeric_limits<int>::max()) {
  std::vector<int> dist(g.n, -1);
  std::deque<int> q;
  dist[src] = 0;
  q.push_back(src);
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    if (dist[u] == max_dist) continue;
    for (const int* v = g.nbr_begin(u); v != g.nbr_end(u); ++v)
      if (dist[*v] < 0) {
        dist[*v] = dist[u] + 1;
        q.push_back(*v);
      }
  }
  return dist;
}

struct NodeBall {
  int center = 0;
  int radius = 0;
  std::vector<int> members;  // sorted, includes center
};

// B_r(i): all nodes within hop distance r of i.
inline NodeBall ball(const Graph& g, int i, int r) {
  if (i < 0 || i >= g.n) throw std::out_of_range("ball: node out of range");
  if (r < 0) throw std::invalid_argument("ball: negative radius");
  NodeBall b;
  b.center = i;
  b.radius = r;
  std::vector<int> dist = bfs_distances(g, i, r);
  for (int v = 0; v < g.n; ++v)
    if (dist[v] >= 0) b.members.push_back(v);
  return b;
}

inline bool is_connected(const Graph& g) {
  if (g.n == 0) return true;
  std::vector<int> dist = bfs_distances(g, 0);
  for (int v = 0; v < g.n; ++v)
    if (dist[v] < 0) return false;
  return true;
}

struct GrowthStats {
  double kappa = 0.0;               // max over nodes and radii of |B_{r+1}|/|B_r|
  std::vector<double> max_ratio;    // per radius r = 1..r_max: max_i |B_{r+1}(i)|/|B_r(i)|
  std::vector<double> mean_ball;    // per radius r = 0..r_max+1: mean_i |B_r(i)|
};

// Empirical restricted-growth coefficient: the largest one-step ball growth
// ratio observed over all nodes for radii 1..r_max.
inline GrowthStats growth_coefficient(const Graph& g, int r_max = 5) {
  GrowthStats s;
  s.max_ratio.assign(r_max, 0.0);
  s.mean_ball.assign(r_max + 2, 0.0);
  std::vector<long long> sizes(r_max + 2, 0);
  for (int i = 0; i < g.n; ++i) {
    std::vector<int> dist = bfs_distances(g, i, r_max + 1);
    std::vector<long long> cnt(r_max + 2, 0);
    for (int v = 0; v < g.n; ++v)
      if (dist[v] >= 0) ++cnt[dist[v]];
    long long cum = 0;
    std::vector<long long> ball_size(r_max + 2);
    for (int r = 0; r <= r_max + 1; ++r) {
      cum += cnt[r];
      ball_size[r] = cum;
      sizes[r] += cum;
    }
    for (int r = 1; r <= r_max; ++r) {
      double ratio = static_cast<double>(ball_size[r + 1]) / static_cast<double>(ball_size[r]);
      s.max_ratio[r - 1] = std::max(s.max_ratio[r - 1], ratio);
    }
  }
  for (int r = 0; r <= r_max + 1; ++r)
    s.mean_ball[r] = g.n > 0 ? static_cast<double>(sizes[r]) / g.n : 0.0;
  for (double v : s.max_ratio) s.kappa = std::max(s.kappa, v);
  return s;
}

// Graph on the same nodes with edges between all pairs at distance 1 or 2.
inline Graph squared_graph(const Graph& g) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < g.n; ++i) {
    std::vector<int> dist = bfs_distances(g, i, 2);
    for (int v = 0; v < g.n; ++v)
      if (v > i && dist[v] > 0) edges.emplace_back(i, v);
  }
  return build_graph(g.n, std::move(edges));
}

// Small-world graph: a side x side torus lattice plus per-node long-range
// edges. Each node draws a long-edge count k from a truncated discrete power
// law P(k) proportional to (k+1)^(-alpha) on [0, n-1]; each long edge picks
// its far endpoint with probability proportional to (wrapped L1 lattice
// distance)^(-2). Duplicate edges are redrawn.
inline Graph gen_small_world(int side, double alpha, std::uint64_t seed,
                             int max_long_edges = -1) {
  if (side < 3) throw std::invalid_argument("gen_small_world: need side >= 3");
  const int n = side * side;
  if (max_long_edges < 0) max_long_edges = n - 1;
  std::vector<std::pair<int, int>> edges;
  auto node = [side](int x, int y) {
    return ((x % side + side) % side) * side + ((y % side + side) % side);
  };
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y) {
      edges.emplace_back(node(x, y), node(x + 1, y));
      edges.emplace_back(node(x, y), node(x, y + 1));
    }

  // CDF of the long-edge count distribution, truncated to [0, max_long_edges].
  std::vector<double> kcdf(static_cast<std::size_t>(max_long_edges) + 1);
  double acc = 0.0;
  for (int k = 0; k <= max_long_edges; ++k) {
    acc += std::pow(static_cast<double>(k + 1), -alpha);
    kcdf[k] = acc;
  }
  for (double& c : kcdf) c /= acc;

  // Offsets grouped by wrapped L1 distance, and the distance-class CDF with
  // weight count(d) * d^(-2).
  int dmax = 2 * (side / 2);
  std::vector<std::vector<std::pair<int, int>>> offsets_by_dist(dmax + 1);
  for (int dx = 0; dx < side; ++dx)
    for (int dy = 0; dy < side; ++dy) {
      if (dx == 0 && dy == 0) continue;
      int d = std::min(dx, side - dx) + std::min(dy, side - dy);
      offsets_by_dist[d].emplace_back(dx, dy);
    }
  // Distance 1 is excluded: those pairs are already lattice edges.
  std::vector<double> dcdf(dmax + 1, 0.0);
  acc = 0.0;
  for (int d = 2; d <= dmax; ++d) {
    acc += offsets_by_dist[d].size() / static_cast<double>(d) / d;
    dcdf[d] = acc;
  }
  for (double& c : dcdf) c /= acc;

  Rng rng(seed);
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y) {
      int u = node(x, y);
      double uk = rng.uniform();
      int k = static_cast<int>(std::lower_bound(kcdf.begin(), kcdf.end(), uk) - kcdf.begin());
      for (int e = 0; e < k; ++e) {
        // redraw on duplicates, bounded so pathological nodes cannot loop forever
        for (int attempt = 0; attempt < 64; ++attempt) {
          double ud = rng.uniform();
          int d = static_cast<int>(std::lower_bound(dcdf.begin() + 2, dcdf.end(), ud) -
                                   dcdf.begin());
          const auto& cls = offsets_by_dist[d];
          auto [dx, dy] = cls[rng.below(cls.size())];
          int v = node(x + dx, y + dy);
          std::pair<int, int> cand{std::min(u, v), std::max(u, v)};
          if (std::find(edges.begin() + 2 * n, edges.end(), cand) == edges.end()) {
            edges.push_back(cand);
            break;
          }
        }
      }
    }
  return build_graph(n, std::move(edges));
}

}  // namespace rgcr
