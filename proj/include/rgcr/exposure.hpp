#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rgcr/clustering.hpp"
#include "rgcr/graph.hpp"
#include "rgcr/randomization.hpp"
#include "rgcr/rng.hpp"

namespace rgcr {

// Clustering distribution 𝒫: algorithm + node weights over a fixed graph.
struct ClusteringDistribution {
  const Graph* g = nullptr;
  ClusterAlgo algo = ClusterAlgo::one_hop_max;
  WeightVector weights;
  std::string weight_scheme = "uniform";  // descriptive, for table metadata
};

struct TableMeta {
  std::uint64_t graph_hash = 0;
  int n = 0;
  std::string algo;
  std::string weight_scheme;
  std::string scheme;
  double p = 0.5;
  int sample_count = 0;
  std::uint64_t seed = 0;
  bool stratified = false;
  int cutoff = -1;  // pairwise distance cutoff; -1 = all pairs / not applicable
};

struct ProbTable {
  std::vector<double> p_treat;
  std::vector<double> p_control;
  TableMeta meta;

  double prob(int i, Arm arm) const {
    return arm == Arm::treatment ? p_treat[i] : p_control[i];
  }
};

// Sparse joint exposure probabilities for pairs within graph distance <= cutoff
// plus the diagonal. Symmetric under (i,j) swap with arms swapped; lookups for
// absent pairs return the independent product convention via has()/get().
struct PairProbTable {
  int n = 0;
  int cutoff = -1;
  std::unordered_map<std::uint64_t, double> probs;
  TableMeta meta;

  static std::uint64_t key(int n, int i, int j, Arm ai, Arm aj) {
    if (i > j) {
      std::swap(i, j);
      std::swap(ai, aj);
    }
    return (static_cast<std::uint64_t>(i) * n + j) * 4 +
           static_cast<std::uint64_t>(ai) * 2 + static_cast<std::uint64_t>(aj);
  }

  void set(int i, int j, Arm ai, Arm aj, double v) { probs[key(n, i, j, ai, aj)] = v; }

  bool has(int i, int j, Arm ai, Arm aj) const {
    return probs.count(key(n, i, j, ai, aj)) > 0;
  }

  double get(int i, int j, Arm ai, Arm aj) const {
    auto it = probs.find(key(n, i, j, ai, aj));
    if (it == probs.end())
      throw std::out_of_range("PairProbTable::get: pair not in table");
    return it->second;
  }
};

// Sum of weights over the closed 2-hop ball of each node.
inline std::vector<double> two_hop_weight_sums(const Graph& g, const WeightVector& w) {
  std::vector<double> s(g.n);
  std::vector<int> mark(g.n, -1);
  for (int i = 0; i < g.n; ++i) {
    double acc = w[i];
    mark[i] = i;
    for (const int* a = g.nbr_begin(i); a != g.nbr_end(i); ++a) {
      if (mark[*a] != i) {
        mark[*a] = i;
        acc += w[*a];
      }
      for (const int* b = g.nbr_begin(*a); b != g.nbr_end(*a); ++b)
        if (mark[*b] != i) {
          mark[*b] = i;
          acc += w[*b];
        }
    }
    s[i] = acc;
    // reset not needed: mark stores the owning node id
  }
  return s;
}

inline std::vector<int> two_hop_ball_sizes(const Graph& g) {
  WeightVector ones(g.n, 1.0);
  std::vector<double> s = two_hop_weight_sums(g, ones);
  std::vector<int> out(g.n);
  for (int i = 0; i < g.n; ++i) out[i] = static_cast<int>(std::lround(s[i]));
  return out;
}

namespace detail {

inline TableMeta make_meta(const ClusteringDistribution& dist, Scheme scheme, double p,
                           int K, std::uint64_t seed, bool stratified, int cutoff) {
  TableMeta m;
  m.graph_hash = dist.g->content_hash();
  m.n = dist.g->n;
  m.algo = to_string(dist.algo);
  m.weight_scheme = dist.weight_scheme;
  m.scheme = to_string(scheme);
  m.p = p;
  m.sample_count = K;
  m.seed = seed;
  m.stratified = stratified;
  m.cutoff = cutoff;
  return m;
}

// Conditional exposure probabilities for every node under one clustering.
inline void accumulate_marginals(const Graph& g, const Clustering& c, Scheme scheme,
                                 double p, double weight, std::vector<double>& pt,
                                 std::vector<double>& pc) {
  for (int i = 0; i < g.n; ++i) {
    int m = adjacent_cluster_count(g, c, i);
    if (scheme == Scheme::independent) {
      pt[i] += weight * std::pow(p, m);
      pc[i] += weight * std::pow(1.0 - p, m);
    } else {
      double q = complete_same_arm_prob(c.cluster_count, m);
      pt[i] += weight * q;
      pc[i] += weight * q;
    }
  }
}

}  // namespace detail

// Plain Monte Carlo: average exact conditional probabilities over K iid
// clustering draws. Unbiased but without a positivity guarantee.
inline ProbTable estimate_marginals_iid(const ClusteringDistribution& dist, Scheme scheme,
                                        double p, int K, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("estimate_marginals_iid: K < 1");
  const Graph& g = *dist.g;
  ProbTable t;
  t.p_treat.assign(g.n, 0.0);
  t.p_control.assign(g.n, 0.0);
  for (int k = 0; k < K; ++k) {
    Rng rng(child_seed(seed, static_cast<std::uint64_t>(k)));
    Clustering c = sample_clustering(g, dist.algo, dist.weights, rng);
    detail::accumulate_marginals(g, c, scheme, p, 1.0 / K, t.p_treat, t.p_control);
  }
  t.meta = detail::make_meta(dist, scheme, p, K, seed, false, -1);
  return t;
}

namespace detail {

// Child seed for the node-favored sample (k, j); shared by the stratified
// marginal and pairwise estimators so their sample sets coincide.
inline std::uint64_t stratified_seed(std::uint64_t seed, int n, int k, int j) {
  return child_seed(seed, static_cast<std::uint64_t>(k) * n + j);
}

}  // namespace detail

// Node-favored stratified sampling: K rounds of n samples, sample (k, j)
// forcing node j's score to the top. Every node is favored exactly K times,
// which guarantees p_treat_i >= p/n (control analog with 1-p).
inline ProbTable estimate_marginals_stratified(const ClusteringDistribution& dist,
                                               Scheme scheme, double p, int K,
                                               std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("estimate_marginals_stratified: K < 1");
  const Graph& g = *dist.g;
  double wsum = 0.0;
  for (double w : dist.weights) wsum += w;
  ProbTable t;
  t.p_treat.assign(g.n, 0.0);
  t.p_control.assign(g.n, 0.0);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < g.n; ++j) {
      Rng rng(detail::stratified_seed(seed, g.n, k, j));
      Clustering c = sample_clustering(g, dist.algo, dist.weights, rng, j);
      double weight = dist.weights[j] / (K * wsum);
      detail::accumulate_marginals(g, c, scheme, p, weight, t.p_treat, t.p_control);
    }
  t.meta = detail::make_meta(dist, scheme, p, K, seed, true, -1);
  return t;
}

// Sorted list of unordered pairs (i < j) within graph distance <= cutoff.
inline std::vector<std::pair<int, int>> pairs_within(const Graph& g, int cutoff) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < g.n; ++i) {
    std::vector<int> dist = bfs_distances(g, i, cutoff);
    for (int j = i + 1; j < g.n; ++j)
      if (dist[j] > 0) pairs.emplace_back(i, j);
  }
  return pairs;
}

inline int default_pair_cutoff(ClusterAlgo algo, int n) {
  if (algo == ClusterAlgo::one_hop_max) return 4;
  return n <= 5000 ? std::numeric_limits<int>::max() : 4;
}

// Joint exposure probabilities over the same stratified sample set as
// estimate_marginals_stratified(dist, scheme, p, K, seed); the diagonal holds
// that marginal table.
inline PairProbTable estimate_pairwise(const ClusteringDistribution& dist, Scheme scheme,
                                       double p, int K, int cutoff, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("estimate_pairwise: K < 1");
  if (cutoff < 0) throw std::invalid_argument("estimate_pairwise: cutoff < 0");
  const Graph& g = *dist.g;
  std::vector<std::pair<int, int>> pairs = pairs_within(g, cutoff);
  double wsum = 0.0;
  for (double w : dist.weights) wsum += w;

  PairProbTable t;
  t.n = g.n;
  t.cutoff = cutoff;
  for (auto [i, j] : pairs)
    for (int ai = 0; ai < 2; ++ai)
      for (int aj = 0; aj < 2; ++aj)
        t.set(i, j, static_cast<Arm>(ai), static_cast<Arm>(aj), 0.0);
  std::vector<double> diag_t(g.n, 0.0), diag_c(g.n, 0.0);

  for (int k = 0; k < K; ++k)
    for (int j = 0; j < g.n; ++j) {
      Rng rng(detail::stratified_seed(seed, g.n, k, j));
      Clustering c = sample_clustering(g, dist.algo, dist.weights, rng, j);
      double weight = dist.weights[j] / (K * wsum);
      detail::accumulate_marginals(g, c, scheme, p, weight, diag_t, diag_c);
      for (auto [u, v] : pairs)
        for (int ai = 0; ai < 2; ++ai)
          for (int aj = 0; aj < 2; ++aj) {
            double jp = joint_exposure_prob_given_clustering(
                g, c, u, static_cast<Arm>(ai), v, static_cast<Arm>(aj), scheme, p);
            t.probs[PairProbTable::key(g.n, u, v, static_cast<Arm>(ai),
                                       static_cast<Arm>(aj))] += weight * jp;
          }
    }
  for (int i = 0; i < g.n; ++i) {
    t.set(i, i, Arm::treatment, Arm::treatment, diag_t[i]);
    t.set(i, i, Arm::control, Arm::control, diag_c[i]);
  }
  t.meta = detail::make_meta(dist, scheme, p, K, seed, true, cutoff);
  t.meta.cutoff = cutoff;
  return t;
}

// ---- Monte Carlo relative-error audit ---------------------------------------

struct RelativeErrorAudit {
  std::vector<double> mse_treat;    // empirical MSE of relative error, per node
  std::vector<double> mse_control;
  std::vector<double> bound_treat;  // (sum of w over B_2(i)) / (w_i K p)
  std::vector<double> bound_control;
  std::vector<double> slack_treat;   // 4 sigma of the empirical MSE
  std::vector<double> slack_control;
  int violations = 0;  // nodes whose MSE exceeds bound + slack
};

// Repeats plain-iid estimation and checks the per-node MSE of the relative
// error against the theoretical bound. The unknown true probability is
// replaced by the across-reps mean, which only shrinks the empirical MSE.
inline RelativeErrorAudit relative_error_audit(const ClusteringDistribution& dist,
                                               Scheme scheme, double p, int K, int reps,
                                               std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("relative_error_audit: reps < 2");
  const Graph& g = *dist.g;
  std::vector<ProbTable> tables;
  tables.reserve(reps);
  for (int r = 0; r < reps; ++r)
    tables.push_back(estimate_marginals_iid(dist, scheme, p, K,
                                            child_seed(seed, static_cast<std::uint64_t>(r))));
  std::vector<double> b2w = two_hop_weight_sums(g, dist.weights);

  RelativeErrorAudit a;
  a.mse_treat.assign(g.n, 0.0);
  a.mse_control.assign(g.n, 0.0);
  a.bound_treat.assign(g.n, 0.0);
  a.bound_control.assign(g.n, 0.0);
  a.slack_treat.assign(g.n, 0.0);
  a.slack_control.assign(g.n, 0.0);
  for (int i = 0; i < g.n; ++i) {
    for (int arm = 0; arm < 2; ++arm) {
      double mean = 0.0;
      for (const ProbTable& t : tables)
        mean += (arm ? t.p_treat[i] : t.p_control[i]);
      mean /= reps;
      double mse = 0.0, m2 = 0.0;
      for (const ProbTable& t : tables) {
        double rel = ((arm ? t.p_treat[i] : t.p_control[i]) - mean) / mean;
        double sq = rel * rel;
        mse += sq;
        m2 += sq * sq;
      }
      mse /= reps;
      double var_of_sq = std::max(0.0, m2 / reps - mse * mse);
      double slack = 4.0 * std::sqrt(var_of_sq / reps);
      double arm_p = arm ? p : 1.0 - p;
      double bound = b2w[i] / (dist.weights[i] * K * arm_p);
      if (arm) {
        a.mse_treat[i] = mse;
        a.bound_treat[i] = bound;
        a.slack_treat[i] = slack;
      } else {
        a.mse_control[i] = mse;
        a.bound_control[i] = bound;
        a.slack_control[i] = slack;
      }
      if (mse > bound + slack) ++a.violations;
    }
  }
  return a;
}

// ---- Table persistence -------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string meta_header(const TableMeta& m, const std::string& kind) {
  std::ostringstream h;
  h << "# rgcr-table v1\n"
    << "kind=" << kind << '\n'
    << "graph_hash=" << m.graph_hash << '\n'
    << "n=" << m.n << '\n'
    << "algo=" << m.algo << '\n'
    << "weights=" << m.weight_scheme << '\n'
    << "scheme=" << m.scheme << '\n'
    << "p=" << fmt_double(m.p) << '\n'
    << "K=" << m.sample_count << '\n'
    << "seed=" << m.seed << '\n'
    << "stratified=" << (m.stratified ? 1 : 0) << '\n'
    << "cutoff=" << m.cutoff << '\n';
  return h.str();
}

inline std::unordered_map<std::string, std::string> parse_header(std::istream& in,
                                                                 std::string& first_line) {
  std::unordered_map<std::string, std::string> kv;
  std::string line;
  if (!std::getline(in, line) || line != "# rgcr-table v1")
    throw std::runtime_error("table load: schema mismatch (bad magic line)");
  while (std::getline(in, line)) {
    if (line == "---") break;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("table load: schema mismatch (bad header line)");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!std::getline(in, first_line))
    throw std::runtime_error("table load: schema mismatch (missing body)");
  return kv;
}

inline TableMeta meta_from_kv(const std::unordered_map<std::string, std::string>& kv) {
  TableMeta m;
  m.graph_hash = std::stoull(kv.at("graph_hash"));
  m.n = std::stoi(kv.at("n"));
  m.algo = kv.at("algo");
  m.weight_scheme = kv.at("weights");
  m.scheme = kv.at("scheme");
  m.p = std::stod(kv.at("p"));
  m.sample_count = std::stoi(kv.at("K"));
  m.seed = std::stoull(kv.at("seed"));
  m.stratified = kv.at("stratified") == "1";
  m.cutoff = std::stoi(kv.at("cutoff"));
  return m;
}

inline void write_table_file(const std::string& path, const std::string& header,
                             const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("persist_table: cannot open " + path);
  out << header << "body_checksum=" << fnv1a64(body.data(), body.size()) << "\n---\n"
      << body;
}

}  // namespace detail

inline void persist_table(const ProbTable& t, const std::string& path) {
  std::ostringstream body;
  body << "node,p_treat,p_control\n";
  for (int i = 0; i < t.meta.n; ++i)
    body << i << ',' << detail::fmt_double(t.p_treat[i]) << ','
         << detail::fmt_double(t.p_control[i]) << '\n';
  detail::write_table_file(path, detail::meta_header(t.meta, "marginal"), body.str());
}

inline void persist_table(const PairProbTable& t, const std::string& path) {
  std::ostringstream body;
  body << "i,j,arm_i,arm_j,prob\n";
  // deterministic row order: ascending key
  std::vector<std::uint64_t> keys;
  keys.reserve(t.probs.size());
  for (const auto& [k, v] : t.probs) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (std::uint64_t k : keys) {
    int arm_bits = static_cast<int>(k & 3);
    std::uint64_t pairix = k >> 2;
    int i = static_cast<int>(pairix / t.n), j = static_cast<int>(pairix % t.n);
    body << i << ',' << j << ',' << (arm_bits >> 1) << ',' << (arm_bits & 1) << ','
         << detail::fmt_double(t.probs.at(k)) << '\n';
  }
  detail::write_table_file(path, detail::meta_header(t.meta, "pairwise"), body.str());
}

namespace detail {

inline std::string read_body_and_check(std::istream& in, std::string first_body_line,
                                       const std::string& checksum_str) {
  std::string body = first_body_line + "\n";
  std::string line;
  while (std::getline(in, line)) body += line + "\n";
  if (std::to_string(fnv1a64(body.data(), body.size())) != checksum_str)
    throw std::runtime_error("table load: checksum failure");
  return body;
}

}  // namespace detail

inline ProbTable load_prob_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_table: cannot open " + path);
  std::string first;
  auto kv = detail::parse_header(in, first);
  if (kv.at("kind") != "marginal")
    throw std::runtime_error("load_table: marginal table required, got " + kv.at("kind"));
  std::string body = detail::read_body_and_check(in, first, kv.at("body_checksum"));
  ProbTable t;
  t.meta = detail::meta_from_kv(kv);
  t.p_treat.assign(t.meta.n, 0.0);
  t.p_control.assign(t.meta.n, 0.0);
  std::istringstream bs(body);
  std::string line;
  std::getline(bs, line);  // column header
  while (std::getline(bs, line)) {
    if (line.empty()) continue;
    int i;
    double pt, pc;
    if (std::sscanf(line.c_str(), "%d,%lg,%lg", &i, &pt, &pc) != 3)
      throw std::runtime_error("load_table: schema mismatch (bad row: " + line + ")");
    t.p_treat.at(i) = pt;
    t.p_control.at(i) = pc;
  }
  return t;
}

inline PairProbTable load_pair_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_table: cannot open " + path);
  std::string first;
  auto kv = detail::parse_header(in, first);
  if (kv.at("kind") != "pairwise")
    throw std::runtime_error("load_table: pairwise table required, got " + kv.at("kind"));
  std::string body = detail::read_body_and_check(in, first, kv.at("body_checksum"));
  PairProbTable t;
  t.meta = detail::meta_from_kv(kv);
  t.n = t.meta.n;
  t.cutoff = t.meta.cutoff;
  std::istringstream bs(body);
  std::string line;
  std::getline(bs, line);
  while (std::getline(bs, line)) {
    if (line.empty()) continue;
    int i, j, ai, aj;
    double v;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lg", &i, &j, &ai, &aj, &v) != 5)
      throw std::runtime_error("load_table: schema mismatch (bad row: " + line + ")");
    t.set(i, j, static_cast<Arm>(ai), static_cast<Arm>(aj), v);
  }
  return t;
}

}  // namespace rgcr
