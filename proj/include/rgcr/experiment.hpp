#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgcr/clustering.hpp"
#include "rgcr/estimators.hpp"
#include "rgcr/exact.hpp"
#include "rgcr/exposure.hpp"
#include "rgcr/graph.hpp"
#include "rgcr/randomization.hpp"
#include "rgcr/response.hpp"
#include "rgcr/rng.hpp"

namespace rgcr {

struct ExperimentConfig {
  // graph source
  std::string graph = "small_world";  // small_world | cycle | edge_list
  int side = 32;
  double alpha = 2.3;
  int max_long_edges = -1;
  int cycle_n = 400;
  std::string edge_list_path;
  // clustering
  std::string algo = "one_hop_max";
  std::string weights = "uniform";
  // randomization
  std::string scheme = "independent";
  double p = 0.5;
  // mixture experiment
  std::vector<int> mixture_sizes = {1, 10, 100, 1000};
  int replicates = 50;
  // estimator simulation
  int sims = 0;             // 0 -> 10 * n
  int gcr_clusterings = 50;
  int gcr_sims = 0;         // 0 -> max(20, sims / gcr_clusterings)
  int k_probs = 16;
  bool stratified = true;
  // ring check
  int ring_k = 4;
  double ring_a = 1.0, ring_b = 1.0, ring_tau = 1.0;
  // response model
  ResponseParams response;
  // size sweep
  std::vector<int> sides = {16, 24, 32};
  std::uint64_t seed = 1;

  ClusterAlgo cluster_algo() const {
    if (algo == "one_hop_max") return ClusterAlgo::one_hop_max;
    if (algo == "three_net") return ClusterAlgo::three_net;
    throw std::invalid_argument("config: unknown algo " + algo);
  }

  Scheme rand_scheme() const {
    if (scheme == "independent") return Scheme::independent;
    if (scheme == "complete") return Scheme::complete;
    throw std::invalid_argument("config: unknown scheme " + scheme);
  }

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("config: p outside (0,1)");
    if (scheme == "complete" && p != 0.5)
      throw std::invalid_argument("config: complete randomization requires p = 1/2");
    if (replicates < 1 || k_probs < 1 || gcr_clusterings < 1)
      throw std::invalid_argument("config: counts must be >= 1");
    cluster_algo();
    rand_scheme();
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    auto get = [&j](const char* key, auto& slot) {
      if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("graph", c.graph);
    get("side", c.side);
    get("alpha", c.alpha);
    get("max_long_edges", c.max_long_edges);
    get("cycle_n", c.cycle_n);
    get("edge_list_path", c.edge_list_path);
    get("algo", c.algo);
    get("weights", c.weights);
    get("scheme", c.scheme);
    get("p", c.p);
    get("mixture_sizes", c.mixture_sizes);
    get("replicates", c.replicates);
    get("sims", c.sims);
    get("gcr_clusterings", c.gcr_clusterings);
    get("gcr_sims", c.gcr_sims);
    get("k_probs", c.k_probs);
    get("stratified", c.stratified);
    get("ring_k", c.ring_k);
    get("ring_a", c.ring_a);
    get("ring_b", c.ring_b);
    get("ring_tau", c.ring_tau);
    get("sides", c.sides);
    get("seed", c.seed);
    if (j.contains("response")) {
      const auto& r = j.at("response");
      auto getr = [&r](const char* key, double& slot) {
        if (r.contains(key)) slot = r.at(key).get<double>();
      };
      getr("a", c.response.a);
      getr("b", c.response.b);
      getr("sigma", c.response.sigma);
      getr("delta", c.response.delta);
      getr("gamma", c.response.gamma);
    }
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["graph"] = graph;
    j["side"] = side;
    j["alpha"] = alpha;
    j["max_long_edges"] = max_long_edges;
    j["cycle_n"] = cycle_n;
    j["edge_list_path"] = edge_list_path;
    j["algo"] = algo;
    j["weights"] = weights;
    j["scheme"] = scheme;
    j["p"] = p;
    j["mixture_sizes"] = mixture_sizes;
    j["replicates"] = replicates;
    j["sims"] = sims;
    j["gcr_clusterings"] = gcr_clusterings;
    j["gcr_sims"] = gcr_sims;
    j["k_probs"] = k_probs;
    j["stratified"] = stratified;
    j["ring_k"] = ring_k;
    j["ring_a"] = ring_a;
    j["ring_b"] = ring_b;
    j["ring_tau"] = ring_tau;
    j["response"] = {{"a", response.a},
                     {"b", response.b},
                     {"sigma", response.sigma},
                     {"delta", response.delta},
                     {"gamma", response.gamma}};
    j["sides"] = sides;
    j["seed"] = seed;
    return j;
  }
};

inline Graph make_graph(const ExperimentConfig& cfg) {
  if (cfg.graph == "small_world")
    return gen_small_world(cfg.side, cfg.alpha, child_seed(cfg.seed, 0xdeadULL),
                           cfg.max_long_edges);
  if (cfg.graph == "cycle") return gen_cycle(cfg.cycle_n);
  if (cfg.graph == "edge_list") return load_edge_list(cfg.edge_list_path);
  throw std::invalid_argument("config: unknown graph source " + cfg.graph);
}

// Tabular report with the resolved config embedded; CSV and JSON writers emit
// byte-identical output for identical inputs (all numbers pre-formatted).
struct Report {
  nlohmann::json config;
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
      throw std::logic_error("Report::add_row: column count mismatch");
    rows.push_back(std::move(row));
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "# report=" << name << '\n';
    out << "# config=" << config.dump() << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
    for (const auto& row : rows)
      for (std::size_t c = 0; c < row.size(); ++c) out << row[c] << (c + 1 < row.size() ? ',' : '\n');
    return out.str();
  }

  std::string to_json_text() const {
    nlohmann::json j;
    j["report"] = name;
    j["config"] = config;
    j["columns"] = columns;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json o;
      for (std::size_t c = 0; c < columns.size(); ++c) o[columns[c]] = row[c];
      j["rows"].push_back(o);
    }
    return j.dump(2) + "\n";
  }

  void save(const std::string& path, const std::string& format) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Report::save: cannot open " + path);
    if (format == "csv") out << to_csv();
    else if (format == "json") out << to_json_text();
    else throw std::invalid_argument("Report::save: unknown format " + format);
  }
};

inline std::string fmt(double v) { return detail::fmt_double(v); }

// order-statistics quantile with linear interpolation
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty");
  std::sort(v.begin(), v.end());
  double idx = q * (v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(idx);
  if (lo + 1 >= v.size()) return v.back();
  double frac = idx - lo;
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

namespace detail {

// Response-model potential outcomes under full treatment / full control.
inline PotentialOutcomes model_outcomes(const Graph& g, const ResponseParams& params,
                                        std::uint64_t seed) {
  HomophilyVector hv = homophily_vector(g);
  BaselineResult base = baseline_outcomes(g, hv.h, params, seed);
  PotentialOutcomes po;
  po.y0 = base.y0;
  po.y1.resize(g.n);
  for (int i = 0; i < g.n; ++i)
    po.y1[i] = base.y0[i] * (1.0 + params.delta + params.gamma);
  return po;
}

}  // namespace detail

// Mixture-of-K experiment: exact Var of the HT estimators under the
// K-clustering mixture, repeated over replicates; per-K summary quantiles.
inline Report run_mixture_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Graph g = make_graph(cfg);
  WeightVector w = make_weights(g, cfg.weights);
  PotentialOutcomes po = detail::model_outcomes(g, cfg.response, child_seed(cfg.seed, 1));

  Report rep;
  rep.name = "mixture";
  rep.config = cfg.to_json();
  rep.columns = {"K", "stat", "replicate", "var_tau", "var_mu1", "var_mu0", "cov", "feasible"};
  for (int K : cfg.mixture_sizes) {
    std::vector<double> var_taus;
    for (int r = 0; r < cfg.replicates; ++r) {
      std::uint64_t s = child_seed(child_seed(cfg.seed, 2), static_cast<std::uint64_t>(r) *
                                                                1000003ull +
                                                            static_cast<std::uint64_t>(K));
      std::vector<Clustering> cs = sample_many(g, cfg.cluster_algo(), w, K, s);
      std::vector<double> mixw(K, 1.0 / K);
      try {
        MixtureVariance mv = mixture_variance(g, cs, mixw, po, cfg.rand_scheme(), cfg.p);
        var_taus.push_back(mv.var_tau);
        rep.add_row({std::to_string(K), "replicate", std::to_string(r), fmt(mv.var_tau),
                     fmt(mv.var_mu1), fmt(mv.var_mu0), fmt(mv.cov), "1"});
      } catch (const std::runtime_error&) {
        // positivity violated for this mixture (expected for K=1 + complete)
        rep.add_row({std::to_string(K), "replicate", std::to_string(r), "", "", "", "", "0"});
      }
    }
    if (!var_taus.empty()) {
      rep.add_row({std::to_string(K), "median", "", fmt(quantile(var_taus, 0.5)), "", "", "", "1"});
      rep.add_row({std::to_string(K), "q025", "", fmt(quantile(var_taus, 0.025)), "", "", "", "1"});
      rep.add_row({std::to_string(K), "q975", "", fmt(quantile(var_taus, 0.975)), "", "", "", "1"});
    } else {
      rep.add_row({std::to_string(K), "median", "", "", "", "", "", "0"});
    }
  }
  return rep;
}

namespace detail {

struct SimStats {
  double bias = 0, variance = 0, mse = 0;
  int degenerate = 0;
};

inline SimStats summarize(const std::vector<double>& draws, double truth, int degenerate) {
  SimStats s;
  double mean = 0;
  for (double x : draws) mean += x;
  mean /= draws.size();
  double var = 0;
  for (double x : draws) var += (x - mean) * (x - mean);
  var /= draws.size();
  s.bias = mean - truth;
  s.variance = var;
  s.mse = s.bias * s.bias + var;
  s.degenerate = degenerate;
  return s;
}

}  // namespace detail

// Full-pipeline simulation of RGCR and GCR designs; reports bias, variance
// and MSE of the HT and Hajek GATE estimators.
inline Report run_estimator_sim(const ExperimentConfig& cfg) {
  cfg.validate();
  Graph g = make_graph(cfg);
  WeightVector w = make_weights(g, cfg.weights);
  ClusterAlgo algo = cfg.cluster_algo();
  Scheme scheme = cfg.rand_scheme();
  PotentialOutcomes po = detail::model_outcomes(g, cfg.response, child_seed(cfg.seed, 1));
  TrueGate tg = true_gate(po.y0, cfg.response.delta, cfg.response.gamma);
  const int R = cfg.sims > 0 ? cfg.sims : 10 * g.n;
  const int gcr_sims = cfg.gcr_sims > 0 ? cfg.gcr_sims
                                        : std::max(20, R / std::max(1, cfg.gcr_clusterings));

  ClusteringDistribution dist{&g, algo, w, cfg.weights};
  ProbTable table = cfg.stratified
                        ? estimate_marginals_stratified(dist, scheme, cfg.p, cfg.k_probs,
                                                        child_seed(cfg.seed, 3))
                        : estimate_marginals_iid(dist, scheme, cfg.p,
                                                 cfg.k_probs * g.n, child_seed(cfg.seed, 3));

  Report rep;
  rep.name = "estimator-sim";
  rep.config = cfg.to_json();
  rep.columns = {"design", "estimator", "stat", "bias", "variance", "mse", "degenerate", "sims"};

  {  // RGCR: fresh clustering every assignment, distribution-level table
    std::vector<double> ht, hajek;
    int degenerate = 0;
    for (int r = 0; r < R; ++r) {
      Rng rng(child_seed(child_seed(cfg.seed, 4), static_cast<std::uint64_t>(r)));
      Clustering c = sample_clustering(g, algo, w, rng);
      Assignment a = assign(c, scheme, cfg.p, rng);
      OutcomeVector y = respond(g, po.y0, a.z, cfg.response.delta, cfg.response.gamma);
      EstimateReport er = estimate_all(g, a, y, table);
      ht.push_back(er.tau_ht);
      hajek.push_back(er.tau_hajek);
      if (er.hajek1_degenerate || er.hajek0_degenerate) ++degenerate;
    }
    detail::SimStats sht = detail::summarize(ht, tg.tau, 0);
    detail::SimStats shj = detail::summarize(hajek, tg.tau, degenerate);
    rep.add_row({"rgcr", "ht", "overall", fmt(sht.bias), fmt(sht.variance), fmt(sht.mse), "0",
                 std::to_string(R)});
    rep.add_row({"rgcr", "hajek", "overall", fmt(shj.bias), fmt(shj.variance), fmt(shj.mse),
                 std::to_string(shj.degenerate), std::to_string(R)});
  }

  {  // GCR: fixed clustering per condition, exact conditional tables
    std::vector<double> ht_bias, ht_var, ht_mse, hj_bias, hj_var, hj_mse;
    int degenerate_total = 0;
    for (int cidx = 0; cidx < cfg.gcr_clusterings; ++cidx) {
      Rng crng(child_seed(child_seed(cfg.seed, 5), static_cast<std::uint64_t>(cidx)));
      Clustering c = sample_clustering(g, algo, w, crng);
      ProbTable ctable;
      ctable.meta = table.meta;
      ctable.p_treat.resize(g.n);
      ctable.p_control.resize(g.n);
      for (int i = 0; i < g.n; ++i) {
        ctable.p_treat[i] = exposure_prob_given_clustering(g, c, i, Arm::treatment, scheme, cfg.p);
        ctable.p_control[i] = exposure_prob_given_clustering(g, c, i, Arm::control, scheme, cfg.p);
      }
      std::vector<double> ht, hajek;
      int degenerate = 0;
      for (int r = 0; r < gcr_sims; ++r) {
        Rng rng(child_seed(child_seed(child_seed(cfg.seed, 6), static_cast<std::uint64_t>(cidx)),
                           static_cast<std::uint64_t>(r)));
        Assignment a = assign(c, scheme, cfg.p, rng);
        OutcomeVector y = respond(g, po.y0, a.z, cfg.response.delta, cfg.response.gamma);
        double t1 = 0, t0 = 0;
        double h1n = 0, h1d = 0, h0n = 0, h0d = 0;
        for (int i = 0; i < g.n; ++i) {
          if (is_exposed(g, a, i, Arm::treatment) && ctable.p_treat[i] > 0) {
            t1 += y[i] / ctable.p_treat[i];
            h1n += y[i] / ctable.p_treat[i];
            h1d += 1.0 / ctable.p_treat[i];
          } else if (is_exposed(g, a, i, Arm::control) && ctable.p_control[i] > 0) {
            t0 += y[i] / ctable.p_control[i];
            h0n += y[i] / ctable.p_control[i];
            h0d += 1.0 / ctable.p_control[i];
          }
        }
        ht.push_back((t1 - t0) / g.n);
        double hj1 = h1d > 0 ? h1n / h1d : 0.0;
        double hj0 = h0d > 0 ? h0n / h0d : 0.0;
        hajek.push_back(hj1 - hj0);
        if (h1d <= 0 || h0d <= 0) ++degenerate;
      }
      detail::SimStats sht = detail::summarize(ht, tg.tau, 0);
      detail::SimStats shj = detail::summarize(hajek, tg.tau, degenerate);
      ht_bias.push_back(sht.bias);
      ht_var.push_back(sht.variance);
      ht_mse.push_back(sht.mse);
      hj_bias.push_back(shj.bias);
      hj_var.push_back(shj.variance);
      hj_mse.push_back(shj.mse);
      degenerate_total += degenerate;
    }
    rep.add_row({"gcr", "ht", "median", fmt(quantile(ht_bias, 0.5)), fmt(quantile(ht_var, 0.5)),
                 fmt(quantile(ht_mse, 0.5)), "0",
                 std::to_string(cfg.gcr_clusterings * gcr_sims)});
    rep.add_row({"gcr", "hajek", "median", fmt(quantile(hj_bias, 0.5)),
                 fmt(quantile(hj_var, 0.5)), fmt(quantile(hj_mse, 0.5)),
                 std::to_string(degenerate_total),
                 std::to_string(cfg.gcr_clusterings * gcr_sims)});
  }
  return rep;
}

// ---- Ring-network closed-form check -------------------------------------------

// Limits of Var(tau_hat) on the ring with k oracle arcs as n -> infinity.
inline double ring_variance_limit(Scheme scheme, int k, double a, double b, double tau) {
  double trig = 1.0 - std::cos(2.0 * M_PI / k);
  if (scheme == Scheme::independent)
    return (2.0 * a + tau) * (2.0 * a + tau) / k + b * b * k * trig / (M_PI * M_PI);
  return b * b * k * k * trig / (M_PI * M_PI * (k - 1));
}

struct RingCheckRow {
  int n = 0, k = 0;
  Scheme scheme = Scheme::independent;
  double exact = 0;     // exact Var(tau_hat) over rotations x assignments
  double limit = 0;     // closed-form large-n limit
  double rel_err = 0;
  double p_treat_interior = 0;  // exact marginal of an interior node
};

inline RingCheckRow ring_check(int n, int k, Scheme scheme, double a, double b, double tau) {
  if (n % k != 0) throw std::invalid_argument("ring_check: k must divide n");
  Graph g = gen_cycle(n);
  PotentialOutcomes po;
  po.y1.resize(n);
  po.y0.resize(n);
  for (int i = 0; i < n; ++i) {
    double h = std::sin(2.0 * M_PI * i / n);
    po.y0[i] = a + b * h;
    po.y1[i] = a + b * h + tau;
  }
  std::vector<Clustering> rots = ring_rotation_clusterings(n, k);
  std::vector<double> mixw(rots.size(), 1.0 / rots.size());
  MixtureVariance mv = mixture_variance(g, rots, mixw, po, scheme, 0.5);
  RingCheckRow row;
  row.n = n;
  row.k = k;
  row.scheme = scheme;
  row.exact = mv.var_tau;
  row.limit = ring_variance_limit(scheme, k, a, b, tau);
  row.rel_err = std::abs(row.exact - row.limit) / row.limit;
  double pmax = 0;
  for (double q : mv.p_treat) pmax = std::max(pmax, q);
  row.p_treat_interior = pmax;
  return row;
}

inline Report run_ring_check(const ExperimentConfig& cfg) {
  Report rep;
  rep.name = "ring-check";
  rep.config = cfg.to_json();
  rep.columns = {"n", "k", "scheme", "exact_var_tau", "limit_var_tau", "rel_err",
                 "p_treat_interior"};
  RingCheckRow r = ring_check(cfg.cycle_n, cfg.ring_k, cfg.rand_scheme(), cfg.ring_a,
                              cfg.ring_b, cfg.ring_tau);
  rep.add_row({std::to_string(r.n), std::to_string(r.k), to_string(r.scheme), fmt(r.exact),
               fmt(r.limit), fmt(r.rel_err), fmt(r.p_treat_interior)});
  return rep;
}

// ---- Size sweep -----------------------------------------------------------------

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline Report run_size_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  Report rep;
  rep.name = "size-sweep";
  rep.config = cfg.to_json();
  rep.columns = {"side", "n", "design", "estimator", "bias", "variance", "mse", "slope"};
  std::vector<double> ns;
  std::vector<double> rgcr_ht_var, rgcr_hj_var, gcr_hj_var;
  std::vector<std::vector<std::string>> pending;
  for (int side : cfg.sides) {
    ExperimentConfig sub = cfg;
    sub.graph = "small_world";
    sub.side = side;
    sub.seed = child_seed(cfg.seed, static_cast<std::uint64_t>(side));
    Report r = run_estimator_sim(sub);
    ns.push_back(static_cast<double>(side) * side);
    for (const auto& row : r.rows) {
      // columns: design, estimator, stat, bias, variance, mse, degenerate, sims
      double var = std::stod(row[4]);
      if (row[0] == "rgcr" && row[1] == "ht") rgcr_ht_var.push_back(var);
      if (row[0] == "rgcr" && row[1] == "hajek") rgcr_hj_var.push_back(var);
      if (row[0] == "gcr" && row[1] == "hajek") gcr_hj_var.push_back(var);
      pending.push_back({std::to_string(side), std::to_string(side * side), row[0], row[1],
                         row[3], row[4], row[5], ""});
    }
  }
  for (auto& row : pending) rep.add_row(std::move(row));
  rep.add_row({"", "", "rgcr", "ht", "", "", "", fmt(loglog_slope(ns, rgcr_ht_var))});
  rep.add_row({"", "", "rgcr", "hajek", "", "", "", fmt(loglog_slope(ns, rgcr_hj_var))});
  rep.add_row({"", "", "gcr", "hajek", "", "", "", fmt(loglog_slope(ns, gcr_hj_var))});
  return rep;
}

}  // namespace rgcr
