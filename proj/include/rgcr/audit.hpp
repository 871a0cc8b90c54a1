#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rgcr/estimators.hpp"
#include "rgcr/exact.hpp"
#include "rgcr/experiment.hpp"
#include "rgcr/exposure.hpp"
#include "rgcr/graph.hpp"
#include "rgcr/response.hpp"

namespace rgcr {

struct AuditRow {
  std::string bound;     // which theorem-level bound
  std::string instance;  // graph / algorithm / scheme descriptor
  double observed = 0;   // quantity that must respect the bound
  double bound_value = 0;
  bool pass = false;
  std::string note;
};

// deterministic G(n, p) used as an audit instance; retries until connected
inline Graph gen_gnp_connected(int n, double prob, std::uint64_t seed) {
  for (int attempt = 0;; ++attempt) {
    Rng rng(child_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(prob)) edges.emplace_back(i, j);
    Graph g = build_graph(n, std::move(edges));
    if (is_connected(g)) return g;
  }
}

namespace detail {

constexpr double kExactTol = 1e-12;  // slack for exact (enumeration) comparisons

inline void check_marginal_lower_bounds(std::vector<AuditRow>& rows, const Graph& g,
                                        const std::string& name, ClusterAlgo algo,
                                        Scheme scheme, double p, const WeightVector& w,
                                        const std::string& wname, const ProbTable& exact) {
  std::vector<double> b2w = two_hop_weight_sums(g, w);
  std::string inst = name + "/" + to_string(algo) + "/" + to_string(scheme) + "/" + wname;
  double worst_obs = 1e300, worst_bound = 0;
  bool ok = true;
  for (int i = 0; i < g.n; ++i) {
    double bound = p * w[i] / b2w[i];
    if (exact.p_treat[i] - bound < worst_obs - worst_bound) {
      worst_obs = exact.p_treat[i];
      worst_bound = bound;
    }
    if (exact.p_treat[i] < bound - kExactTol) ok = false;
    double boundc = (1.0 - p) * w[i] / b2w[i];
    if (exact.p_control[i] < boundc - kExactTol) ok = false;
  }
  rows.push_back({"prob_LB_weighted", inst, worst_obs, worst_bound, ok, "worst node shown"});
}

inline void check_improved_bound(std::vector<AuditRow>& rows, const Graph& g,
                                 const std::string& name, double p, const ProbTable& exact) {
  // 1-hop-max + independent + uniform weights only; applies to nodes with
  // |B_2(i)| - d_i >= 1/(1-p).
  std::vector<int> b2 = two_hop_ball_sizes(g);
  bool ok = true;
  bool any = false;
  double worst_obs = 0, worst_bound = 0, worst_gap = 1e300;
  for (int i = 0; i < g.n; ++i) {
    if (b2[i] - g.degree(i) < 1.0 / (1.0 - p)) continue;  // hypothesis fails: skip
    any = true;
    double bound = (1.0 / b2[i]) * p / (1.0 - p);
    if (exact.p_treat[i] - bound < worst_gap) {
      worst_gap = exact.p_treat[i] - bound;
      worst_obs = exact.p_treat[i];
      worst_bound = bound;
    }
    if (exact.p_treat[i] < bound - kExactTol) ok = false;
  }
  rows.push_back({"prob_LB_improved", name + "/one_hop_max/independent/uniform", worst_obs,
                  worst_bound, ok, any ? "worst applicable node" : "no applicable node"});
}

inline void check_variance_bounds(std::vector<AuditRow>& rows, const Graph& g,
                                  const std::string& name, Scheme scheme, double p,
                                  const ExactTables& t, double lambda_star) {
  // responses pinned to Y == 1 so Ybar = 1
  PotentialOutcomes po;
  po.y1.assign(g.n, 1.0);
  po.y0.assign(g.n, 1.0);
  double var1 = ht_variance_mu(po, t.marginals, t.pairs, Arm::treatment);
  double var_tau = ht_variance_gate(po, t.marginals, t.pairs);
  std::string inst = name + "/one_hop_max/" + to_string(scheme);

  double general = 0;
  for (int i = 0; i < g.n; ++i) {
    NodeBall b4 = ball(g, i, 4);
    general += static_cast<double>(b4.members.size()) / t.marginals.p_treat[i];
  }
  general /= static_cast<double>(g.n) * g.n;
  rows.push_back({"var_restricted_growth_general", inst, var1, general,
                  var1 <= general + kExactTol, "Ybar=1"});

  GrowthStats gs = growth_coefficient(g, 5);
  double dmax1 = g.max_degree() + 1.0;
  double kf = dmax1 * dmax1 * std::pow(gs.kappa, 4);
  double unweighted = kf / (g.n * p);
  rows.push_back({"var_restricted_growth_unweighted", inst, var1, unweighted,
                  var1 <= unweighted + kExactTol, "kappa=" + fmt(gs.kappa)});
  double gate_bound = 2.0 * kf * (1.0 / p + 1.0 / (1.0 - p)) / g.n;
  rows.push_back({"var_GATE_restricted_growth", inst, var_tau, gate_bound,
                  var_tau <= gate_bound + kExactTol, ""});
  if (lambda_star > 0) {
    double spec = lambda_star * dmax1 * std::pow(gs.kappa, 3) / (g.n * p);
    rows.push_back({"var_restricted_growth_spectral", inst + "/spectral", var1, spec,
                    var1 <= spec + kExactTol, "lambda*=" + fmt(lambda_star)});
  }
}

}  // namespace detail

// Theorem-level lower/upper bound audit on a fully enumerable graph (n <= 8).
inline std::vector<AuditRow> audit_small_graph(const Graph& g, const std::string& name,
                                               double p, std::uint64_t seed) {
  std::vector<AuditRow> rows;
  WeightVector uniform(g.n, 1.0);
  SpectralResult spec = spectral_weights(g);

  for (ClusterAlgo algo : {ClusterAlgo::one_hop_max, ClusterAlgo::three_net})
    for (Scheme scheme : {Scheme::independent, Scheme::complete}) {
      ExactTables t = exact_tables(g, algo, uniform, scheme, p);
      detail::check_marginal_lower_bounds(rows, g, name, algo, scheme, p, uniform, "uniform",
                                          t.marginals);
      if (algo == ClusterAlgo::one_hop_max && scheme == Scheme::independent)
        detail::check_improved_bound(rows, g, name, p, t.marginals);
      if (algo == ClusterAlgo::one_hop_max)
        detail::check_variance_bounds(rows, g, name, scheme, p, t,
                                      scheme == Scheme::independent ? 0.0 : 0.0);
    }

  // weighted lower bound with random positive weights
  for (int rep = 0; rep < 3; ++rep) {
    Rng rng(child_seed(seed, 100 + rep));
    WeightVector w(g.n);
    for (double& x : w) x = 0.25 + 4.0 * rng.uniform();
    for (ClusterAlgo algo : {ClusterAlgo::one_hop_max, ClusterAlgo::three_net}) {
      ExactTables t = exact_tables(g, algo, w, Scheme::independent, p);
      detail::check_marginal_lower_bounds(rows, g, name, algo, Scheme::independent, p, w,
                                          "random-w" + std::to_string(rep), t.marginals);
    }
  }

  // spectral weights: uniform lower bound p / lambda*
  {
    ExactTables t = exact_tables(g, ClusterAlgo::one_hop_max, spec.weights,
                                 Scheme::independent, p);
    double pmin = 1e300, cmin = 1e300;
    for (int i = 0; i < g.n; ++i) {
      pmin = std::min(pmin, t.marginals.p_treat[i]);
      cmin = std::min(cmin, t.marginals.p_control[i]);
    }
    rows.push_back({"prob_LB_spectral", name + "/one_hop_max/independent/spectral", pmin,
                    p / spec.eigenvalue, pmin >= p / spec.eigenvalue - detail::kExactTol, ""});
    rows.push_back({"prob_LB_spectral_control", name + "/one_hop_max/independent/spectral",
                    cmin, (1.0 - p) / spec.eigenvalue,
                    cmin >= (1.0 - p) / spec.eigenvalue - detail::kExactTol, ""});
  }

  // lambda* <= max_i |B_2(i)|
  {
    std::vector<int> b2 = two_hop_ball_sizes(g);
    double maxb2 = *std::max_element(b2.begin(), b2.end());
    rows.push_back({"lambda_star_le_max_B2", name, spec.eigenvalue, maxb2,
                    spec.eigenvalue <= maxb2 + 1e-8, ""});
  }

  // proxy variance: uniform weights minimize H_bar
  {
    double h1 = proxy_variance_ub(g, uniform, p);
    bool ok = true;
    double worst = h1;
    Rng rng(child_seed(seed, 777));
    for (int rep = 0; rep < 100; ++rep) {
      WeightVector w(g.n);
      for (double& x : w) x = 0.1 + 10.0 * rng.uniform();
      double hw = proxy_variance_ub(g, w, p);
      worst = std::max(worst, hw);
      if (hw < h1 - 1e-9) ok = false;
    }
    rows.push_back({"UniformOptimal", name, h1, worst, ok,
                    "H_bar(uniform) vs max over 100 random w"});
  }
  return rows;
}

// C12 audit using the symmetric-cycle exact enumerator (uniform 1-hop-max).
inline std::vector<AuditRow> audit_cycle12(double p) {
  std::vector<AuditRow> rows;
  const int n = 12;
  Graph g = gen_cycle(n);
  for (Scheme scheme : {Scheme::independent, Scheme::complete}) {
    CycleExactTables ct = exact_cycle_one_hop_max_tables(n, scheme, p);
    ExactTables t = cycle_tables_to_full(n, ct, scheme, p);
    detail::check_marginal_lower_bounds(rows, g, "C12", ClusterAlgo::one_hop_max, scheme, p,
                                        WeightVector(n, 1.0), "uniform", t.marginals);
    if (scheme == Scheme::independent) {
      detail::check_improved_bound(rows, g, "C12", p, t.marginals);
      // spectral weights on a cycle are uniform, so these tables double as the
      // spectral-weight tables with lambda* = 5
      rows.push_back({"prob_LB_spectral", "C12/one_hop_max/independent/spectral",
                      ct.p_treat, p / 5.0, ct.p_treat >= p / 5.0 - detail::kExactTol,
                      "spectral weights uniform on cycle"});
      // distance > 4 cross terms factorize exactly
      double worst = 0.0;
      for (int dd = 5; dd <= 6; ++dd) {
        worst = std::max(worst, std::abs(ct.joint_tt[dd] - ct.p_treat * ct.p_treat));
        worst = std::max(worst, std::abs(ct.joint_cc[dd] - ct.p_control * ct.p_control));
        worst = std::max(worst, std::abs(ct.joint_tc[dd] - ct.p_treat * ct.p_control));
      }
      rows.push_back({"joint_factorization_dist_gt4", "C12/one_hop_max/independent", worst,
                      1e-10, worst <= 1e-10, "max |joint - product| at dist 5,6"});
    }
    detail::check_variance_bounds(rows, g, "C12", scheme, p, t, 5.0);
  }
  return rows;
}

// Monte-Carlo relative error bound + convergence-rate audit.
struct McAuditResult {
  std::vector<AuditRow> rows;
  double slope = 0;  // log-log slope of mean relative std vs K
};

inline McAuditResult audit_mc_error(const Graph& g, const std::string& name,
                                    ClusterAlgo algo, double p, const std::vector<int>& Ks,
                                    int reps, std::uint64_t seed) {
  McAuditResult res;
  ClusteringDistribution dist{&g, algo, WeightVector(g.n, 1.0), "uniform"};
  std::vector<double> mean_rstd;
  for (std::size_t ki = 0; ki < Ks.size(); ++ki) {
    RelativeErrorAudit a = relative_error_audit(dist, Scheme::independent, p, Ks[ki], reps,
                                                child_seed(seed, ki));
    double rstd = 0;
    int worst_node = 0;
    double worst_excess = -1e300;
    for (int i = 0; i < g.n; ++i) {
      rstd += std::sqrt(a.mse_treat[i]);
      double excess = a.mse_treat[i] - (a.bound_treat[i] + a.slack_treat[i]);
      if (excess > worst_excess) {
        worst_excess = excess;
        worst_node = i;
      }
    }
    mean_rstd.push_back(rstd / g.n);
    res.rows.push_back({"prob_MC_var", name + "/K=" + std::to_string(Ks[ki]),
                        a.mse_treat[worst_node], a.bound_treat[worst_node],
                        a.violations == 0,
                        "violations=" + std::to_string(a.violations) + " (4-sigma slack)"});
  }
  std::vector<double> kd(Ks.begin(), Ks.end());
  res.slope = loglog_slope(kd, mean_rstd);
  res.rows.push_back({"prob_MC_rate", name, res.slope, -0.5, std::abs(res.slope + 0.5) <= 0.15,
                      "log-log slope of relative std vs K"});
  return res;
}

inline Report run_bound_audit(const ExperimentConfig& cfg) {
  Report rep;
  rep.name = "bound-audit";
  rep.config = cfg.to_json();
  rep.columns = {"bound", "instance", "observed", "bound_value", "pass", "note"};
  std::vector<AuditRow> rows;

  Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
  Graph c6 = gen_cycle(6);
  Graph g7 = gen_gnp_connected(7, 0.4, cfg.seed);
  for (auto& r : audit_small_graph(p3, "P3", cfg.p, cfg.seed)) rows.push_back(r);
  for (auto& r : audit_small_graph(c6, "C6", cfg.p, cfg.seed)) rows.push_back(r);
  for (auto& r : audit_small_graph(g7, "G7", cfg.p, cfg.seed)) rows.push_back(r);
  for (auto& r : audit_cycle12(cfg.p)) rows.push_back(r);

  Graph sw = gen_small_world(16, cfg.alpha, child_seed(cfg.seed, 0xdeadULL),
                             cfg.max_long_edges);
  McAuditResult mc = audit_mc_error(sw, "SW16", cfg.cluster_algo(), cfg.p, {8, 32}, 30,
                                    child_seed(cfg.seed, 55));
  for (auto& r : mc.rows) rows.push_back(r);

  for (const AuditRow& r : rows)
    rep.add_row({r.bound, r.instance, fmt(r.observed), fmt(r.bound_value),
                 r.pass ? "1" : "0", r.note});
  return rep;
}

}  // namespace rgcr
