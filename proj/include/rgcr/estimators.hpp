#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rgcr/exposure.hpp"
#include "rgcr/graph.hpp"
#include "rgcr/randomization.hpp"

namespace rgcr {

using OutcomeVector = std::vector<double>;

struct PotentialOutcomes {
  OutcomeVector y1;  // response under global treatment
  OutcomeVector y0;  // response under global control
};

struct EstimateReport {
  double mu1_ht = 0.0, mu0_ht = 0.0, tau_ht = 0.0;
  double mu1_hajek = 0.0, mu0_hajek = 0.0, tau_hajek = 0.0;
  int exposed_treat = 0, exposed_control = 0;
  bool hajek1_degenerate = false, hajek0_degenerate = false;
};

inline int count_exposed(const Graph& g, const Assignment& a, Arm arm) {
  int c = 0;
  for (int i = 0; i < g.n; ++i)
    if (is_exposed(g, a, i, arm)) ++c;
  return c;
}

// Horvitz-Thompson estimator of the mean outcome under `arm`:
// (1/n) sum_i 1[exposed] Y_i / P_i.
inline double ht_mean(const Graph& g, const Assignment& a, const OutcomeVector& y,
                      const ProbTable& table, Arm arm) {
  double s = 0.0;
  for (int i = 0; i < g.n; ++i) {
    if (!is_exposed(g, a, i, arm)) continue;
    double pi = table.prob(i, arm);
    if (!(pi > 0.0))
      throw std::runtime_error("ht_mean: exposed node with zero exposure probability");
    s += y[i] / pi;
  }
  return s / g.n;
}

// Hajek (self-normalized) estimator: a convex combination of exposed
// responses. With no exposed node it is undefined; by convention we return 0
// and set *degenerate.
inline double hajek_mean(const Graph& g, const Assignment& a, const OutcomeVector& y,
                         const ProbTable& table, Arm arm, bool* degenerate = nullptr) {
  double num = 0.0, den = 0.0;
  bool any = false;
  for (int i = 0; i < g.n; ++i) {
    if (!is_exposed(g, a, i, arm)) continue;
    double pi = table.prob(i, arm);
    if (!(pi > 0.0))
      throw std::runtime_error("hajek_mean: exposed node with zero exposure probability");
    num += y[i] / pi;
    den += 1.0 / pi;
    any = true;
  }
  if (degenerate) *degenerate = !any;
  return any ? num / den : 0.0;
}

inline EstimateReport estimate_all(const Graph& g, const Assignment& a,
                                   const OutcomeVector& y, const ProbTable& table) {
  EstimateReport r;
  r.mu1_ht = ht_mean(g, a, y, table, Arm::treatment);
  r.mu0_ht = ht_mean(g, a, y, table, Arm::control);
  r.tau_ht = r.mu1_ht - r.mu0_ht;
  r.mu1_hajek = hajek_mean(g, a, y, table, Arm::treatment, &r.hajek1_degenerate);
  r.mu0_hajek = hajek_mean(g, a, y, table, Arm::control, &r.hajek0_degenerate);
  r.tau_hajek = r.mu1_hajek - r.mu0_hajek;
  r.exposed_treat = count_exposed(g, a, Arm::treatment);
  r.exposed_control = count_exposed(g, a, Arm::control);
  return r;
}

inline double gate(double mu1, double mu0) { return mu1 - mu0; }

// ---- Exact HT variance from probability tables -------------------------------

enum class TruncationPolicy {
  strict,       // every pair absent from the table is an error
  independent,  // absent pairs contribute 0 (treated as P_ij = P_i P_j)
};

// Var(mu_hat(arm)) = (1/n^2) [ sum_i (1/P_i - 1) Y_i^2
//                            + sum_{i != j} (P_ij/(P_i P_j) - 1) Y_i Y_j ].
// Pairs beyond the table's distance cutoff contribute zero cross terms, which
// is exact for 1-hop-max + independent randomization beyond distance 4.
inline double ht_variance_mu(const PotentialOutcomes& po, const ProbTable& marg,
                             const PairProbTable& pair, Arm arm,
                             TruncationPolicy policy = TruncationPolicy::independent) {
  const int n = static_cast<int>(po.y1.size());
  const OutcomeVector& y = arm == Arm::treatment ? po.y1 : po.y0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double pi = marg.prob(i, arm);
    if (!(pi > 0.0)) throw std::runtime_error("ht_variance_mu: nonpositive marginal");
    total += (1.0 / pi - 1.0) * y[i] * y[i];
  }
  double cross = 0.0;
  for (const auto& [k, pij] : pair.probs) {
    int arm_bits = static_cast<int>(k & 3);
    if (arm_bits != (arm == Arm::treatment ? 3 : 0)) continue;
    std::uint64_t pairix = k >> 2;
    int i = static_cast<int>(pairix / pair.n), j = static_cast<int>(pairix % pair.n);
    if (i == j) continue;
    // stored once with i < j, term symmetric -> factor 2
    cross += 2.0 * (pij / (marg.prob(i, arm) * marg.prob(j, arm)) - 1.0) * y[i] * y[j];
  }
  if (policy == TruncationPolicy::strict) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (!pair.has(i, j, arm, arm))
          throw std::runtime_error("ht_variance_mu: pair missing under strict policy");
  }
  return (total + cross) / (static_cast<double>(n) * n);
}

// Cov(mu_hat(1), mu_hat(0)) = (1/n^2) [ sum_{i != j} (P_ij^{10}/(P_i^1 P_j^0) - 1)
//                                       Y_i(1) Y_j(0)  -  sum_i Y_i(1) Y_i(0) ].
inline double ht_covariance(const PotentialOutcomes& po, const ProbTable& marg,
                            const PairProbTable& pair,
                            TruncationPolicy policy = TruncationPolicy::independent) {
  const int n = static_cast<int>(po.y1.size());
  double cross = 0.0;
  for (const auto& [k, pij] : pair.probs) {
    int arm_bits = static_cast<int>(k & 3);
    if (arm_bits != 1 && arm_bits != 2) continue;  // want mixed arms
    std::uint64_t pairix = k >> 2;
    int i = static_cast<int>(pairix / pair.n), j = static_cast<int>(pairix % pair.n);
    if (i == j) continue;
    // arm_bits == 2: (i treated, j control); arm_bits == 1: (i control, j treated),
    // i.e. the ordered pair (j treated, i control).
    int ti = arm_bits == 2 ? i : j;
    int cj = arm_bits == 2 ? j : i;
    cross += (pij / (marg.prob(ti, Arm::treatment) * marg.prob(cj, Arm::control)) - 1.0) *
             po.y1[ti] * po.y0[cj];
  }
  double diag = 0.0;
  for (int i = 0; i < n; ++i) diag += po.y1[i] * po.y0[i];
  if (policy == TruncationPolicy::strict) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (!pair.has(i, j, Arm::treatment, Arm::control))
          throw std::runtime_error("ht_covariance: pair missing under strict policy");
  }
  return (cross - diag) / (static_cast<double>(n) * n);
}

inline double ht_variance_gate(const PotentialOutcomes& po, const ProbTable& marg,
                               const PairProbTable& pair,
                               TruncationPolicy policy = TruncationPolicy::independent) {
  return ht_variance_mu(po, marg, pair, Arm::treatment, policy) +
         ht_variance_mu(po, marg, pair, Arm::control, policy) -
         2.0 * ht_covariance(po, marg, pair, policy);
}

// ---- Proxy variance -----------------------------------------------------------

// H = sum_i 1/P_i: the dominant variance surrogate minimized by weighting.
inline double proxy_variance(const ProbTable& table, Arm arm = Arm::treatment) {
  double h = 0.0;
  for (int i = 0; i < table.meta.n; ++i) {
    double pi = table.prob(i, arm);
    if (!(pi > 0.0)) throw std::runtime_error("proxy_variance: nonpositive probability");
    h += 1.0 / pi;
  }
  return h;
}

inline double proxy_variance(const std::vector<double>& probs) {
  double h = 0.0;
  for (double pi : probs) {
    if (!(pi > 0.0)) throw std::runtime_error("proxy_variance: nonpositive probability");
    h += 1.0 / pi;
  }
  return h;
}

// Upper bound via the weighted exposure lower bound:
// H_bar(w) = (1/p) sum_i (sum_{j in B_2(i)} w_j) / w_i.
inline double proxy_variance_ub(const Graph& g, const WeightVector& w, double p) {
  std::vector<double> b2w = two_hop_weight_sums(g, w);
  double h = 0.0;
  for (int i = 0; i < g.n; ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("proxy_variance_ub: nonpositive weight");
    h += b2w[i] / w[i];
  }
  return h / p;
}

}  // namespace rgcr
