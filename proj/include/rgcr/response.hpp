#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rgcr/graph.hpp"
#include "rgcr/rng.hpp"

namespace rgcr {

struct HomophilyVector {
  std::vector<double> h;   // max |h_i| = 1
  double lambda2 = 0.0;    // second-smallest eigenvalue of D^{-1} L
  double residual = 0.0;   // max_i |(D^{-1}L h)_i - lambda2 h_i|
  int iterations = 0;
};

struct ResponseParams {
  double a = 1.0;
  double b = 0.5;
  double sigma = 0.1;
  double delta = 0.5;
  double gamma = 0.5;
};

// Homophily drift vector: eigenvector of the second-smallest eigenvalue of the
// random-walk Laplacian D^{-1}L. Power iteration runs on B = I + D^{-1}A
// (spectrum in [0,2], top eigenpair = constant vector at 2) with D-weighted
// deflation of the constant vector, so it converges to the next eigenpair.
inline HomophilyVector homophily_vector(const Graph& g, double tol = 1e-9,
                                        int max_iter = 100000) {
  if (g.n < 3 || !is_connected(g))
    throw std::invalid_argument("homophily_vector: need a connected graph with n >= 3");
  const int n = g.n;
  double dsum = 2.0 * static_cast<double>(g.m);
  std::vector<double> v(n), next(n);
  // deterministic non-constant start
  Rng start(0x5eedf00dULL);
  for (int i = 0; i < n; ++i) v[i] = start.uniform() - 0.5;

  auto deflate = [&](std::vector<double>& x) {
    double proj = 0.0;
    for (int i = 0; i < n; ++i) proj += g.degree(i) * x[i];
    proj /= dsum;
    for (double& xi : x) xi -= proj;
  };
  deflate(v);

  double nu = 0.0;  // eigenvalue of B; lambda2 = 2 - nu
  bool converged = false;
  HomophilyVector res;
  for (int it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (const int* j = g.nbr_begin(i); j != g.nbr_end(i); ++j) s += v[*j];
      next[i] = v[i] + s / g.degree(i);
    }
    deflate(next);
    double num = 0.0, den = 0.0, mx = 0.0;
    for (int i = 0; i < n; ++i) {
      num += g.degree(i) * next[i] * v[i];  // D-inner product Rayleigh quotient
      den += g.degree(i) * v[i] * v[i];
      mx = std::max(mx, std::abs(next[i]));
    }
    double nu_new = num / den;
    // stop on the actual eigen-residual ||Bv - nu v||_inf, not on eigenvalue
    // drift: the Rayleigh quotient settles long before the vector does
    double resid = 0.0;
    for (int i = 0; i < n; ++i) resid = std::max(resid, std::abs(next[i] - nu_new * v[i]));
    for (int i = 0; i < n; ++i) v[i] = next[i] / mx;
    res.iterations = it;
    nu = nu_new;
    if (resid / mx <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("homophily_vector: power iteration did not converge");
  res.lambda2 = 2.0 - nu;

  // sign convention: first entry with |h| > 1e-9 is positive
  double sign = 1.0;
  for (int i = 0; i < n; ++i)
    if (std::abs(v[i]) > 1e-9) {
      sign = v[i] > 0 ? 1.0 : -1.0;
      break;
    }
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  for (double& x : v) x = sign * x / mx;

  double resid = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (const int* j = g.nbr_begin(i); j != g.nbr_end(i); ++j) s += v[*j];
    double lhs = v[i] - s / g.degree(i);  // (D^{-1} L h)_i
    resid = std::max(resid, std::abs(lhs - res.lambda2 * v[i]));
  }
  res.residual = resid;
  res.h = std::move(v);
  return res;
}

struct BaselineResult {
  std::vector<double> y0;
  bool has_isolated = false;  // isolated nodes get Y=0 and are excluded from mean degree
};

// Y_i(0) = (a + b h_i + sigma eps_i) d_i / dbar, eps iid standard normal.
inline BaselineResult baseline_outcomes(const Graph& g, const std::vector<double>& h,
                                        const ResponseParams& params, std::uint64_t seed) {
  if (static_cast<int>(h.size()) != g.n)
    throw std::invalid_argument("baseline_outcomes: h size mismatch");
  if (params.sigma < 0) throw std::invalid_argument("baseline_outcomes: sigma < 0");
  BaselineResult r;
  r.y0.assign(g.n, 0.0);
  long long dsum = 0;
  int active = 0;
  for (int i = 0; i < g.n; ++i) {
    if (g.degree(i) == 0) r.has_isolated = true;
    else {
      dsum += g.degree(i);
      ++active;
    }
  }
  if (active == 0) return r;
  double dbar = static_cast<double>(dsum) / active;
  Rng rng(seed);
  for (int i = 0; i < g.n; ++i) {
    double eps = rng.normal();  // drawn for every node so indexing is stable
    if (g.degree(i) == 0) continue;
    r.y0[i] = (params.a + params.b * h[i] + params.sigma * eps) * g.degree(i) / dbar;
  }
  return r;
}

// Y_i(z) = Y_i(0) (1 + delta z_i + gamma (sum of z over neighbors) / d_i).
inline std::vector<double> respond(const Graph& g, const std::vector<double>& y0,
                                   const std::vector<std::uint8_t>& z, double delta,
                                   double gamma) {
  if (static_cast<int>(y0.size()) != g.n || static_cast<int>(z.size()) != g.n)
    throw std::invalid_argument("respond: length mismatch");
  std::vector<double> y(g.n);
  for (int i = 0; i < g.n; ++i) {
    double zsum = 0.0;
    for (const int* j = g.nbr_begin(i); j != g.nbr_end(i); ++j) zsum += z[*j];
    double spill = g.degree(i) > 0 ? gamma * zsum / g.degree(i) : 0.0;
    y[i] = y0[i] * (1.0 + delta * z[i] + spill);
  }
  return y;
}

struct TrueGate {
  double tau = 0.0;
  std::vector<double> tau_i;
};

// tau_i = (delta + gamma) Y_i(0); tau = mean(tau_i).
inline TrueGate true_gate(const std::vector<double>& y0, double delta, double gamma) {
  TrueGate t;
  t.tau_i.resize(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) {
    t.tau_i[i] = (delta + gamma) * y0[i];
    t.tau += t.tau_i[i];
  }
  if (!y0.empty()) t.tau /= static_cast<double>(y0.size());
  return t;
}

// Closed-form cycle homophily h_i = sin(2 pi i / n), normalized so
// max |h| = 1 (exact already when 4 divides n).
inline std::vector<double> ring_homophily(int n) {
  if (n < 3) throw std::invalid_argument("ring_homophily: n < 3");
  std::vector<double> h(n);
  double mx = 0.0;
  for (int i = 0; i < n; ++i) {
    h[i] = std::sin(2.0 * M_PI * i / n);
    mx = std::max(mx, std::abs(h[i]));
  }
  for (double& x : h) x /= mx;
  return h;
}

inline void save_homophily_csv(const std::vector<double>& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_homophily_csv: cannot open " + path);
  out << "node,h\n";
  char buf[64];
  for (std::size_t i = 0; i < h.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", h[i]);
    out << i << ',' << buf << '\n';
  }
}

}  // namespace rgcr
