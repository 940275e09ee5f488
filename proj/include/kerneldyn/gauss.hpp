#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "kerneldyn/common.hpp"

namespace kerneldyn {

// Gaussian-measure quadrature used for every expectation in the library:
// composite 64-point Gauss-Legendre on [-20, 20], with panels split every 4
// units plus any activation breakpoints.  The domain must cover the
// classical turning points +/- sqrt(4k+2) of the Hermite basis (15.6 at
// k = 60, where pure-mode activations still carry mass) AND the slowly
// decaying Airy region beyond them: cutting at 16 still loses 5e-3 of
// he_60's energy, while at 20 the loss is below 1e-15.  The width-4 panels
// keep the oscillations of he_k resolved far past machine precision up to
// k = 200 (at most ~9 cycles per 64-point panel).

struct gauss_rule64 {
  std::array<double, 64> x;  // nodes on [-1, 1], ascending
  std::array<double, 64> w;  // weights, sum = 2
};

/// Nodes/weights of the 64-point Gauss-Legendre rule, computed once by
/// Newton iteration on P_64 from the Chebyshev initial guess.
inline const gauss_rule64& gauss_legendre_64() {
  static const gauss_rule64 rule = [] {
    gauss_rule64 r;
    constexpr int n = 64;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        // Legendre recurrence for P_n(x) and P_{n-1}(x).
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.x[n - 1 - i] = x;  // cos guess descends; store ascending
      r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

/// Precomputed Gaussian-expectation grid: E[f(X)] ~ sum w_i f(x_i),
/// the normal density already folded into the weights.
struct gauss_grid {
  std::vector<double> x;
  std::vector<double> w;
};

inline constexpr double gauss_domain_half_width = 20.0;

/// Panel edges: -20..20 in steps of 4, plus breakpoints inside the domain.
inline std::vector<double> panel_edges(const std::vector<double>& breakpoints) {
  std::vector<double> e = {-20.0, -16.0, -12.0, -8.0, -4.0, 0.0, 4.0, 8.0, 12.0, 16.0, 20.0};
  for (double b : breakpoints) {
    if (b > -gauss_domain_half_width && b < gauss_domain_half_width) e.push_back(b);
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end(),
                      [](double a, double b) { return std::abs(a - b) < 1e-12; }),
          e.end());
  return e;
}

inline gauss_grid make_gauss_grid(const std::vector<double>& breakpoints = {}) {
  const gauss_rule64& gl = gauss_legendre_64();
  std::vector<double> edges = panel_edges(breakpoints);
  gauss_grid g;
  g.x.reserve(64 * (edges.size() - 1));
  g.w.reserve(64 * (edges.size() - 1));
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    double mid = 0.5 * (edges[p] + edges[p + 1]);
    double half = 0.5 * (edges[p + 1] - edges[p]);
    for (int i = 0; i < 64; ++i) {
      double x = mid + half * gl.x[i];
      g.x.push_back(x);
      g.w.push_back(half * gl.w[i] * normal_pdf(x));
    }
  }
  return g;
}

/// E[f(X)] over a precomputed grid (left-to-right summation, deterministic).
template <class F>
double expect(const gauss_grid& g, F&& f) {
  double s = 0.0;
  for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(g.x[i]);
  return s;
}

/// E[f(X)] for X ~ N(0,1), panels split at the given breakpoints of f.
template <class F>
double gauss_expect(F&& f, const std::vector<double>& breakpoints = {}) {
  return expect(make_gauss_grid(breakpoints), std::forward<F>(f));
}

/// E[f(X) g(Y)] for standard-normal (X, Y) with correlation rho, computed by
/// the conditional decomposition Y = rho*X + sqrt(1-rho^2)*Z with Z independent
/// of X.  The outer grid splits at f's breakpoints; the inner grid splits at
/// the X-dependent preimages (b - rho*x)/sqrt(1-rho^2) of g's breakpoints, so
/// kinks stay on panel boundaries for every outer node.  |rho| = 1 reduces to
/// a one-dimensional expectation.
template <class F, class G>
double gauss_expect_pair(F&& f, G&& g, double rho,
                         const std::vector<double>& f_breaks = {},
                         const std::vector<double>& g_breaks = {}) {
  if (std::abs(rho) >= 1.0 - 1e-12) {
    double sgn = rho >= 0.0 ? 1.0 : -1.0;
    std::vector<double> breaks = f_breaks;
    for (double b : g_breaks) breaks.push_back(sgn * b);
    return gauss_expect([&](double x) { return f(x) * g(sgn * x); }, breaks);
  }
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  gauss_grid outer = make_gauss_grid(f_breaks);
  double total = 0.0;
  if (g_breaks.empty()) {  // inner panels are then independent of the outer node
    const gauss_grid inner = make_gauss_grid();
    for (size_t i = 0; i < outer.x.size(); ++i) {
      const double x = outer.x[i];
      double ey = 0.0;
      for (size_t j = 0; j < inner.x.size(); ++j) ey += inner.w[j] * g(rho * x + s * inner.x[j]);
      total += outer.w[i] * f(x) * ey;
    }
    return total;
  }
  std::vector<double> inner_breaks(g_breaks.size());
  for (size_t i = 0; i < outer.x.size(); ++i) {
    const double x = outer.x[i];
    for (size_t j = 0; j < g_breaks.size(); ++j) inner_breaks[j] = (g_breaks[j] - rho * x) / s;
    gauss_grid inner = make_gauss_grid(inner_breaks);
    double ey = 0.0;
    for (size_t j = 0; j < inner.x.size(); ++j) ey += inner.w[j] * g(rho * x + s * inner.x[j]);
    total += outer.w[i] * f(x) * ey;
  }
  return total;
}

}  // namespace kerneldyn
