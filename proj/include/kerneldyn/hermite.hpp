#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kerneldyn/activations.hpp"
#include "kerneldyn/common.hpp"
#include "kerneldyn/gauss.hpp"
#include "kerneldyn/polynomials.hpp"

namespace kerneldyn {

inline constexpr int default_truncation = 60;
inline constexpr double tail_warning_threshold = 1e-3;

/// Truncated coefficient vector of an activation in the orthonormal Hermite
/// basis: c_k = E[f(X) he_k(X)] for k = 0..K.  For a unit-energy activation
/// the squared coefficients sum to at most 1; `tail_mass` = 1 - sum c_k^2 is
/// the energy beyond the truncation (can be a tiny negative number from
/// quadrature rounding).  `tail_warning` is set when the truncation loses
/// more than 1e-3 of the energy (diagnostic, not fatal).
struct HermiteExpansion {
  std::vector<double> coeffs;  // c_0..c_K
  int truncation = default_truncation;
  double tail_mass = 0.0;
  bool tail_warning = false;
};

/// Project a normalized activation onto he_0..he_K with the module-wide
/// quadrature rule (panels split at the activation's breakpoints).
inline HermiteExpansion expand(const Activation& act, int K = default_truncation) {
  if (K < 0 || K > 200) throw std::invalid_argument("expand: truncation must be in [0, 200]");
  gauss_grid grid = make_gauss_grid(act.breakpoints);
  HermiteExpansion ex;
  ex.truncation = K;
  ex.coeffs.assign(size_t(K) + 1, 0.0);
  std::vector<double> he(size_t(K) + 1);
  for (size_t i = 0; i < grid.x.size(); ++i) {
    he_fill(K, grid.x[i], he.data());
    const double wf = grid.w[i] * act.f(grid.x[i]);
    for (int k = 0; k <= K; ++k) ex.coeffs[k] += wf * he[k];
  }
  double energy = 0.0;
  for (double c : ex.coeffs) energy += c * c;
  ex.tail_mass = 1.0 - energy;
  ex.tail_warning = ex.tail_mass > tail_warning_threshold;
  return ex;
}

/// E[he_m(X) he_n(Y)] for a correlated standard-normal pair, computed by
/// tensor-product quadrature over X and an independent Z with
/// Y = rho*X + sqrt(1-rho^2)*Z -- an oracle independent of the closed-form
/// value rho^n * delta_mn it is tested against.
inline double mehler_product(int m, int n, double rho) {
  if (m < 0 || n < 0) throw std::invalid_argument("mehler_product: negative degree");
  if (std::abs(rho) > 1.0) throw std::domain_error("mehler_product: |rho| must be <= 1");
  return gauss_expect_pair([m](double x) { return he_eval(m, x); },
                           [n](double y) { return he_eval(n, y); }, rho);
}

}  // namespace kerneldyn
