#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kerneldyn {

// Orthonormal Hermite polynomials for the standard Gaussian weight:
// probabilists' Hermite polynomials scaled by 1/sqrt(k!), so that
// E[he_j(X) he_k(X)] = delta_jk for X ~ N(0,1).
//
// Three-term recurrence (the 1/sqrt(k!) scaling folded in, so no factorial
// is ever formed -- k! would overflow double at k = 171):
//   he_0(x) = 1,  he_1(x) = x,
//   he_{k+1}(x) = (x*he_k(x) - sqrt(k)*he_{k-1}(x)) / sqrt(k+1).
// Derivative identity: he_k'(x) = sqrt(k) * he_{k-1}(x).
// Stable for k <= 200, |x| <= 15 (values stay far below double overflow).

/// Fill out[0..K] with he_0(x) .. he_K(x).
inline void he_fill(int K, double x, double* out) {
  out[0] = 1.0;
  if (K == 0) return;
  out[1] = x;
  for (int k = 1; k < K; ++k) {
    out[k + 1] = (x * out[k] - std::sqrt(double(k)) * out[k - 1]) / std::sqrt(double(k + 1));
  }
}

inline std::vector<double> he_all(int K, double x) {
  if (K < 0) throw std::invalid_argument("he_all: negative degree");
  std::vector<double> out(size_t(K) + 1);
  he_fill(K, x, out.data());
  return out;
}

/// Evaluate a single he_k(x).
inline double he_eval(int k, double x) {
  if (k < 0) throw std::invalid_argument("he_eval: negative degree");
  double prev = 1.0;  // he_0
  if (k == 0) return prev;
  double cur = x;  // he_1
  for (int j = 1; j < k; ++j) {
    double next = (x * cur - std::sqrt(double(j)) * prev) / std::sqrt(double(j + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace kerneldyn
