#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kerneldyn/activations.hpp"
#include "kerneldyn/common.hpp"
#include "kerneldyn/hermite.hpp"

namespace kerneldyn {

// Classification tolerances: kappa(0) is treated as zero below tol_zero;
// kappa'(1) is compared against 1 with tolerance tol_one, using the
// quadrature identity E[f'(X)^2] (exact for the true function) rather than
// the truncated series, which systematically underestimates for kinked
// activations.
inline constexpr double tol_zero = 1e-7;
inline constexpr double tol_one = 1e-3;

/// Convergence classes of the fixed-point analysis.
///   case1: kappa(0) = 0 -> rho* = 0 (orthogonality bias), exponential rate.
///   case2: kappa'(1) < 1 -> rho* = 1 (alignment), exponential rate.
///   case3: kappa'(1) = 1 -> rho* = 1, polynomial (harmonic) rate.
///   case4: kappa'(1) > 1 -> rho* in (0, 1), exponential rate.
enum class fp_case { case1, case2, case3, case4 };

inline const char* to_string(fp_case c) {
  switch (c) {
    case fp_case::case1: return "case1";
    case fp_case::case2: return "case2";
    case fp_case::case3: return "case3";
    case fp_case::case4: return "case4";
  }
  return "?";
}

/// The power series kappa(rho) = sum_k c_k^2 rho^k mapping the correlation of
/// two jointly Gaussian preactivations to the expected product of their
/// activations.  All series coefficients are nonnegative, so kappa is
/// nondecreasing and convex on [0, 1] with kappa(1) = 1 - tail_mass.
struct KernelMap {
  std::string name;
  double C = 1.0;
  std::vector<double> sq_coeffs;  // c_k^2, k = 0..K
  double kappa0 = 0.0;            // kappa(0)  = c_0^2
  double dkappa0 = 0.0;           // kappa'(0) = c_1^2
  double dkappa1_series = 0.0;    // kappa'(1) from the truncated series sum k c_k^2
  double dkappa1_quad = 0.0;      // kappa'(1) from the quadrature identity E[f'(X)^2]
  double tail_mass = 0.0;
  bool tail_warning = false;
  bool dkappa1_discrepancy = false;  // |series - quad| > tol_one
};

inline double kernel_eval(const KernelMap& km, double rho) {
  double acc = 0.0;
  for (size_t k = km.sq_coeffs.size(); k-- > 0;) acc = acc * rho + km.sq_coeffs[k];
  return acc;
}

/// Term-wise differentiated series, order 1 or 2.  (kappa'(1) is additionally
/// available through the exact quadrature identity as KernelMap::dkappa1_quad;
/// the map stores both values.)
inline double kernel_derivative(const KernelMap& km, double rho, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("kernel_derivative: order must be 1 or 2");
  double acc = 0.0;
  if (order == 1) {
    for (size_t k = km.sq_coeffs.size(); k-- > 1;) acc = acc * rho + double(k) * km.sq_coeffs[k];
  } else {
    for (size_t k = km.sq_coeffs.size(); k-- > 2;)
      acc = acc * rho + double(k) * double(k - 1) * km.sq_coeffs[k];
  }
  return acc;
}

inline KernelMap make_kernel_map(const Activation& act, const HermiteExpansion& ex) {
  KernelMap km;
  km.name = act.name;
  km.C = act.C;
  km.sq_coeffs.resize(ex.coeffs.size());
  for (size_t k = 0; k < ex.coeffs.size(); ++k) km.sq_coeffs[k] = sq(ex.coeffs[k]);
  km.kappa0 = km.sq_coeffs.empty() ? 0.0 : km.sq_coeffs[0];
  km.dkappa0 = km.sq_coeffs.size() > 1 ? km.sq_coeffs[1] : 0.0;
  double s = 0.0, nonconstant = 0.0;
  for (size_t k = 1; k < km.sq_coeffs.size(); ++k) {
    s += double(k) * km.sq_coeffs[k];
    nonconstant += km.sq_coeffs[k];
  }
  if (nonconstant < 1e-12) {
    throw degenerate_error("kernel map: constant activation (all energy in c_0)");
  }
  km.dkappa1_series = s;
  km.dkappa1_quad = gauss_expect([&](double x) { return sq(act.df(x)); }, act.breakpoints);
  km.tail_mass = ex.tail_mass;
  km.tail_warning = ex.tail_warning;
  km.dkappa1_discrepancy = std::abs(km.dkappa1_series - km.dkappa1_quad) > tol_one;
  return km;
}

inline KernelMap make_kernel_map(const Activation& act, int K = default_truncation) {
  return make_kernel_map(act, expand(act, K));
}

/// Ground-truth kernel value E[f(X) f(Y)] by two-dimensional quadrature of the
/// defining integral, independent of the Hermite series.
inline double kernel_oracle(const Activation& act, double rho) {
  if (std::abs(rho) > 1.0) throw std::domain_error("kernel_oracle: |rho| must be <= 1");
  return gauss_expect_pair(act.f, act.f, rho, act.breakpoints, act.breakpoints);
}

/// Result of locating and classifying the attracting fixed point.
struct FixedPointReport {
  double rho_star = 0.0;
  fp_case case_label = fp_case::case1;
  double alpha = 0.0;           // contraction rate of the case's distance functional
  double dkappa_at_star = 0.0;  // series kappa'(rho*)
  // diagnostics
  double kappa0 = 0.0, dkappa0 = 0.0;
  double dkappa1_series = 0.0, dkappa1_quad = 0.0;
  double tail_mass = 0.0;
  double margin_zero = 0.0;  // kappa0 - tol_zero  (negative -> treated as zero)
  double margin_one = 0.0;   // dkappa1_quad - 1
  bool dkappa1_discrepancy = false;
  // When the series and quadrature kappa'(1) values imply different cases
  // (relu-like kinks), the alternative classification is carried instead of
  // silently choosing.
  struct alt_classification {
    fp_case case_label;
    double alpha;
  };
  std::optional<alt_classification> alternative;
};

namespace detail {

/// Classify using the given kappa'(1) estimate; shared by the primary
/// (quadrature) and alternative (series) paths.
inline void classify(const KernelMap& km, double dkappa1, FixedPointReport& r) {
  if (km.kappa0 <= tol_zero) {
    r.case_label = fp_case::case1;
    r.rho_star = 0.0;
    r.alpha = 1.0 / (2.0 - km.dkappa0);
  } else if (dkappa1 < 1.0 - tol_one) {
    r.case_label = fp_case::case2;
    r.rho_star = 1.0;
    r.alpha = dkappa1;
  } else if (std::abs(dkappa1 - 1.0) <= tol_one) {
    r.case_label = fp_case::case3;
    r.rho_star = 1.0;
    r.alpha = 1.0 - km.kappa0 - km.dkappa0;
  } else {
    // kappa'(1) > 1: the fixed point is interior.  kappa(0) > 0 and kappa
    // dips below the identity before 1; bisection on a sign change located
    // by a 1e-3 grid scan is unconditionally safe.
    r.case_label = fp_case::case4;
    const double step = 1e-3;
    double lo = 0.0, hi = 0.0;
    bool found = false;
    double prev_x = 0.0, prev_v = km.kappa0;  // kappa(0) - 0 > 0
    for (double x = step; x <= 1.0 - tol_one + 1e-15; x += step) {
      double v = kernel_eval(km, x) - x;
      if (prev_v > 0.0 && v <= 0.0) {
        lo = prev_x;
        hi = x;
        found = true;
        break;
      }
      prev_x = x;
      prev_v = v;
    }
    if (!found) {
      throw numerical_error("find_fixed_point: no sign change of kappa(rho)-rho in [0, 1-tol]; "
                            "internal consistency failure");
    }
    for (int it = 0; it < 200 && hi - lo >= 1e-12; ++it) {
      double mid = 0.5 * (lo + hi);
      if (kernel_eval(km, mid) - mid > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    r.rho_star = 0.5 * (lo + hi);
    double ds = kernel_derivative(km, r.rho_star, 1);
    r.alpha = std::max({1.0 - km.kappa0, ds, (1.0 - r.rho_star) / (2.0 - ds)});
  }
}

}  // namespace detail

/// Locate the globally attracting fixed point in [0, 1] and compute the
/// contraction rate of the applicable distance functional.  Classification
/// uses the quadrature kappa'(1); when the truncated series would classify
/// differently, the report carries that alternative too.
inline FixedPointReport find_fixed_point(const KernelMap& km) {
  int significant = 0;
  bool high_order = false;
  for (size_t k = 1; k < km.sq_coeffs.size(); ++k) {
    if (km.sq_coeffs[k] > 1e-18) {
      ++significant;
      if (k >= 2) high_order = true;
    }
  }
  if (!high_order && significant <= 1) {
    throw std::invalid_argument("find_fixed_point: classification requires a nonlinear "
                                "activation (" + km.name + " is linear)");
  }
  FixedPointReport r;
  r.kappa0 = km.kappa0;
  r.dkappa0 = km.dkappa0;
  r.dkappa1_series = km.dkappa1_series;
  r.dkappa1_quad = km.dkappa1_quad;
  r.tail_mass = km.tail_mass;
  r.margin_zero = km.kappa0 - tol_zero;
  r.margin_one = km.dkappa1_quad - 1.0;
  r.dkappa1_discrepancy = km.dkappa1_discrepancy;
  detail::classify(km, km.dkappa1_quad, r);
  r.dkappa_at_star = kernel_derivative(km, r.rho_star, 1);
  if (km.dkappa1_discrepancy) {
    FixedPointReport alt;
    alt.kappa0 = km.kappa0;
    alt.dkappa0 = km.dkappa0;
    detail::classify(km, km.dkappa1_series, alt);
    if (alt.case_label != r.case_label) {
      r.alternative = FixedPointReport::alt_classification{alt.case_label, alt.alpha};
    }
  }
  return r;
}

/// Name of the distance functional whose decay the case's bound controls.
inline const char* bound_functional_name(fp_case c) {
  switch (c) {
    case fp_case::case1: return "gap_ratio";    // |rho| / (1 - |rho|)
    case fp_case::case2: return "gap_to_one";   // |rho - 1|
    case fp_case::case3: return "gap_to_one";   // |rho - 1|
    case fp_case::case4: return "gap_to_star";  // |rho - rho*|
  }
  return "?";
}

/// Value of the case's distance functional at a given rho.
inline double bound_functional_value(const FixedPointReport& r, double rho) {
  switch (r.case_label) {
    case fp_case::case1: return std::abs(rho) / (1.0 - std::abs(rho));
    case fp_case::case2:
    case fp_case::case3: return std::abs(rho - 1.0);
    case fp_case::case4: return std::abs(rho - r.rho_star);
  }
  return 0.0;
}

/// Upper bound on the case's distance functional after ell kernel
/// applications from rho0:
///   case1: (|rho0|/(1-|rho0|)) * alpha^ell      bounds |rho_ell|/(1-|rho_ell|)
///   case2: |rho0-1| * alpha^ell                 bounds |rho_ell - 1|
///   case3: |rho0-1| / (ell*alpha*|rho0-1| + 1)  bounds |rho_ell - 1|
///   case4: (|rho0-rho*|/(1-|rho0|)) * alpha^ell bounds |rho_ell - rho*|
inline double contraction_bound(const FixedPointReport& r, double rho0, long ell) {
  if (std::abs(rho0) >= 1.0) throw std::domain_error("contraction_bound: |rho0| must be < 1");
  if (ell < 0) throw std::domain_error("contraction_bound: depth must be >= 0");
  switch (r.case_label) {
    case fp_case::case1:
      return std::abs(rho0) / (1.0 - std::abs(rho0)) * std::pow(r.alpha, double(ell));
    case fp_case::case2:
      return std::abs(rho0 - 1.0) * std::pow(r.alpha, double(ell));
    case fp_case::case3: {
      double d0 = std::abs(rho0 - 1.0);
      return d0 / (double(ell) * r.alpha * d0 + 1.0);
    }
    case fp_case::case4:
      return std::abs(rho0 - r.rho_star) / (1.0 - std::abs(rho0)) * std::pow(r.alpha, double(ell));
  }
  return 0.0;
}

/// Depth after which the gap to the aligned fixed point drops below epsilon:
/// L = ceil(ln(1/eps) / ln(1/kappa'(1))), defined for the exponential aligned
/// case only.
inline long depth_threshold_formula(double dkappa1, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("depth threshold: epsilon must be in (0,1)");
  if (!(dkappa1 > 0.0 && dkappa1 < 1.0)) throw std::invalid_argument("depth threshold: kappa'(1) must be in (0,1)");
  return long(std::ceil(std::log(epsilon) / std::log(dkappa1)));
}

/// Case-2 reports get the formula value; other cases are not applicable.
inline std::optional<long> depth_threshold(const FixedPointReport& r, double epsilon) {
  if (r.case_label != fp_case::case2) return std::nullopt;
  return depth_threshold_formula(r.dkappa1_quad, epsilon);
}

/// Residual blend: kappa_res(rho) = (1-r^2)*kappa(rho) + r^2*rho, applied
/// coefficient-wise.  Fixed points are unchanged for r < 1; convergence slows
/// as r grows.
inline KernelMap residual_transform(const KernelMap& km, double r) {
  if (r < 0.0 || r > 1.0) throw std::invalid_argument("residual_transform: r must be in [0,1]");
  const double w = 1.0 - r * r;
  KernelMap out = km;
  for (double& c : out.sq_coeffs) c *= w;
  if (out.sq_coeffs.size() > 1) out.sq_coeffs[1] += r * r;
  out.kappa0 = w * km.kappa0;
  out.dkappa0 = out.sq_coeffs.size() > 1 ? out.sq_coeffs[1] : 0.0;
  out.dkappa1_series = w * km.dkappa1_series + r * r;
  out.dkappa1_quad = w * km.dkappa1_quad + r * r;
  out.tail_mass = w * km.tail_mass;
  out.dkappa1_discrepancy = std::abs(out.dkappa1_series - out.dkappa1_quad) > tol_one;
  return out;
}

/// Normalization placements around the activation.
enum class norm_mode { none, ln_before, rn_before, ln_after, rn_after };

inline const char* to_string(norm_mode m) {
  switch (m) {
    case norm_mode::none: return "none";
    case norm_mode::ln_before: return "ln_before";
    case norm_mode::rn_before: return "rn_before";
    case norm_mode::ln_after: return "ln_after";
    case norm_mode::rn_after: return "rn_after";
  }
  return "?";
}

inline norm_mode parse_norm_mode(const std::string& s) {
  if (s == "none" || s.empty()) return norm_mode::none;
  if (s == "ln_before") return norm_mode::ln_before;
  if (s == "rn_before") return norm_mode::rn_before;
  if (s == "ln_after") return norm_mode::ln_after;
  if (s == "rn_after") return norm_mode::rn_after;
  throw std::invalid_argument("unknown normalization mode: " + s);
}

/// Only activation-then-layer-norm changes the kernel map: it centers and
/// rescales it, kappa_psi(rho) = (kappa(rho) - kappa(0)) / (1 - kappa(0)),
/// i.e. c_0^2 -> 0 and c_k^2 -> c_k^2/(1-c_0^2).  RMS normalization and
/// pre-activation placements leave the map unchanged.
inline KernelMap normalization_transform(const KernelMap& km, norm_mode mode) {
  if (mode != norm_mode::ln_after) return km;
  if (1.0 - km.kappa0 < 1e-12) {
    throw degenerate_error("normalization_transform: kappa(0) = 1 (constant activation)");
  }
  KernelMap out = km;
  const double denom = 1.0 - km.kappa0;
  out.sq_coeffs[0] = 0.0;
  for (size_t k = 1; k < out.sq_coeffs.size(); ++k) out.sq_coeffs[k] = km.sq_coeffs[k] / denom;
  out.kappa0 = 0.0;
  out.dkappa0 = out.sq_coeffs.size() > 1 ? out.sq_coeffs[1] : 0.0;
  out.dkappa1_series = km.dkappa1_series / denom;
  out.dkappa1_quad = km.dkappa1_quad / denom;
  out.tail_mass = km.tail_mass / denom;
  out.dkappa1_discrepancy = std::abs(out.dkappa1_series - out.dkappa1_quad) > tol_one;
  return out;
}

}  // namespace kerneldyn
