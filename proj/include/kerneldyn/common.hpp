#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace kerneldyn {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;  // 1/sqrt(2*pi)

/// Catalog lookup of a name that does not exist.
class not_found_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation whose premises hold degenerated at runtime
/// (e.g. a normalization denominator collapsed to zero).
class degenerate_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to produce a finite/consistent result.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double sq(double x) { return x * x; }

inline double normal_pdf(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

/// Standard normal CDF via the complementary error function (accurate in both tails).
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

}  // namespace kerneldyn
