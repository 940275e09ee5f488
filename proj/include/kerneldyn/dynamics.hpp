#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kerneldyn/kernel.hpp"

namespace kerneldyn {

enum class traj_source { discrete, ode };

/// A kernel sequence by depth (discrete iteration) or by time (ODE), with the
/// per-entry contraction bound on the applicable distance functional when a
/// fixed-point report is supplied.  `range_flag` records a diagnostic
/// excursion outside [-1, 1] by more than 1e-9 (values are never clamped).
struct Trajectory {
  traj_source source = traj_source::discrete;
  double rho0 = 0.0;
  std::vector<double> times;   // depth ell (0..L) or time t
  std::vector<double> values;  // rho at each entry
  std::vector<double> bounds;  // bound on the distance functional (may be empty)
  std::string functional_name;
  bool range_flag = false;
};

namespace detail {
inline void flag_range(Trajectory& t, double v) {
  if (std::abs(v) > 1.0 + 1e-9) t.range_flag = true;
}
}  // namespace detail

/// Repeated kernel application rho_{l+1} = kappa(rho_l), depth+1 values.
inline Trajectory iterate(const KernelMap& km, double rho0, long depth) {
  if (std::abs(rho0) > 1.0) throw std::domain_error("iterate: |rho0| must be <= 1");
  if (depth < 0) throw std::domain_error("iterate: depth must be >= 0");
  Trajectory t;
  t.source = traj_source::discrete;
  t.rho0 = rho0;
  t.times.reserve(depth + 1);
  t.values.reserve(depth + 1);
  double rho = rho0;
  for (long l = 0; l <= depth; ++l) {
    t.times.push_back(double(l));
    t.values.push_back(rho);
    detail::flag_range(t, rho);
    if (l < depth) rho = kernel_eval(km, rho);
  }
  return t;
}

/// As above, also filling the per-depth contraction bound for the report's case
/// (requires |rho0| < 1; at |rho0| = 1 the bound prefactors are undefined and
/// the bounds vector is left empty).
inline Trajectory iterate(const KernelMap& km, const FixedPointReport& report, double rho0,
                          long depth) {
  Trajectory t = iterate(km, rho0, depth);
  t.functional_name = bound_functional_name(report.case_label);
  if (std::abs(rho0) < 1.0) {
    t.bounds.reserve(depth + 1);
    for (long l = 0; l <= depth; ++l) t.bounds.push_back(contraction_bound(report, rho0, l));
  }
  return t;
}

/// (rho_l, rho_{l+1}) pairs for cobweb plots.
inline std::vector<std::pair<double, double>> cobweb(const KernelMap& km, double rho0, long steps) {
  if (std::abs(rho0) > 1.0) throw std::domain_error("cobweb: |rho0| must be <= 1");
  if (steps < 0) throw std::domain_error("cobweb: steps must be >= 0");
  std::vector<std::pair<double, double>> out;
  out.reserve(steps);
  double rho = rho0;
  for (long l = 0; l < steps; ++l) {
    double next = kernel_eval(km, rho);
    out.emplace_back(rho, next);
    rho = next;
  }
  return out;
}

struct OdeOptions {
  double t_max = 500.0;
  double dt = 0.01;
  double early_stop_tol = 1e-12;  // stop when |d rho/dt| drops below; 0 disables
};

/// Classical fourth-order Runge-Kutta on the continuous-time surrogate
/// d rho/dt = -rho + kappa(rho), recording every accepted step.
inline Trajectory ode_solve(const KernelMap& km, double rho0, OdeOptions opt = {}) {
  if (std::abs(rho0) > 1.0) throw std::domain_error("ode_solve: |rho0| must be <= 1");
  if (!(opt.dt > 0.0)) throw std::domain_error("ode_solve: dt must be > 0");
  auto f = [&](double rho) { return -rho + kernel_eval(km, rho); };
  Trajectory t;
  t.source = traj_source::ode;
  t.rho0 = rho0;
  const long n_steps = std::lround(opt.t_max / opt.dt);
  t.times.reserve(n_steps + 1);
  t.values.reserve(n_steps + 1);
  double rho = rho0;
  t.times.push_back(0.0);
  t.values.push_back(rho);
  for (long i = 0; i < n_steps; ++i) {
    const double k1 = f(rho);
    if (opt.early_stop_tol > 0.0 && std::abs(k1) < opt.early_stop_tol) break;
    const double k2 = f(rho + 0.5 * opt.dt * k1);
    const double k3 = f(rho + 0.5 * opt.dt * k2);
    const double k4 = f(rho + opt.dt * k3);
    rho += opt.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(rho)) {
      throw numerical_error("ode_solve: non-finite state at t = " + std::to_string((i + 1) * opt.dt) +
                            "; last valid t = " + std::to_string(i * opt.dt));
    }
    t.times.push_back((i + 1) * opt.dt);
    t.values.push_back(rho);
    detail::flag_range(t, rho);
  }
  return t;
}

/// First depth at which the gap x_l = |rho_l - 1| of the aligned iteration
/// drops below epsilon, iterating the gap recursion
///   x_{l+1} = sum_{k>=1} c_k^2 * (1 - (1-x_l)^k)
/// with expm1/log1p so tiny gaps keep full relative precision (iterating rho
/// itself would round 1 - rho to zero near the fixed point and mask the
/// crossing).  The truncation remainder is folded into the fixed point, which
/// keeps x = 0 exact.  Returns nullopt if the gap does not cross within
/// max_iter (e.g. harmonic-rate maps).
inline std::optional<long> gap_crossing_depth(const KernelMap& km, double rho0, double epsilon,
                                              long max_iter = 200000) {
  if (rho0 < 0.0 || rho0 > 1.0) throw std::domain_error("gap_crossing_depth: rho0 must be in [0,1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("gap_crossing_depth: epsilon in (0,1)");
  double x = 1.0 - rho0;
  if (x < epsilon) return 0;
  for (long l = 1; l <= max_iter; ++l) {
    double next = 0.0;
    if (x >= 1.0) {
      for (size_t k = 1; k < km.sq_coeffs.size(); ++k) next += km.sq_coeffs[k];
    } else {
      const double log_one_minus_x = std::log1p(-x);
      for (size_t k = 1; k < km.sq_coeffs.size(); ++k) {
        next += km.sq_coeffs[k] * (-std::expm1(double(k) * log_one_minus_x));
      }
    }
    x = next;
    if (x < epsilon) return l;
    if (!(x > 0.0)) return std::nullopt;  // collapsed to zero without crossing order
  }
  return std::nullopt;
}

}  // namespace kerneldyn
