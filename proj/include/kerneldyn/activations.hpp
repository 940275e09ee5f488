#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kerneldyn/common.hpp"
#include "kerneldyn/gauss.hpp"
#include "kerneldyn/polynomials.hpp"

namespace kerneldyn {

// SELU constants of the self-normalizing-networks convention (full precision;
// with these the function is unit-energy and zero-mean under N(0,1) to ~1e-17).
inline constexpr double selu_lambda = 1.0507009873554804934193349852946;
inline constexpr double selu_alpha = 1.6732632423543772848170429916717;

/// A scalar activation, energy-normalized so that E[f(X)^2] = 1 for
/// X ~ N(0,1).  `f` and `df` are the normalized function and its derivative
/// (defined almost everywhere); `C` is the normalization sqrt(E[raw(X)^2])
/// that was divided out; `breakpoints` lists the non-smooth points, sorted
/// and duplicate-free, so quadrature panels can split there.
struct Activation {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::vector<double> breakpoints;
  double C = 1.0;
};

/// C = sqrt(E[raw(X)^2]).  Throws numerical_error when the integral is not
/// finite (the function is not square-integrable under the Gaussian measure).
template <class F>
double normalization_constant(F&& raw, const std::vector<double>& breakpoints = {}) {
  double second_moment = gauss_expect([&](double x) { return sq(raw(x)); }, breakpoints);
  if (!std::isfinite(second_moment) || second_moment < 0.0) {
    throw numerical_error("normalization_constant: E[f(X)^2] is not finite; "
                          "activation is not square-integrable under the Gaussian measure");
  }
  return std::sqrt(second_moment);
}

namespace detail {

struct raw_activation {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::vector<double> breakpoints;
};

inline raw_activation make_raw(const std::string& base, double param) {
  if (base == "tanh") {
    return {"tanh", [](double x) { return std::tanh(x); },
            [](double x) { double t = std::tanh(x); return 1.0 - t * t; }, {}};
  }
  if (base == "sigmoid") {
    auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    return {"sigmoid", sig, [sig](double x) { double s = sig(x); return s * (1.0 - s); }, {}};
  }
  if (base == "exp") {
    return {"exp", [](double x) { return std::exp(x); },
            [](double x) { return std::exp(x); }, {}};
  }
  if (base == "relu") {
    return {"relu", [](double x) { return x > 0.0 ? x : 0.0; },
            [](double x) { return x > 0.0 ? 1.0 : 0.0; }, {0.0}};
  }
  if (base == "leaky_relu") {
    double a = param;
    return {"leaky_relu",
            [a](double x) { return x > 0.0 ? x : a * x; },
            [a](double x) { return x > 0.0 ? 1.0 : a; }, {0.0}};
  }
  if (base == "elu" || base == "celu") {
    // celu with its default unit scale coincides with elu.
    return {base, [](double x) { return x > 0.0 ? x : std::expm1(x); },
            [](double x) { return x > 0.0 ? 1.0 : std::exp(x); }, {0.0}};
  }
  if (base == "selu") {
    return {"selu",
            [](double x) { return x > 0.0 ? selu_lambda * x : selu_lambda * selu_alpha * std::expm1(x); },
            [](double x) { return x > 0.0 ? selu_lambda : selu_lambda * selu_alpha * std::exp(x); },
            {0.0}};
  }
  if (base == "gelu") {
    // Exact Gaussian-CDF form x * Phi(x) (not the tanh approximation).
    return {"gelu", [](double x) { return x * normal_cdf(x); },
            [](double x) { return normal_cdf(x) + x * normal_pdf(x); }, {}};
  }
  if (base == "identity") {
    return {"identity", [](double x) { return x; }, [](double) { return 1.0; }, {}};
  }
  if (base == "hermite") {
    int m = int(param);
    if (m < 0 || m > 60 || double(m) != param) {
      throw std::invalid_argument("hermite:m requires integer 0 <= m <= 60");
    }
    return {"hermite",
            [m](double x) { return he_eval(m, x); },
            [m](double x) { return m == 0 ? 0.0 : std::sqrt(double(m)) * he_eval(m - 1, x); },
            {}};
  }
  throw not_found_error("unknown activation: " + base);
}

}  // namespace detail

/// Build a normalized catalog activation from a CLI-style string:
/// lowercase name, optionally parameterized as "leaky_relu:0.2" or "hermite:3".
inline Activation make_activation(const std::string& spec) {
  std::string base = spec;
  double param = 0.0;
  bool has_param = false;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    base = spec.substr(0, pos);
    const std::string ptext = spec.substr(pos + 1);
    char* end = nullptr;
    param = std::strtod(ptext.c_str(), &end);
    if (ptext.empty() || end != ptext.c_str() + ptext.size() || !std::isfinite(param)) {
      throw std::invalid_argument("bad activation parameter in '" + spec + "'");
    }
    has_param = true;
  }
  if (base == "leaky_relu" && !has_param) param = 0.01;
  if (base == "hermite" && !has_param) {
    throw std::invalid_argument("hermite requires a degree, e.g. hermite:2");
  }
  if (has_param && base != "leaky_relu" && base != "hermite") {
    throw std::invalid_argument("activation '" + base + "' takes no parameter");
  }
  detail::raw_activation raw = detail::make_raw(base, param);

  double C = normalization_constant(raw.f, raw.breakpoints);
  if (C <= 0.0) throw numerical_error("normalization_constant: zero-energy activation");
  Activation act;
  act.name = spec;  // keep the user-facing spelling, parameter included
  act.C = C;
  act.breakpoints = raw.breakpoints;
  act.f = [inner = raw.f, C](double x) { return inner(x) / C; };
  act.df = [inner = raw.df, C](double x) { return inner(x) / C; };
  return act;
}

/// Names of the default catalog instantiations.
inline std::vector<std::string> catalog_names() {
  return {"tanh", "selu",  "relu",     "sigmoid",        "exp",      "gelu",
          "celu", "elu",   "leaky_relu:0.1", "identity", "hermite:2", "hermite:3"};
}

/// The eight activations of the reference results table (no parameterized or
/// linear entries).
inline std::vector<std::string> table_names() {
  return {"tanh", "selu", "relu", "sigmoid", "exp", "gelu", "celu", "elu"};
}

inline std::vector<Activation> catalog() {
  std::vector<Activation> out;
  for (const auto& n : catalog_names()) out.push_back(make_activation(n));
  return out;
}

}  // namespace kerneldyn
