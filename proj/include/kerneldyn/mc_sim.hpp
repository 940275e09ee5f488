#pragma once

// Finite-width Monte-Carlo validation: build random networks, push a
// correlated input pair (or a batch of inputs) through them, and measure
// empirical kernel trajectories against the mean-field prediction.
//
// All randomness is counter-based: key = (seed, trial + 1) per trial (the
// input pair owns trial slot 0), counter = (block, layer, matrix, row).
// Weight matrices are therefore never stored — each row is regenerated on
// the fly — and any trial can be recomputed independently, which makes the
// aggregate bit-identical for every thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kerneldyn/activations.hpp"
#include "kerneldyn/common.hpp"
#include "kerneldyn/dynamics.hpp"
#include "kerneldyn/hermite.hpp"
#include "kerneldyn/kernel.hpp"
#include "kerneldyn/philox.hpp"

namespace kerneldyn {

enum class weight_dist { gaussian, uniform_unit_var, rademacher };

inline const char* to_string(weight_dist w) {
  switch (w) {
    case weight_dist::gaussian: return "gaussian";
    case weight_dist::uniform_unit_var: return "uniform_unit_var";
    case weight_dist::rademacher: return "rademacher";
  }
  return "?";
}

inline weight_dist parse_weight_dist(const std::string& s) {
  if (s == "gaussian") return weight_dist::gaussian;
  if (s == "uniform_unit_var" || s == "uniform") return weight_dist::uniform_unit_var;
  if (s == "rademacher") return weight_dist::rademacher;
  throw std::invalid_argument("unknown weight distribution: " + s);
}

struct SimConfig {
  std::string activation = "relu";
  int width = 256;  ///< d >= 2
  int depth = 10;   ///< L >= 1
  double rho0 = 0.5;
  int trials = 32;
  weight_dist dist = weight_dist::gaussian;
  double residual = 0.0;  ///< skip strength r in [0,1]; 0 disables the skip branch
  norm_mode norm = norm_mode::none;
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 = hardware concurrency
};

struct SimResult {
  std::vector<double> mean_kernel;    ///< layers 0..L; layer 0 is the input pair
  std::vector<double> stderr_kernel;  ///< sample std over trials / sqrt(trials)
  std::vector<double> mean_norm_x;    ///< trial-averaged <h(x),h(x)>_avg per layer
  std::vector<double> mean_norm_y;
  std::vector<double> meanfield;  ///< iterates of the transformed kernel map
  long kept_trials = 0;
  long degenerate_trials = 0;
  std::vector<std::string> degenerate_notes;
};

// Counter id of each random matrix within a (key, layer) stream.
inline constexpr std::uint64_t weight_matrix_id = 0;
inline constexpr std::uint64_t skip_matrix_id = 1;
inline constexpr std::uint64_t input_matrix_id = 2;

/// Mean-normalized inner product <a,b>_avg = (1/d) sum a_i b_i.
inline double avg_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s / static_cast<double>(a.size());
}

/// Raw standard-Gaussian input vector: row `index` of the input stream.
inline std::vector<double> input_vector(int d, std::uint64_t seed, std::uint64_t index) {
  philox_gen gen(philox_key{seed, 0}, philox_ctr{0, 0, input_matrix_id, index});
  std::vector<double> v(static_cast<size_t>(d));
  for (auto& x : v) x = gen.next_normal();
  return v;
}

/// Input pair with EXACT sample statistics: <x,x>_avg = <y,y>_avg = 1 and
/// <x,y>_avg = rho0, via orthonormalization in the average inner product.
inline std::pair<std::vector<double>, std::vector<double>> make_input_pair(int d, double rho0,
                                                                           std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("make_input_pair: width must be >= 2");
  if (std::abs(rho0) > 1.0) throw std::invalid_argument("make_input_pair: |rho0| must be <= 1");
  std::vector<double> x = input_vector(d, seed, 0);
  const double nx = std::sqrt(avg_dot(x, x));
  if (nx < 1e-12) throw degenerate_error("make_input_pair: degenerate first input");
  for (auto& e : x) e /= nx;
  if (rho0 == 1.0) return {x, x};
  if (rho0 == -1.0) {
    std::vector<double> y = x;
    for (auto& e : y) e = -e;
    return {x, y};
  }
  std::vector<double> v = input_vector(d, seed, 1);
  for (int pass = 0; pass < 2; ++pass) {  // twice for orthogonality to ~1e-16
    const double proj = avg_dot(v, x);
    for (size_t i = 0; i < v.size(); ++i) v[i] -= proj * x[i];
  }
  const double nv = std::sqrt(avg_dot(v, v));
  if (nv < 1e-12) throw degenerate_error("make_input_pair: inputs nearly collinear");
  const double c = std::sqrt(1.0 - rho0 * rho0);
  std::vector<double> y(static_cast<size_t>(d));
  for (size_t i = 0; i < y.size(); ++i) y[i] = rho0 * x[i] + c * v[i] / nv;
  return {x, y};
}

namespace detail {

// out_q = (M h_q) / sqrt(d) for all inputs q, with the matrix rows
// regenerated from (key; block, layer, matrix, row) and never stored.  Row j
// consumes the same word stream a philox_gen started at (0, layer, matrix, j)
// would emit, but walks whole blocks: the block counters are independent, so
// consecutive Philox evaluations pipeline instead of serializing through a
// buffered generator.
template <class Transform>
inline void sampled_matvec(const std::vector<std::vector<double>>& h,
                           std::vector<std::vector<double>>& out, philox_key key,
                           std::uint64_t layer, std::uint64_t matrix,
                           Transform&& word_to_weight) {
  const size_t n = h.size();
  const size_t d = h[0].size();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const size_t full = d / 4;
  const size_t rem = d % 4;
  if (n == 2) {  // hot path: the correlated pair
    const double* h0 = h[0].data();
    const double* h1 = h[1].data();
    for (size_t j = 0; j < d; ++j) {
      double a0 = 0.0, a1 = 0.0;
      size_t i = 0;
      for (size_t b = 0; b < full; ++b, i += 4) {
        const philox_ctr w = philox4x64_10(philox_ctr{b, layer, matrix, j}, key);
        const double w0 = word_to_weight(w.c0), w1 = word_to_weight(w.c1);
        const double w2 = word_to_weight(w.c2), w3 = word_to_weight(w.c3);
        a0 += (w0 * h0[i] + w1 * h0[i + 1]) + (w2 * h0[i + 2] + w3 * h0[i + 3]);
        a1 += (w0 * h1[i] + w1 * h1[i + 1]) + (w2 * h1[i + 2] + w3 * h1[i + 3]);
      }
      if (rem != 0) {
        const philox_ctr w = philox4x64_10(philox_ctr{full, layer, matrix, j}, key);
        const std::uint64_t words[4] = {w.c0, w.c1, w.c2, w.c3};
        for (size_t t = 0; t < rem; ++t, ++i) {
          const double wt = word_to_weight(words[t]);
          a0 += wt * h0[i];
          a1 += wt * h1[i];
        }
      }
      out[0][j] = a0 * inv_sqrt_d;
      out[1][j] = a1 * inv_sqrt_d;
    }
    return;
  }
  std::vector<double> acc(n);
  for (size_t j = 0; j < d; ++j) {
    std::fill(acc.begin(), acc.end(), 0.0);
    size_t i = 0;
    for (size_t b = 0; b < full + (rem != 0 ? 1 : 0); ++b) {
      const philox_ctr w = philox4x64_10(philox_ctr{b, layer, matrix, j}, key);
      const std::uint64_t words[4] = {w.c0, w.c1, w.c2, w.c3};
      const size_t take = b < full ? 4 : rem;
      for (size_t t = 0; t < take; ++t, ++i) {
        const double wt = word_to_weight(words[t]);
        for (size_t q = 0; q < n; ++q) acc[q] += wt * h[q][i];
      }
    }
    for (size_t q = 0; q < n; ++q) out[q][j] = acc[q] * inv_sqrt_d;
  }
}

inline void sampled_matvec(weight_dist dist, const std::vector<std::vector<double>>& h,
                           std::vector<std::vector<double>>& out, philox_key key,
                           std::uint64_t layer, std::uint64_t matrix) {
  switch (dist) {
    case weight_dist::gaussian:
      sampled_matvec(h, out, key, layer, matrix,
                     [](std::uint64_t w) { return normal_from_word(w); });
      break;
    case weight_dist::uniform_unit_var:
      sampled_matvec(h, out, key, layer, matrix,
                     [](std::uint64_t w) { return uniform_unit_var_from_word(w); });
      break;
    case weight_dist::rademacher:
      sampled_matvec(h, out, key, layer, matrix,
                     [](std::uint64_t w) { return sign_from_word(w); });
      break;
  }
}

// LN: subtract the feature mean, divide by the (biased, 1/d) feature
// standard deviation.
inline void layer_norm_inplace(std::vector<double>& z, int layer) {
  const double d = static_cast<double>(z.size());
  double mu = 0.0;
  for (double e : z) mu += e;
  mu /= d;
  double var = 0.0;
  for (double e : z) var += (e - mu) * (e - mu);
  var /= d;
  const double sd = std::sqrt(var);
  if (sd < 1e-12) {
    throw degenerate_error("layer norm: zero feature variance at layer " + std::to_string(layer));
  }
  for (auto& e : z) e = (e - mu) / sd;
}

// RN: divide by the root-mean-square.
inline void rms_norm_inplace(std::vector<double>& z, int layer) {
  double ms = 0.0;
  for (double e : z) ms += e * e;
  ms /= static_cast<double>(z.size());
  const double rms = std::sqrt(ms);
  if (rms < 1e-12) {
    throw degenerate_error("rms norm: zero vector at layer " + std::to_string(layer));
  }
  for (auto& e : z) e /= rms;
}

}  // namespace detail

/// Push `inputs` jointly through ONE sampled network (trial index selects the
/// random stream) and return the Gram matrix of the representations at every
/// layer 0..L, flattened row-major n*n.  Throws degenerate_error if a
/// normalization denominator collapses.
inline std::vector<std::vector<double>> forward_gram(const SimConfig& cfg, const Activation& act,
                                                     std::vector<std::vector<double>> h,
                                                     std::uint64_t trial) {
  const size_t n = h.size();
  const philox_key key{cfg.seed, trial + 1};
  const double r = cfg.residual;
  const double mix = std::sqrt(std::max(0.0, 1.0 - r * r));
  std::vector<std::vector<double>> grams;
  grams.reserve(static_cast<size_t>(cfg.depth) + 1);
  const auto record = [&grams, n](const std::vector<std::vector<double>>& v) {
    std::vector<double> g(n * n);
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p; q < n; ++q) g[p * n + q] = g[q * n + p] = avg_dot(v[p], v[q]);
    grams.push_back(std::move(g));
  };
  record(h);
  std::vector<std::vector<double>> a(n, std::vector<double>(h[0].size()));
  std::vector<std::vector<double>> skip;
  if (r > 0.0) skip.assign(n, std::vector<double>(h[0].size()));
  for (int layer = 1; layer <= cfg.depth; ++layer) {
    const auto ell = static_cast<std::uint64_t>(layer);
    detail::sampled_matvec(cfg.dist, h, a, key, ell, weight_matrix_id);
    if (r > 0.0) detail::sampled_matvec(cfg.dist, h, skip, key, ell, skip_matrix_id);
    if (cfg.norm == norm_mode::ln_before)
      for (auto& z : a) detail::layer_norm_inplace(z, layer);
    if (cfg.norm == norm_mode::rn_before)
      for (auto& z : a) detail::rms_norm_inplace(z, layer);
    for (auto& z : a)
      for (auto& e : z) e = act.f(e);
    if (cfg.norm == norm_mode::ln_after)
      for (auto& z : a) detail::layer_norm_inplace(z, layer);
    if (cfg.norm == norm_mode::rn_after)
      for (auto& z : a) detail::rms_norm_inplace(z, layer);
    if (r > 0.0) {
      for (size_t q = 0; q < n; ++q)
        for (size_t i = 0; i < h[q].size(); ++i) h[q][i] = mix * a[q][i] + r * skip[q][i];
    } else {
      h.swap(a);
    }
    record(h);
  }
  return grams;
}

struct PairTrajectory {
  std::vector<double> kernel;  ///< <h(x),h(y)>_avg, layers 0..L
  std::vector<double> norm_x;
  std::vector<double> norm_y;
};

/// Single-trial forward pass of the correlated pair.
inline PairTrajectory forward(const SimConfig& cfg, const Activation& act,
                              const std::vector<double>& x, const std::vector<double>& y,
                              std::uint64_t trial) {
  const auto grams = forward_gram(cfg, act, {x, y}, trial);
  PairTrajectory out;
  out.kernel.reserve(grams.size());
  out.norm_x.reserve(grams.size());
  out.norm_y.reserve(grams.size());
  for (const auto& g : grams) {
    out.norm_x.push_back(g[0]);
    out.kernel.push_back(g[1]);
    out.norm_y.push_back(g[3]);
  }
  return out;
}

/// The mean-field map the simulation should follow: the normalization
/// transform acts on the activation branch, which the residual mix then
/// blends with the identity.
inline KernelMap transformed_map(const KernelMap& base, norm_mode norm, double residual) {
  KernelMap m = normalization_transform(base, norm);
  if (residual > 0.0) m = residual_transform(m, residual);
  return m;
}

inline void validate(const SimConfig& cfg) {
  if (cfg.width < 2) throw std::invalid_argument("simulate: width must be >= 2");
  if (cfg.depth < 1) throw std::invalid_argument("simulate: depth must be >= 1");
  if (cfg.trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
  if (!(std::abs(cfg.rho0) <= 1.0)) throw std::invalid_argument("simulate: |rho0| must be <= 1");
  if (!(cfg.residual >= 0.0 && cfg.residual <= 1.0))
    throw std::invalid_argument("simulate: residual must lie in [0,1]");
}

/// M independent trials aggregated into mean +/- stderr, with the mean-field
/// reference iterated from the same transformed map.  Trials run on a small
/// thread pool; the reduction is ordered by trial index, so the result is
/// bit-identical for any thread count.
inline SimResult run(const SimConfig& cfg, const Activation& act, const KernelMap& base_map) {
  validate(cfg);
  const auto [x, y] = make_input_pair(cfg.width, cfg.rho0, cfg.seed);
  const KernelMap tmap = transformed_map(base_map, cfg.norm, cfg.residual);

  const int M = cfg.trials;
  std::vector<std::optional<PairTrajectory>> slots(static_cast<size_t>(M));
  std::vector<std::string> notes(static_cast<size_t>(M));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int t = next.fetch_add(1); t < M; t = next.fetch_add(1)) {
      try {
        slots[static_cast<size_t>(t)] =
            forward(cfg, act, x, y, static_cast<std::uint64_t>(t));
      } catch (const degenerate_error& e) {
        notes[static_cast<size_t>(t)] = e.what();
      }
    }
  };
  unsigned pool = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                  : std::max(1u, std::thread::hardware_concurrency());
  pool = std::min<unsigned>(pool, static_cast<unsigned>(M));
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (unsigned i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  SimResult res;
  const size_t layers = static_cast<size_t>(cfg.depth) + 1;
  res.mean_kernel.assign(layers, 0.0);
  res.stderr_kernel.assign(layers, 0.0);
  res.mean_norm_x.assign(layers, 0.0);
  res.mean_norm_y.assign(layers, 0.0);
  for (int t = 0; t < M; ++t) {  // index order: deterministic reduction
    const auto& slot = slots[static_cast<size_t>(t)];
    if (!slot) {
      ++res.degenerate_trials;
      res.degenerate_notes.push_back("trial " + std::to_string(t) + ": " +
                                     notes[static_cast<size_t>(t)]);
      continue;
    }
    ++res.kept_trials;
    for (size_t l = 0; l < layers; ++l) {
      res.mean_kernel[l] += slot->kernel[l];
      res.mean_norm_x[l] += slot->norm_x[l];
      res.mean_norm_y[l] += slot->norm_y[l];
    }
  }
  if (res.degenerate_trials * 100 > M) {
    std::string what = "simulate: " + std::to_string(res.degenerate_trials) + " of " +
                       std::to_string(M) + " trials degenerate (limit 1%)";
    for (const auto& note : res.degenerate_notes) what += "; " + note;
    throw degenerate_error(what);
  }
  const double kept = static_cast<double>(res.kept_trials);
  for (size_t l = 0; l < layers; ++l) {
    res.mean_kernel[l] /= kept;
    res.mean_norm_x[l] /= kept;
    res.mean_norm_y[l] /= kept;
  }
  if (res.kept_trials > 1) {
    for (size_t l = 0; l < layers; ++l) {
      double ss = 0.0;
      for (int t = 0; t < M; ++t) {
        const auto& slot = slots[static_cast<size_t>(t)];
        if (!slot) continue;
        const double e = slot->kernel[l] - res.mean_kernel[l];
        ss += e * e;
      }
      res.stderr_kernel[l] = std::sqrt(ss / (kept - 1.0)) / std::sqrt(kept);
    }
  }
  res.meanfield = iterate(tmap, cfg.rho0, cfg.depth).values;
  return res;
}

/// Convenience overload: builds the activation and its kernel map at the
/// default truncation.
inline SimResult run(const SimConfig& cfg) {
  const Activation act = make_activation(cfg.activation);
  const KernelMap km = make_kernel_map(act, expand(act, default_truncation));
  return run(cfg, act, km);
}

}  // namespace kerneldyn
