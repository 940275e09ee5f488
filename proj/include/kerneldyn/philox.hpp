#pragma once

// Counter-based random number generation (Philox 4x64-10) plus an inverse
// normal CDF, and the weight samplers built on them.
//
// A counter-based generator makes every random draw a pure function of
// (key, counter).  Simulation code derives one key per (seed, trial) and one
// counter prefix per (layer, matrix, row); any entry of any weight matrix can
// then be regenerated independently, which makes multi-threaded runs
// bit-identical to single-threaded ones by construction.

#include <array>
#include <cmath>
#include <cstdint>

#include "kerneldyn/common.hpp"

namespace kerneldyn {

struct philox_key {
  std::uint64_t k0 = 0, k1 = 0;
};

struct philox_ctr {
  std::uint64_t c0 = 0, c1 = 0, c2 = 0, c3 = 0;
};

namespace detail {

// Multiplier and key-schedule (Weyl) constants for the 4x64 variant.
inline constexpr std::uint64_t philox_m0 = 0xD2E7470EE14C6C93ull;
inline constexpr std::uint64_t philox_m1 = 0xCA5A826395121157ull;
inline constexpr std::uint64_t philox_w0 = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t philox_w1 = 0xBB67AE8584CAA73Bull;

inline std::uint64_t mulhi64(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b)) >> 64);
}

}  // namespace detail

/// One 256-bit Philox 4x64 block with 10 rounds.
inline philox_ctr philox4x64_10(philox_ctr c, philox_key k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t hi0 = detail::mulhi64(detail::philox_m0, c.c0);
    const std::uint64_t lo0 = detail::philox_m0 * c.c0;
    const std::uint64_t hi1 = detail::mulhi64(detail::philox_m1, c.c2);
    const std::uint64_t lo1 = detail::philox_m1 * c.c2;
    c = {hi1 ^ c.c1 ^ k.k0, lo1, hi0 ^ c.c3 ^ k.k1, lo0};
    k.k0 += detail::philox_w0;
    k.k1 += detail::philox_w1;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Inverse standard-normal CDF (Wichura's PPND16 rational approximations,
// accurate to ~1e-16 relative over the full double range).
// ---------------------------------------------------------------------------

inline double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                   6.7265770927008700853e+4) *
                      r +
                  4.5921953931549871457e+4) *
                     r +
                 1.3731693765509461125e+4) *
                    r +
                1.9715909503065514427e+3) *
                   r +
               1.3314166789178437745e+2) *
                  r +
              3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) *
                 r +
             2.1213794301586595867e+4) *
                r +
            5.3941960214247511077e+3) *
               r +
           6.8718700749205790830e+2) *
              r +
          4.2313330701600911252e+1) *
             r +
         1.0);
    return num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  if (!(r > 0.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e+0) *
                r +
            3.64784832476320460504e+0) *
               r +
           5.76949722146069140550e+0) *
              r +
          4.63033784615654529590e+0) *
             r +
         1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e+0) *
              r +
          2.05319162663775882187e+0) *
             r +
         1.0);
    x = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e+0) *
              r +
          5.46378491116411436990e+0) *
             r +
         6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    x = num / den;
  }
  return q < 0.0 ? -x : x;
}

// ---------------------------------------------------------------------------
// Word-to-sample transforms.  Hot loops that walk raw counter blocks apply
// these directly; the buffered generator below routes through the very same
// functions, so both paths produce bit-identical values from a given word.
// ---------------------------------------------------------------------------

/// Uniform on (0,1): 53 mantissa bits, centered so the mean is exactly 1/2
/// and neither endpoint is reachable.
inline double uniform01_from_word(std::uint64_t w) {
  return (static_cast<double>(w >> 11) + 0.5) * 0x1p-53;
}

/// Standard normal via the inverse CDF (one word per draw; no rejection
/// loops, so the word count per matrix row is fixed).
inline double normal_from_word(std::uint64_t w) {
  return normal_quantile(uniform01_from_word(w));
}

/// Uniform on [-sqrt(3), sqrt(3)]: zero mean, unit variance.
inline double uniform_unit_var_from_word(std::uint64_t w) {
  constexpr double sqrt3 = 1.7320508075688772935;
  return (2.0 * uniform01_from_word(w) - 1.0) * sqrt3;
}

/// Rademacher +/-1 from the top bit.  Branch-free: the bit is a fair coin
/// flip, which a conditional would mispredict half the time.
inline double sign_from_word(std::uint64_t w) {
  return 1.0 - 2.0 * static_cast<double>(w >> 63);
}

// ---------------------------------------------------------------------------
// Word stream over consecutive block counters, plus distribution samplers.
// ---------------------------------------------------------------------------

/// Emits the four words of the block at the construction counter, then
/// advances c0 by one block at a time.  Streams here are short (a few
/// thousand blocks), so only c0 carries the block index.
class philox_gen {
 public:
  philox_gen(philox_key key, philox_ctr start) : key_(key), ctr_(start) {}

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      const philox_ctr out = philox4x64_10(ctr_, key_);
      buf_ = {out.c0, out.c1, out.c2, out.c3};
      ++ctr_.c0;
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  double next_uniform01() { return uniform01_from_word(next_u64()); }

  double next_normal() { return normal_from_word(next_u64()); }

  double next_uniform_unit_var() { return uniform_unit_var_from_word(next_u64()); }

  double next_sign() { return sign_from_word(next_u64()); }

 private:
  philox_key key_;
  philox_ctr ctr_;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace kerneldyn
