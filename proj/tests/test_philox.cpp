#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "kerneldyn/philox.hpp"
#include "support/test_oracles.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace kerneldyn;

TEST_CASE("block function reproduces the reference vectors") {
  for (const auto& kat : oracle::philox_kats()) {
    const philox_key key{kat.key[0], kat.key[1]};
    const philox_ctr c1{kat.ctr[0], kat.ctr[1], kat.ctr[2], kat.ctr[3]};
    const philox_ctr b1 = philox4x64_10(c1, key);
    REQUIRE(b1.c0 == kat.words[0]);
    REQUIRE(b1.c1 == kat.words[1]);
    REQUIRE(b1.c2 == kat.words[2]);
    REQUIRE(b1.c3 == kat.words[3]);
    const philox_ctr c2{kat.ctr[0] + 1, kat.ctr[1], kat.ctr[2], kat.ctr[3]};
    const philox_ctr b2 = philox4x64_10(c2, key);
    REQUIRE(b2.c0 == kat.words[4]);
    REQUIRE(b2.c1 == kat.words[5]);
    REQUIRE(b2.c2 == kat.words[6]);
    REQUIRE(b2.c3 == kat.words[7]);
  }
}

TEST_CASE("generator walks blocks in counter order") {
  for (const auto& kat : oracle::philox_kats()) {
    philox_gen gen({kat.key[0], kat.key[1]}, {kat.ctr[0], kat.ctr[1], kat.ctr[2], kat.ctr[3]});
    for (int i = 0; i < 8; ++i) {
      REQUIRE(gen.next_u64() == kat.words[i]);
    }
  }
}

TEST_CASE("inverse normal CDF matches the reference table") {
  for (const auto& ref : oracle::ppf_table()) {
    INFO("p = " << ref.p);
    if (ref.x == 0.0) {
      REQUIRE(normal_quantile(ref.p) == 0.0);
    } else {
      REQUIRE_THAT(normal_quantile(ref.p), WithinRel(ref.x, 1e-13));
    }
  }
}

TEST_CASE("inverse normal CDF is the inverse of the normal CDF") {
  for (double p : {1e-10, 1e-4, 0.001, 0.1, 0.3, 0.5, 0.7, 0.999, 0.99999}) {
    REQUIRE_THAT(normal_cdf(normal_quantile(p)), WithinRel(p, 1e-11));
  }
  // Antisymmetry about 1/2.  (In the far tail the rounding of 1-p is
  // amplified by 1/pdf(z), so the achievable tolerance widens there.)
  for (double p : {0.123, 0.025, 0.4999}) {
    REQUIRE_THAT(normal_quantile(p) + normal_quantile(1.0 - p), WithinAbs(0.0, 1e-13));
  }
  REQUIRE_THAT(normal_quantile(1e-6) + normal_quantile(1.0 - 1e-6), WithinAbs(0.0, 1e-10));
  REQUIRE_THROWS_AS(normal_quantile(0.0), std::domain_error);
  REQUIRE_THROWS_AS(normal_quantile(1.0), std::domain_error);
  REQUIRE_THROWS_AS(normal_quantile(-0.5), std::domain_error);
  REQUIRE_THROWS_AS(normal_quantile(1.5), std::domain_error);
}

TEST_CASE("uniform variates stay strictly inside the unit interval") {
  philox_gen gen({42, 0}, {0, 0, 0, 0});
  philox_gen twin({42, 0}, {0, 0, 0, 0});
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = gen.next_uniform01();
    // Same construction from the raw word: top 53 bits, centered half-step.
    const double expect = (double(twin.next_u64() >> 11) + 0.5) * 0x1p-53;
    REQUIRE(u == expect);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  REQUIRE(lo > 0.0);
  REQUIRE(hi < 1.0);
  REQUIRE_THAT(sum / n, WithinAbs(0.5, 4.0 / std::sqrt(12.0 * n)));
}

TEST_CASE("samplers have unit variance and zero mean") {
  const int n = 1000000;
  auto check = [&](auto draw, const char* label) {
    philox_gen gen({7, 3}, {0, 1, 2, 3});
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = draw(gen);
      s1 += x;
      s2 += x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    INFO(label);
    REQUIRE(std::abs(mean) <= 4e-3);
    REQUIRE(var > 0.995);
    REQUIRE(var < 1.005);
  };
  check([](philox_gen& g) { return g.next_normal(); }, "gaussian");
  check([](philox_gen& g) { return g.next_uniform_unit_var(); }, "uniform_unit_var");
  check([](philox_gen& g) { return g.next_sign(); }, "rademacher");
}

TEST_CASE("bounded samplers respect their supports") {
  philox_gen gen({1, 2}, {3, 4, 5, 6});
  const double bound = std::sqrt(3.0) + 1e-15;
  for (int i = 0; i < 10000; ++i) {
    REQUIRE(std::abs(gen.next_uniform_unit_var()) <= bound);
  }
  philox_gen gs({1, 2}, {3, 4, 5, 6});
  for (int i = 0; i < 1000; ++i) {
    const double s = gs.next_sign();
    REQUIRE((s == 1.0 || s == -1.0));
  }
}

TEST_CASE("streams are reproducible and separated by key and counter") {
  auto first_words = [](philox_key k, philox_ctr c) {
    philox_gen g(k, c);
    std::vector<std::uint64_t> out;
    for (int i = 0; i < 8; ++i) out.push_back(g.next_u64());
    return out;
  };
  const auto base = first_words({5, 9}, {0, 2, 1, 7});
  REQUIRE(base == first_words({5, 9}, {0, 2, 1, 7}));  // deterministic
  // Any single coordinate change moves the whole stream.
  REQUIRE(base != first_words({6, 9}, {0, 2, 1, 7}));
  REQUIRE(base != first_words({5, 10}, {0, 2, 1, 7}));
  REQUIRE(base != first_words({5, 9}, {1, 2, 1, 7}));
  REQUIRE(base != first_words({5, 9}, {0, 3, 1, 7}));
  REQUIRE(base != first_words({5, 9}, {0, 2, 2, 7}));
  REQUIRE(base != first_words({5, 9}, {0, 2, 1, 8}));
  // Words within and across nearby streams are all distinct (bijection).
  std::set<std::uint64_t> seen(base.begin(), base.end());
  size_t expected = base.size();
  for (std::uint64_t row = 0; row < 32; ++row) {
    const auto w = first_words({5, 9}, {0, 2, 1, 100 + row});
    seen.insert(w.begin(), w.end());
    expected += w.size();
  }
  REQUIRE(seen.size() == expected);
}

TEST_CASE("normal draws compose quantile with uniform") {
  philox_gen a({11, 13}, {0, 0, 0, 0});
  philox_gen b({11, 13}, {0, 0, 0, 0});
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(a.next_normal() == normal_quantile(b.next_uniform01()));
  }
}
