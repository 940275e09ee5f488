// Throughput micro-benchmark for the random-feature hot path: raw counter
// blocks, the three weight samplers, and the pair matvec that dominates the
// finite-width simulation.  Prints ns/op and an estimate for the standard
// validation sweep (3 activations x 3 distributions, d = 4096, L = 10, M = 32).

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "kerneldyn/mc_sim.hpp"
#include "kerneldyn/philox.hpp"

using namespace kerneldyn;

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct timing {
  double seconds;
  double ns_per_op;
};

template <class F>
timing bench(std::uint64_t n, F&& body) {
  const double t0 = now_s();
  body();
  const double dt = now_s() - t0;
  return {dt, 1e9 * dt / static_cast<double>(n)};
}

volatile double sink;  // keep the optimizer honest

}  // namespace

int main() {
  const philox_key key{1234, 5678};

  {
    const std::uint64_t n = 1u << 23;  // blocks of four words
    const auto t = bench(n, [&] {
      std::uint64_t acc = 0;
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto w = philox4x64_10(philox_ctr{i, 0, 0, 0}, key);
        acc += w.c0 + w.c1 + w.c2 + w.c3;
      }
      sink = static_cast<double>(acc);
    });
    std::printf("%-28s %8.2f ns/block  (%.2f ns/word, %.1f s)\n", "raw counter block",
                t.ns_per_op, t.ns_per_op / 4.0, t.seconds);
  }

  const auto bench_sampler = [&](const char* name, auto&& draw) {
    const std::uint64_t n = 1u << 25;
    philox_gen gen(key, philox_ctr{0, 0, 0, 0});
    const auto t = bench(n, [&] {
      double acc = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) acc += draw(gen);
      sink = acc;
    });
    std::printf("%-28s %8.2f ns/draw  (%.1f s)\n", name, t.ns_per_op, t.seconds);
    return t.ns_per_op;
  };
  bench_sampler("uniform01", [](philox_gen& g) { return g.next_uniform01(); });
  bench_sampler("gaussian draw", [](philox_gen& g) { return g.next_normal(); });
  bench_sampler("uniform unit-var draw",
                [](philox_gen& g) { return g.next_uniform_unit_var(); });
  bench_sampler("rademacher draw", [](philox_gen& g) { return g.next_sign(); });

  // Pair matvec at the validation width: one layer of one trial.
  const int d = 4096;
  std::vector<std::vector<double>> h(2, std::vector<double>(d, 0.5));
  std::vector<std::vector<double>> out(2, std::vector<double>(d));
  double sweep_eta = 0.0;
  for (const auto dist :
       {weight_dist::gaussian, weight_dist::uniform_unit_var, weight_dist::rademacher}) {
    const std::uint64_t n = static_cast<std::uint64_t>(d) * d;
    const int reps = 3;
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
      const auto t = bench(n, [&] {
        detail::sampled_matvec(dist, h, out, key, 1, weight_matrix_id);
        sink = out[0][0];
      });
      if (t.seconds < best) best = t.seconds;
    }
    std::printf("pair matvec d=%d %-12s %8.2f ms  (%.2f ns/weight)\n", d, to_string(dist),
                1e3 * best, 1e9 * best / static_cast<double>(n));
    // Each (activation, distribution) run: L matvecs per trial, M trials,
    // with the skip branch disabled.
    sweep_eta += 3.0 * best * 10.0 * 32.0;
  }
  std::printf("\nvalidation sweep estimate (9 runs, d=4096, L=10, M=32): %.0f s\n", sweep_eta);
  return 0;
}
