#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace bopq {

// Counter-based RNG: every (master_seed, stream, counter) triple yields an
// independent deterministic value sequence, so parallel and serial runs agree.
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}

  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Substream for (stream, counter), derived from a master seed.
  static Rng substream(uint64_t master, uint64_t stream, uint64_t counter) {
    uint64_t s = mix(master ^ mix(stream));
    return Rng(mix(s ^ mix(counter)));
  }

  uint64_t next_u64() {
    state = mix(state);
    return state;
  }

  double next_double() {  // uniform [0,1)
    return double(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Index sampled from an unnormalized weight vector.
  int next_index(const std::vector<double>& w) {
    double tot = 0;
    for (double x : w) tot += x;
    double u = next_double() * tot;
    double acc = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return int(i);
    }
    return int(w.size()) - 1;
  }

  int next_int(int n) { return int(next_u64() % uint64_t(n)); }

  // Dirichlet(alpha,...,alpha) via Gamma(alpha) marginals (Marsaglia-Tsang,
  // with the alpha<1 boost); alpha=1.0 reduces to exponential spacings.
  std::vector<double> next_dirichlet(int n, double alpha) {
    std::vector<double> g(n);
    double tot = 0;
    for (int i = 0; i < n; ++i) {
      g[i] = next_gamma(alpha);
      tot += g[i];
    }
    for (int i = 0; i < n; ++i) g[i] /= tot;
    return g;
  }

  double next_gamma(double alpha) {
    if (alpha < 1.0) {
      double u = next_double();
      while (u <= 0) u = next_double();
      return next_gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0) continue;
      v = v * v * v;
      double u = next_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double next_normal() {
    // Box-Muller; one value per call keeps the stream stateless-ish.
    double u1 = next_double(), u2 = next_double();
    while (u1 <= 1e-300) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

}  // namespace bopq
