#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bopq/benchmarks.hpp"
#include "bopq/cache.hpp"

using namespace bopq;

TEST_CASE("tiger listen-only cache distance 0.49") {
  Pomdp M = tiger_listen_only();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 2, M.obs_metric);
  HistoryId hL = history_from_obs({0}, 2), hR = history_from_obs({1}, 2);
  CHECK(cache.entry(1, hL.index, hR.index, 0) == doctest::Approx(0.49).epsilon(1e-9));
  CHECK(history_distance(cache, hL, hR) == doctest::Approx(0.49).epsilon(1e-9));
  CHECK(history_distance(cache, hL, hL) == 0.0);
}

TEST_CASE("cache is deterministic across serial and parallel builds") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(2, M.A, M.O);
  BuildOptions serial;
  serial.threads = 1;
  BuildOptions parallel;
  parallel.threads = 4;
  DistanceCache c1 = build_cache(M, fam, 3, M.obs_metric, serial);
  DistanceCache c2 = build_cache(M, fam, 3, M.obs_metric, parallel);
  for (int d = 1; d <= 3; ++d) {
    REQUIRE(c1.D[d].size() == c2.D[d].size());
    for (size_t i = 0; i < c1.D[d].size(); ++i) CHECK(std::abs(c1.D[d][i] - c2.D[d][i]) <= 1e-12);
  }
}

TEST_CASE("witness stationary deterministic family distinguishes nothing") {
  Pomdp M = stationary_witness();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  HistoryId hL = history_from_obs({0}, M.O), hR = history_from_obs({1}, M.O);
  for (int p = 0; p < cache.probes; ++p) CHECK(cache.entry(1, hL.index, hR.index, p) == 0.0);
  CHECK(history_distance(cache, hL, hR) == 0.0);
}

TEST_CASE("witness stochastic half-half controller separates L and R") {
  Pomdp M = stationary_witness();
  StochasticFsc f;
  f.m = 1;
  f.alpha = {{0.5, 0.5}};
  f.beta = {{{1.0}, {1.0}, {1.0}, {1.0}, {1.0}}};
  ProbeFamily fam{ProbeKind::StochasticSampled, 1, 0, {f}};
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  HistoryId hL = history_from_obs({0}, M.O), hR = history_from_obs({1}, M.O);
  CHECK(history_distance(cache, hL, hR) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("witness clock-aware m=1 T=3 separates L and R") {
  Pomdp M = stationary_witness();
  ProbeFamily fam = enumerate_clock_aware(1, 3, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  HistoryId hL = history_from_obs({0}, M.O), hR = history_from_obs({1}, M.O);
  CHECK(history_distance(cache, hL, hR) > 0.0);
}

TEST_CASE("monotonicity in the probe family") {
  Pomdp M = tiger_full();
  ProbeFamily small = enumerate_stationary(1, M.A, M.O);
  ProbeFamily big = enumerate_stationary(2, M.A, M.O);
  DistanceCache cs = build_cache(M, small, 3, M.obs_metric);
  DistanceCache cb = build_cache(M, big, 3, M.obs_metric);
  for (int d = 1; d <= 3; ++d) {
    int64_t n = ipow(M.O, d);
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = i + 1; j < n; ++j)
        CHECK(history_distance(cs, {d, i}, {d, j}) <=
              history_distance(cb, {d, i}, {d, j}) + 1e-12);
  }
}

TEST_CASE("envelope subset dominance and delta_s") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(2, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  std::vector<int> all(cache.probes);
  for (int p = 0; p < cache.probes; ++p) all[p] = p;
  CHECK(delta_s(cache, all) == 0.0);
  std::vector<int> single = {0};
  ProbeEnvelope full = envelope(cache);
  ProbeEnvelope sub = envelope(cache, &single);
  for (int d = 1; d <= 3; ++d)
    for (size_t k = 0; k < full.d[d].size(); ++k) CHECK(sub.d[d][k] <= full.d[d][k] + 1e-15);
  CHECK(delta_s(cache, single) >= 0.0);
  CHECK_THROWS(envelope(cache, [] {
    static std::vector<int> bad = {1 << 30};
    return &bad;
  }()));
}

TEST_CASE("model distance pseudometric axioms on random models") {
  GroundMetric disc = GroundMetric::discrete(3);
  ProbeFamily fam = enumerate_stationary(1, 4, 3);
  Pomdp A = random_pomdp(5, 3, 11);
  Pomdp B = random_pomdp(5, 3, 12);
  Pomdp C = random_pomdp(5, 3, 13);
  int T = 2;
  double dab = model_distance(A, B, fam, T, disc);
  double dba = model_distance(B, A, fam, T, disc);
  double dac = model_distance(A, C, fam, T, disc);
  double dcb = model_distance(C, B, fam, T, disc);
  CHECK(model_distance(A, A, fam, T, disc) == 0.0);
  CHECK(dab == doctest::Approx(dba).epsilon(1e-12));
  CHECK(dab <= dac + dcb + 1e-8);
}

TEST_CASE("cross-family gap is nonnegative and zero for identical families") {
  Pomdp M = tiger_full();
  ProbeFamily op = enumerate_stationary(1, M.A, M.O);
  ProbeFamily clk = enumerate_clock_aware(1, 2, M.A, M.O);
  DistanceCache cop = build_cache(M, op, 2, M.obs_metric);
  DistanceCache cclk = build_cache(M, clk, 2, M.obs_metric);
  CHECK(delta_cross_family(cop, cop) == 0.0);
  CHECK(delta_cross_family(cclk, cop) >= 0.0);
}

TEST_CASE("perturbation shift obeys the 4T-delta bound") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  auto zero = perturb_and_bound(M, fam, 2, M.obs_metric, 0.0, 1);
  CHECK(zero.shift == 0.0);
  for (double delta : {0.01, 0.05})
    for (uint64_t seed = 0; seed < 20; ++seed) {
      auto r = perturb_and_bound(M, fam, 2, M.obs_metric, delta, seed);
      CHECK(r.bound == doctest::Approx(8.0 * delta));
      CHECK(r.shift <= r.bound);
    }
}

TEST_CASE("cache round trips through the binary artifact") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  std::string path = "cache_roundtrip.bin";
  save_cache_binary(cache, path);
  DistanceCache back = load_cache_binary(path);
  CHECK(back.T == cache.T);
  CHECK(back.probes == cache.probes);
  CHECK(back.family_desc == cache.family_desc);
  for (int d = 1; d <= 3; ++d) {
    REQUIRE(back.D[d] == cache.D[d]);
    REQUIRE(back.reach[d] == cache.reach[d]);
  }
  save_cache_csv(cache, "cache_roundtrip.csv");
  std::remove(path.c_str());
  std::remove("cache_roundtrip.csv");
}

TEST_CASE("size guard rejects oversized caches") {
  Pomdp M = gridworld(3);
  ProbeFamily fam = enumerate_stationary(2, M.A, M.O);
  BuildOptions opt;
  opt.cell_cap = 100;
  CHECK_THROWS_AS(build_cache(M, fam, 2, M.obs_metric, opt), std::length_error);
}
