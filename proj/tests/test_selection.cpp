#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <vector>

#include "bopq/benchmarks.hpp"
#include "bopq/cache.hpp"
#include "bopq/quotient.hpp"
#include "bopq/rng.hpp"
#include "bopq/selection.hpp"

using namespace bopq;

namespace {

DistanceCache tiger_t4_cache() {
  static DistanceCache cache = [] {
    Pomdp M = tiger_full();
    ProbeFamily fam = enumerate_stationary(2, M.A, M.O);
    return build_cache(M, fam, 4, M.obs_metric);
  }();
  return cache;
}

}  // namespace

TEST_CASE("coverage basics") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  CHECK(coverage(cache, {}) == 0.0);
  std::vector<int> all(size_t(cache.probes));
  for (int p = 0; p < cache.probes; ++p) all[size_t(p)] = p;
  ProbeEnvelope env = envelope(cache);
  double total = 0;
  for (const auto& depth : env.d)
    for (double v : depth) total += v;
  CHECK(coverage(cache, all) == doctest::Approx(total).epsilon(1e-12));
  CHECK_THROWS_AS(coverage(cache, {cache.probes}), std::out_of_range);
}

TEST_CASE("coverage is monotone and submodular on random chains") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  Rng rng = Rng::substream(777, 0, 0);
  for (int trial = 0; trial < 100; ++trial) {
    // Random nested A subset of B, and an extra probe x outside B.
    std::vector<int> a, b;
    int x = int(rng.next_int(uint64_t(cache.probes)));
    for (int p = 0; p < cache.probes; ++p) {
      if (p == x) continue;
      double r = rng.next_double();
      if (r < 0.3) a.push_back(p);
      if (r < 0.6) b.push_back(p);
    }
    double fa = coverage(cache, a), fb = coverage(cache, b);
    CHECK(fb >= fa - 1e-12);  // monotone
    auto plus = [&](std::vector<int> s) {
      s.push_back(x);
      return coverage(cache, s);
    };
    CHECK(plus(a) - fa >= plus(b) - fb - 1e-12);  // diminishing gains
  }
}

TEST_CASE("greedy chain: full budget reaches zero gap, delta_S non-increasing") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  SubsetSelection sel = greedy_select(cache, cache.probes);
  CHECK(sel.final_delta_s == 0.0);
  for (size_t t = 1; t < sel.delta_s.size(); ++t) {
    CHECK(sel.delta_s[t] <= sel.delta_s[t - 1] + 1e-12);
    CHECK(sel.coverage[t] >= sel.coverage[t - 1] - 1e-12);
  }
  // Distinct indices.
  std::vector<int> sorted = sel.indices;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("greedy achieves (1-1/e) of brute-force optimum on small families") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  DistanceCache full = build_cache(M, fam, 4, M.obs_metric);
  REQUIRE(full.probes <= 12);
  for (int k = 1; k <= full.probes; ++k) {
    SubsetSelection sel = greedy_select(full, k);
    double best = 0;
    std::vector<int> subset;
    std::function<void(int)> rec = [&](int start) {
      if (int(subset.size()) == k) {
        best = std::max(best, coverage(full, subset));
        return;
      }
      for (int p = start; p < full.probes; ++p) {
        subset.push_back(p);
        rec(p + 1);
        subset.pop_back();
      }
    };
    rec(0);
    CHECK(sel.coverage.back() >= (1.0 - std::exp(-1.0)) * best - 1e-12);
  }
}

TEST_CASE("Table-4 tiger delta_S chain 0.980 / 0.245 / 0.000") {
  DistanceCache cache = tiger_t4_cache();
  SubsetSelection sel = greedy_select(cache, 5);
  CHECK(sel.delta_s[0] == doctest::Approx(0.980).epsilon(1e-3));
  CHECK(sel.delta_s[2] == doctest::Approx(0.245).epsilon(1e-3));
  CHECK(sel.delta_s[4] <= 1e-9);
  // k=5 subset envelope equals the full envelope within 1e-12.
  ProbeEnvelope full = envelope(cache);
  ProbeEnvelope sub = envelope(cache, &sel.indices);
  for (size_t d = 0; d < full.d.size(); ++d)
    for (size_t u = 0; u < full.d[d].size(); ++u)
      CHECK(std::abs(full.d[d][u] - sub.d[d][u]) <= 1e-12);
  // delta_S = 0 subset reproduces the exact partition: ARI 1.0.
  DistanceCache subcache = cache;
  // Rebuild partitions through envelopes: exact partition from each.
  Partition pf = exact_partition(cache);
  // Build a cache view restricted to the subset by zeroing other probes.
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(2, M.A, M.O);
  ProbeFamily sub5;
  sub5.kind = fam.kind;
  sub5.m = fam.m;
  sub5.T = fam.T;
  for (int p : sel.indices) sub5.members.push_back(fam.members[size_t(p)]);
  DistanceCache c5 = build_cache(M, sub5, 4, M.obs_metric);
  Partition ps = exact_partition(c5);
  CHECK(adjusted_rand_index(collapse_terminal(pf), collapse_terminal(ps)) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gridworld greedy k=3 closes the probe gap") {
  Pomdp M = gridworld(3);
  ProbeFamily fam = enumerate_stationary(2, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 2, M.obs_metric);
  SubsetSelection sel = greedy_select(cache, 3);
  CHECK(sel.final_delta_s <= 1e-9);
}

TEST_CASE("selection CSV artifact") {
  Pomdp M = tiger_full();
  ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
  DistanceCache cache = build_cache(M, fam, 3, M.obs_metric);
  SubsetSelection sel = greedy_select(cache, 2);
  save_selection_csv(sel, "selection_test.csv");
  std::FILE* f = std::fopen("selection_test.csv", "r");
  REQUIRE(f);
  char line[256];
  REQUIRE(std::fgets(line, sizeof line, f));
  CHECK(std::string(line) == "step,probe_id,marginal_gain,coverage,delta_S_so_far\n");
  int rows = 0;
  while (std::fgets(line, sizeof line, f)) ++rows;
  std::fclose(f);
  std::remove("selection_test.csv");
  CHECK(rows == 2);
}

TEST_CASE("effective rank: rank-1 matrix and paper anchors") {
  // Rank-1 matrix -> 1 at any fraction.
  std::vector<std::vector<double>> one = {{1, 2, 3}, {2, 4, 6}, {0.5, 1, 1.5}};
  auto ev = detail::squared_singular_values(one);
  CHECK(ev[0] > 0);
  for (size_t i = 1; i < ev.size(); ++i) CHECK(ev[i] <= 1e-12 * ev[0]);

  DistanceCache cache = tiger_t4_cache();
  CHECK(effective_rank(cache, 3, 0.99) == 7);

  Pomdp G = gridworld(3);
  ProbeFamily gf = enumerate_stationary(2, G.A, G.O);
  DistanceCache gc = build_cache(G, gf, 2, G.obs_metric);
  CHECK(effective_rank(gc, 1, 0.99) == 5);

  Pomdp Tm1 = tiger_full();
  ProbeFamily f1 = enumerate_stationary(1, Tm1.A, Tm1.O);
  DistanceCache c1 = build_cache(Tm1, f1, 4, Tm1.obs_metric);
  CHECK(effective_rank(c1, 3, 0.90) == 1);
  CHECK(effective_rank(c1, 3, 0.99) == 1);

  CHECK_THROWS_AS(effective_rank(cache, 3, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(effective_rank(cache, 0, 0.99), std::out_of_range);
}

TEST_CASE("hankel rank diagnostics") {
  Pomdp one;
  one.name = "point";
  one.S = 1;
  one.A = 1;
  one.O = 2;
  one.P = {{{1.0}}};
  one.Z = {{{1.0, 0.0}}};  // deterministic emission
  one.R = {{0.0}};
  one.b0 = {1.0};
  one.obs_metric = GroundMetric::discrete(2);
  CHECK(hankel_rank(one, 2) == 1);
  CHECK(hankel_rank(one, 4) == 1);

  Pomdp lo = tiger_listen_only();
  CHECK(hankel_rank(lo, 2) <= 2);

  // Diagnostic only: record the gridworld value without gating.
  Pomdp G = gridworld(3);
  int r = hankel_rank(G, 2);
  CHECK(r >= 1);
  MESSAGE("gridworld 3x3 T=2 hankel rank = ", r);

  CHECK_THROWS_AS(hankel_rank(G, 1), std::invalid_argument);
}
