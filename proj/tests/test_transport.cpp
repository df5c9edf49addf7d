#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "bopq/rng.hpp"
#include "bopq/transport.hpp"

using namespace bopq;

namespace {

std::vector<double> random_dist(Rng& rng, int n) {
  auto d = rng.next_dirichlet(n, 1.0);
  return d;
}

}  // namespace

TEST_CASE("w1 matches total variation for the discrete metric") {
  Rng rng = Rng::substream(12345, 1, 0);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + int(rng.next_int(6));
    auto p = random_dist(rng, n);
    auto q = random_dist(rng, n);
    double w = w1_exact_cost(p, q, [](int i, int j) { return i == j ? 0.0 : 1.0; });
    double tv = total_variation_dense(p, q);
    CHECK(std::abs(w - tv) <= 1e-9);
  }
}

TEST_CASE("w1 matches the sorted-CDF formula on the line") {
  Rng rng = Rng::substream(12345, 2, 0);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + int(rng.next_int(6));
    std::vector<double> coords(n);
    for (int i = 0; i < n; ++i) coords[i] = 3.0 * rng.next_double();
    auto p = random_dist(rng, n);
    auto q = random_dist(rng, n);
    double w = w1_exact_cost(p, q, [&](int i, int j) { return std::abs(coords[i] - coords[j]); });
    double line = w1_line_oracle(coords, p, coords, q);
    CHECK(std::abs(w - line) <= 1e-9);
  }
}

TEST_CASE("w1 matches vertex enumeration on small supports") {
  Rng rng = Rng::substream(12345, 3, 0);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + int(rng.next_int(3));
    int m = 2 + int(rng.next_int(3));
    auto p = random_dist(rng, n);
    auto q = random_dist(rng, m);
    std::vector<std::vector<double>> cost(n, std::vector<double>(m));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) cost[i][j] = rng.next_double();
    auto c = [&](int i, int j) { return cost[i][j]; };
    double w = w1_exact_cost(p, q, c);
    double v = w1_vertex_oracle(p, q, c);
    CHECK(std::abs(w - v) <= 1e-9);
  }
}

TEST_CASE("w1 basic properties") {
  Rng rng = Rng::substream(777, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + int(rng.next_int(4));
    auto p = random_dist(rng, n);
    auto q = random_dist(rng, n);
    auto r = random_dist(rng, n);
    std::vector<std::vector<double>> base(n, std::vector<double>(n, 0.0));
    // Random metric: symmetrize a random matrix, then metric-close it.
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) base[i][j] = base[j][i] = 0.2 + rng.next_double();
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          base[i][j] = std::min(base[i][j], base[i][k] + base[k][j]);
    auto cost = [&](int i, int j) { return base[i][j]; };
    double wpq = w1_exact_cost(p, q, cost);
    double wqp = w1_exact_cost(q, p, cost);
    double wpr = w1_exact_cost(p, r, cost);
    double wrq = w1_exact_cost(r, q, cost);
    CHECK(std::abs(wpq - wqp) <= 1e-10);          // symmetry
    CHECK(wpq >= -1e-12);                          // nonnegativity
    CHECK(wpq <= wpr + wrq + 1e-9);                // triangle inequality
    CHECK(w1_exact_cost(p, p, cost) <= 1e-12);     // identity
  }
}

TEST_CASE("sequence cost sums per-position ground distances") {
  GroundMetric disc = GroundMetric::discrete(2);
  CHECK(sequence_cost_indexed(0, 0, 3, 2, disc) == 0.0);
  CHECK(sequence_cost_indexed(0b101, 0b100, 3, 2, disc) == 1.0);
  CHECK(sequence_cost_indexed(0b111, 0b000, 3, 2, disc) == 3.0);
}

TEST_CASE("total variation on sparse supports") {
  DiscreteDistribution p{{0, 2}, {0.5, 0.5}};
  DiscreteDistribution q{{0, 1}, {0.25, 0.75}};
  CHECK(total_variation(p, q) == doctest::Approx(0.75));
  CHECK(total_variation(p, p) == 0.0);
}
