#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bopq/pomdp.hpp"

namespace bopq {

// Distribution over sequence indices (or plain symbol indices).
struct DiscreteDistribution {
  std::vector<int64_t> support;
  std::vector<double> mass;

  void validate(double tol = 1e-10) const {
    double s = 0;
    for (double m : mass) {
      if (m < -tol) throw std::invalid_argument("negative mass");
      s += m;
    }
    if (std::abs(s - 1.0) > tol) throw std::invalid_argument("mass does not sum to 1");
  }
};

// Summed per-position ground cost between equal-length observation sequences.
inline double sequence_cost(const std::vector<int>& x, const std::vector<int>& y,
                            const GroundMetric& metric) {
  if (x.size() != y.size()) throw std::invalid_argument("sequence length mismatch");
  double c = 0;
  for (size_t i = 0; i < x.size(); ++i) c += metric(x[i], y[i]);
  return c;
}

inline double sequence_cost_indexed(int64_t xi, int64_t yi, int len, int O,
                                    const GroundMetric& metric) {
  double c = 0;
  for (int t = 0; t < len; ++t) {
    c += metric(int(xi % O), int(yi % O));
    xi /= O;
    yi /= O;
  }
  return c;
}

// Exact optimal transport between two discrete distributions given a cost
// callback over (support index of p, support index of q). Successive shortest
// augmenting paths with node potentials on the bipartite graph; exact up to
// floating-point arithmetic, deterministic.
inline double w1_exact_cost(const std::vector<double>& p, const std::vector<double>& q,
                            const std::function<double(int, int)>& cost) {
  int n = int(p.size()), m = int(q.size());
  if (n == 0 || m == 0) throw std::invalid_argument("empty support");
  std::vector<double> supply = p, demand = q;
  // Normalize total mass mismatch (inputs are validated distributions; this
  // guards against 1e-12 drift only).
  double sp = 0, sq = 0;
  for (double x : supply) sp += x;
  for (double x : demand) sq += x;
  if (std::abs(sp - sq) > 1e-9) throw std::invalid_argument("marginal mass mismatch");

  // Dense cost matrix over supports (supports are small by construction).
  std::vector<std::vector<double>> C(n, std::vector<double>(m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) C[i][j] = cost(i, j);

  std::vector<std::vector<double>> flow(n, std::vector<double>(m, 0.0));
  std::vector<double> u(n, 0.0), v(m, 0.0);  // potentials
  const double INF = std::numeric_limits<double>::infinity();
  const double EPS = 1e-13;

  // Initialize potentials: v_j = min_i C true for reduced-cost nonnegativity.
  for (int i = 0; i < n; ++i) u[i] = 0;
  for (int j = 0; j < m; ++j) {
    double best = INF;
    for (int i = 0; i < n; ++i) best = std::min(best, C[i][j]);
    v[j] = best;
  }

  int src = -1;
  auto pick_source = [&]() {
    for (int i = 0; i < n; ++i)
      if (supply[i] > EPS) return i;
    return -1;
  };

  while ((src = pick_source()) >= 0) {
    // Dijkstra over bipartite residual graph from src, using reduced costs.
    std::vector<double> distL(n, INF), distR(m, INF);
    std::vector<int> prevR(m, -1);   // right node j reached from left prevR[j]
    std::vector<int> prevL(n, -1);   // left node i reached via right prevL[i]
    std::vector<bool> doneL(n, false), doneR(m, false);
    distL[src] = 0;
    int sink = -1;
    for (;;) {
      // Pick the unsettled node (either side) with smallest distance.
      double best = INF;
      int side = -1, idx = -1;
      for (int i = 0; i < n; ++i)
        if (!doneL[i] && distL[i] < best) best = distL[i], side = 0, idx = i;
      for (int j = 0; j < m; ++j)
        if (!doneR[j] && distR[j] < best) best = distR[j], side = 1, idx = j;
      if (idx < 0) break;
      if (side == 0) {
        doneL[idx] = true;
        for (int j = 0; j < m; ++j) {
          if (doneR[j]) continue;
          double rc = C[idx][j] - u[idx] - v[j];
          if (rc < 0) rc = 0;  // guard tiny negatives
          if (distL[idx] + rc < distR[j] - 1e-15) {
            distR[j] = distL[idx] + rc;
            prevR[j] = idx;
          }
        }
      } else {
        doneR[idx] = true;
        if (demand[idx] > EPS) {
          sink = idx;
          break;
        }
        // Residual arcs j -> i exist where flow[i][j] > 0, reduced cost 0
        // minus ... reverse reduced cost = -(C - u - v) = 0 at optimality of
        // used arcs, so traversal cost 0.
        for (int i = 0; i < n; ++i) {
          if (doneL[i] || flow[i][idx] <= EPS) continue;
          double rc = -(C[i][idx] - u[i] - v[idx]);
          if (rc < 0) rc = 0;
          if (distR[idx] + rc < distL[i] - 1e-15) {
            distL[i] = distR[idx] + rc;
            prevL[i] = idx;
          }
        }
      }
    }
    if (sink < 0) throw std::runtime_error("transport: no augmenting path");

    // Update potentials by settled distances.
    double dsink = distR[sink];
    for (int i = 0; i < n; ++i)
      if (distL[i] <= dsink) u[i] += dsink - distL[i];
    for (int j = 0; j < m; ++j)
      if (distR[j] <= dsink) v[j] -= dsink - distR[j];

    // Bottleneck along the path.
    double push = std::min(supply[src], demand[sink]);
    {
      int j = sink;
      while (j >= 0) {
        int i = prevR[j];
        int jprev = prevL[i];
        if (jprev >= 0) push = std::min(push, flow[i][jprev]);
        j = jprev;
      }
    }
    // Apply augmentation.
    {
      int j = sink;
      while (j >= 0) {
        int i = prevR[j];
        flow[i][j] += push;
        int jprev = prevL[i];
        if (jprev >= 0) flow[i][jprev] -= push;
        j = jprev;
      }
    }
    supply[src] -= push;
    demand[sink] -= push;
  }

  double total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) total += flow[i][j] * C[i][j];
  return total;
}

inline double w1_exact(const DiscreteDistribution& p, const DiscreteDistribution& q,
                       const std::function<double(int, int)>& cost) {
  p.validate();
  q.validate();
  return w1_exact_cost(p.mass, q.mass, cost);
}

// W1 between distributions over length-`len` observation sequences under the
// summed ground metric, with lazily built cost entries.
inline double w1_sequences(const DiscreteDistribution& p, const DiscreteDistribution& q, int len,
                           int O, const GroundMetric& metric) {
  return w1_exact_cost(p.mass, q.mass, [&](int i, int j) {
    return sequence_cost_indexed(p.support[i], q.support[j], len, O, metric);
  });
}

// Total variation over a shared dense universe given by index.
inline double total_variation(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  // Merge supports.
  double tv = 0;
  size_t i = 0, j = 0;
  std::vector<std::pair<int64_t, double>> a, b;
  for (size_t k = 0; k < p.support.size(); ++k) a.push_back({p.support[k], p.mass[k]});
  for (size_t k = 0; k < q.support.size(); ++k) b.push_back({q.support[k], q.mass[k]});
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i].first < b[j].first)) {
      tv += std::abs(a[i].second);
      ++i;
    } else if (i >= a.size() || b[j].first < a[i].first) {
      tv += std::abs(b[j].second);
      ++j;
    } else {
      tv += std::abs(a[i].second - b[j].second);
      ++i;
      ++j;
    }
  }
  return 0.5 * tv;
}

inline double total_variation_dense(const std::vector<double>& p, const std::vector<double>& q) {
  double tv = 0;
  for (size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

// Oracle B: 1-D W1 on the line via the CDF formula (support values are the
// embedded coordinates).
inline double w1_line_oracle(const std::vector<double>& coords_p, const std::vector<double>& mass_p,
                             const std::vector<double>& coords_q,
                             const std::vector<double>& mass_q) {
  struct Pt {
    double x, mp, mq;
  };
  std::vector<Pt> pts;
  for (size_t i = 0; i < coords_p.size(); ++i) pts.push_back({coords_p[i], mass_p[i], 0});
  for (size_t j = 0; j < coords_q.size(); ++j) pts.push_back({coords_q[j], 0, mass_q[j]});
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.x < b.x; });
  double w1 = 0, cdf_diff = 0;
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    cdf_diff += pts[k].mp - pts[k].mq;
    w1 += std::abs(cdf_diff) * (pts[k + 1].x - pts[k].x);
  }
  return w1;
}

// Oracle C: minimum over the transportation polytope's vertices. Every vertex
// is the basic solution of a spanning tree of the bipartite support graph, so
// enumerate all (n+m-1)-cell bases, solve each by leaf peeling, and keep the
// feasible (nonnegative) ones. Supports up to 4x4.
inline double w1_vertex_oracle(const std::vector<double>& p, const std::vector<double>& q,
                               const std::function<double(int, int)>& cost) {
  int n = int(p.size()), m = int(q.size());
  int cells = n * m, k = n + m - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(size_t(k), 0);
  for (int i = 0; i < k; ++i) pick[size_t(i)] = i;
  auto try_basis = [&]() {
    // Peel degree-1 rows/columns; the flow on a leaf's unique cell is forced.
    std::vector<int> rdeg(n, 0), cdeg(m, 0);
    std::vector<bool> used(size_t(cells), false);
    for (int c : pick) {
      used[size_t(c)] = true;
      ++rdeg[c / m];
      ++cdeg[c % m];
    }
    std::vector<double> rs = p, cs = q;
    int remaining = k;
    bool progress = true;
    double total = 0;
    while (remaining > 0 && progress) {
      progress = false;
      for (int c = 0; c < cells; ++c) {
        if (!used[size_t(c)]) continue;
        int i = c / m, j = c % m;
        if (rdeg[i] != 1 && cdeg[j] != 1) continue;
        double f = rdeg[i] == 1 ? rs[i] : cs[j];
        if (f < -1e-12) return;  // infeasible basic solution
        total += f * cost(i, j);
        rs[i] -= f;
        cs[j] -= f;
        used[size_t(c)] = false;
        --rdeg[i];
        --cdeg[j];
        --remaining;
        progress = true;
      }
    }
    if (remaining > 0) return;  // cycle: not a tree, not a vertex
    best = std::min(best, total);
  };
  // Enumerate all k-subsets of cells in lexicographic order.
  for (;;) {
    try_basis();
    int i = k - 1;
    while (i >= 0 && pick[size_t(i)] == cells - k + i) --i;
    if (i < 0) break;
    ++pick[size_t(i)];
    for (int j = i + 1; j < k; ++j) pick[size_t(j)] = pick[size_t(j - 1)] + 1;
  }
  return best;
}

}  // namespace bopq
