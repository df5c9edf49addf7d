#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "bopq/cache.hpp"
#include "bopq/pomdp.hpp"

namespace bopq {

// Greedy controller-subset selection over the coverage objective
// f(S) = sum_{(d,i,j)} max_{p in S} D_{(i,j),p}, pairs pooled across depths.

struct SubsetSelection {
  std::vector<int> indices;        // chosen probe ids, in pick order
  std::vector<double> coverage;    // f(S_t) after each pick
  std::vector<double> gains;       // marginal gain of each pick
  std::vector<double> delta_s;     // ||d - d_S||_inf after each pick
  double final_delta_s = 0;
};

inline double coverage(const DistanceCache& cache, const std::vector<int>& subset) {
  for (int p : subset)
    if (p < 0 || p >= cache.probes) throw std::out_of_range("probe index out of range");
  double total = 0;
  for (int d = 1; d <= cache.T; ++d) {
    int64_t n = cache.histories_at(d);
    int64_t pairs = pair_count(n);
    for (int64_t u = 0; u < pairs; ++u) {
      double best = 0;
      for (int p : subset)
        best = std::max(best, cache.D[size_t(d)][size_t(u) * cache.probes + p]);
      total += best;
    }
  }
  return total;
}

inline SubsetSelection greedy_select(const DistanceCache& cache, int k) {
  if (k < 1 || k > cache.probes) throw std::invalid_argument("budget out of range");
  SubsetSelection sel;
  // dstar[(d,u)] flattened; one slot per pair per depth.
  std::vector<std::vector<double>> dstar(size_t(cache.T) + 1);
  for (int d = 1; d <= cache.T; ++d)
    dstar[size_t(d)].assign(size_t(pair_count(cache.histories_at(d))), 0.0);
  std::vector<bool> chosen(size_t(cache.probes), false);
  double f = 0;
  for (int t = 0; t < k; ++t) {
    int best_p = -1;
    double best_gain = -1;
    for (int p = 0; p < cache.probes; ++p) {
      if (chosen[size_t(p)]) continue;
      double gain = 0;
      for (int d = 1; d <= cache.T; ++d) {
        const auto& row = cache.D[size_t(d)];
        const auto& ds = dstar[size_t(d)];
        for (size_t u = 0; u < ds.size(); ++u) {
          double v = row[u * size_t(cache.probes) + size_t(p)] - ds[u];
          if (v > 0) gain += v;
        }
      }
      if (gain > best_gain) {
        best_gain = gain;
        best_p = p;
      }
    }
    chosen[size_t(best_p)] = true;
    sel.indices.push_back(best_p);
    sel.gains.push_back(best_gain);
    f += best_gain;
    sel.coverage.push_back(f);
    for (int d = 1; d <= cache.T; ++d) {
      const auto& row = cache.D[size_t(d)];
      auto& ds = dstar[size_t(d)];
      for (size_t u = 0; u < ds.size(); ++u)
        ds[u] = std::max(ds[u], row[u * size_t(cache.probes) + size_t(best_p)]);
    }
    sel.delta_s.push_back(bopq::delta_s(cache, sel.indices));
  }
  sel.final_delta_s = sel.delta_s.back();
  return sel;
}

inline void save_selection_csv(const SubsetSelection& sel, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "step,probe_id,marginal_gain,coverage,delta_S_so_far\n");
  for (size_t t = 0; t < sel.indices.size(); ++t)
    std::fprintf(f, "%zu,%d,%.12g,%.12g,%.12g\n", t + 1, sel.indices[t], sel.gains[t],
                 sel.coverage[t], sel.delta_s[t]);
  std::fclose(f);
}

namespace detail {

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
  size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off <= 1e-26) break;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) <= 1e-300) continue;
        double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (size_t i = 0; i < n; ++i) {
          double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (size_t i = 0; i < n; ++i) {
          double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
      }
  }
  std::vector<double> ev(n);
  for (size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

// Squared singular values of a dense matrix via the Gram matrix on the
// smaller side.
inline std::vector<double> squared_singular_values(const std::vector<std::vector<double>>& M) {
  size_t n = M.size();
  if (n == 0 || M[0].empty()) throw std::invalid_argument("empty matrix");
  size_t m = M[0].size();
  bool rows = n <= m;
  size_t k = rows ? n : m;
  std::vector<std::vector<double>> G(k, std::vector<double>(k, 0.0));
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i; j < k; ++j) {
      double s = 0;
      if (rows)
        for (size_t l = 0; l < m; ++l) s += M[i][l] * M[j][l];
      else
        for (size_t l = 0; l < n; ++l) s += M[l][i] * M[l][j];
      G[i][j] = G[j][i] = s;
    }
  auto ev = symmetric_eigenvalues(G);
  for (double& e : ev) e = std::max(e, 0.0);
  return ev;
}

}  // namespace detail

// Smallest r such that the top-r squared singular values of the depth-d
// pair x probe distance matrix reach `fraction` of total variance.
inline int effective_rank(const DistanceCache& cache, int depth, double fraction) {
  if (fraction <= 0 || fraction > 1) throw std::invalid_argument("fraction must be in (0,1]");
  if (depth < 1 || depth > cache.T) throw std::out_of_range("depth out of range");
  int64_t pairs = pair_count(cache.histories_at(depth));
  if (pairs == 0) throw std::invalid_argument("empty matrix");
  std::vector<std::vector<double>> M(size_t(pairs), std::vector<double>(size_t(cache.probes)));
  for (int64_t u = 0; u < pairs; ++u)
    for (int p = 0; p < cache.probes; ++p)
      M[size_t(u)][size_t(p)] = cache.D[size_t(depth)][size_t(u) * cache.probes + p];
  auto ev = detail::squared_singular_values(M);
  double total = 0;
  for (double e : ev) total += e;
  if (total <= 0) return 0;
  double acc = 0;
  for (size_t r = 0; r < ev.size(); ++r) {
    acc += ev[r];
    if (acc >= fraction * total - 1e-15) return int(r) + 1;
  }
  return int(ev.size());
}

// Numerical rank of the open-loop Hankel matrix at the middle split
// d = floor(T/2): rows are (action prefix, observation prefix) pairs of
// length d, columns are (action suffix, observation suffix) pairs of length
// T-d, entries are conditional suffix probabilities (zero for unreachable
// prefixes). Singular values above tolerance * sigma_max count.
inline int hankel_rank(const Pomdp& M, int T, double tolerance = 1e-8) {
  if (T < 2) throw std::invalid_argument("hankel_rank needs T >= 2");
  int d = T / 2;
  int S = M.S, A = M.A, O = M.O;
  int64_t rows = ipow(A, d) * ipow(O, d);
  int64_t cols = ipow(A, T - d) * ipow(O, T - d);
  if (rows * cols > kEnumerationCap) throw std::length_error("hankel matrix too large");
  std::vector<std::vector<double>> H(size_t(rows), std::vector<double>(size_t(cols), 0.0));
  std::vector<int> aseq(size_t(T), 0), oseq(size_t(T), 0);
  auto step = [&](std::vector<double>& w, int a, int o) {
    std::vector<double> v(size_t(S), 0.0);
    for (int s = 0; s < S; ++s) {
      if (w[size_t(s)] <= 0) continue;
      for (int sp = 0; sp < S; ++sp)
        v[size_t(sp)] += w[size_t(s)] * M.P[size_t(s)][size_t(a)][size_t(sp)];
    }
    for (int sp = 0; sp < S; ++sp) v[size_t(sp)] *= M.Z[size_t(sp)][size_t(a)][size_t(o)];
    w.swap(v);
  };
  for (int64_t r = 0; r < rows; ++r) {
    int64_t rc = r;
    for (int t = d - 1; t >= 0; --t) {
      oseq[size_t(t)] = int(rc % O);
      rc /= O;
    }
    for (int t = d - 1; t >= 0; --t) {
      aseq[size_t(t)] = int(rc % A);
      rc /= A;
    }
    std::vector<double> w = M.b0;
    for (int t = 0; t < d; ++t) step(w, aseq[size_t(t)], oseq[size_t(t)]);
    double reach = 0;
    for (double x : w) reach += x;
    if (reach <= 0) continue;
    for (int64_t c = 0; c < cols; ++c) {
      int64_t cc = c;
      for (int t = T - 1; t >= d; --t) {
        oseq[size_t(t)] = int(cc % O);
        cc /= O;
      }
      for (int t = T - 1; t >= d; --t) {
        aseq[size_t(t)] = int(cc % A);
        cc /= A;
      }
      std::vector<double> v = w;
      for (int t = d; t < T; ++t) step(v, aseq[size_t(t)], oseq[size_t(t)]);
      double mass = 0;
      for (double x : v) mass += x;
      H[size_t(r)][size_t(c)] = mass / reach;
    }
  }
  auto ev = detail::squared_singular_values(H);
  if (ev.empty() || ev[0] <= 0) return 0;
  double cut = tolerance * tolerance * ev[0];
  int rank = 0;
  for (double e : ev)
    if (e > cut) ++rank;
  return rank;
}

}  // namespace bopq
