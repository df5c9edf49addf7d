#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bopq {

using Belief = std::vector<double>;

inline bool is_distribution(const std::vector<double>& p, double tol = 1e-9) {
  double s = 0;
  for (double x : p) {
    if (x < -tol) return false;
    s += x;
  }
  return std::abs(s - 1.0) <= tol;
}

// Ground metric on the observation alphabet. Pairwise distances in [0,1],
// zero diagonal, symmetric.
struct GroundMetric {
  std::string name;            // "discrete", "line", or custom
  std::vector<double> d;       // row-major |O| x |O|
  int n = 0;

  double operator()(int o1, int o2) const { return d[size_t(o1) * n + o2]; }

  static GroundMetric discrete(int n) {
    GroundMetric m;
    m.name = "discrete";
    m.n = n;
    m.d.assign(size_t(n) * n, 1.0);
    for (int i = 0; i < n; ++i) m.d[size_t(i) * n + i] = 0.0;
    return m;
  }

  // Points embedded on a line, distances normalized to [0,1].
  static GroundMetric line(int n) {
    GroundMetric m;
    m.name = "line";
    m.n = n;
    m.d.assign(size_t(n) * n, 0.0);
    double span = n > 1 ? double(n - 1) : 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m.d[size_t(i) * n + j] = std::abs(i - j) / span;
    return m;
  }

  static GroundMetric from_matrix(std::vector<double> mat, int n, std::string name = "custom") {
    GroundMetric m;
    m.name = std::move(name);
    m.n = n;
    m.d = std::move(mat);
    validate(m);
    return m;
  }

  static void validate(const GroundMetric& m) {
    for (int i = 0; i < m.n; ++i) {
      if (m(i, i) != 0.0) throw std::invalid_argument("metric diagonal must be zero");
      for (int j = 0; j < m.n; ++j) {
        double v = m(i, j);
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("metric entries must lie in [0,1]");
        if (std::abs(v - m(j, i)) > 1e-12) throw std::invalid_argument("metric must be symmetric");
        for (int k = 0; k < m.n; ++k)
          if (m(i, j) > m(i, k) + m(k, j) + 1e-12)
            throw std::invalid_argument("metric violates triangle inequality");
      }
    }
  }
};

// Finite POMDP <S,A,O,P,Z,R,b0>. P[s][a] is a distribution over next states,
// Z[s'][a] a distribution over observations emitted on entering s' under a.
struct Pomdp {
  std::string name;
  int S = 0, A = 0, O = 0;
  std::vector<std::vector<std::vector<double>>> P;  // [s][a][s']
  std::vector<std::vector<std::vector<double>>> Z;  // [s'][a][o]
  std::vector<std::vector<double>> R;               // [s][a]
  Belief b0;
  GroundMetric obs_metric;
  std::vector<std::string> action_names;
  std::vector<std::string> obs_names;

  void validate() const {
    if (!is_distribution(b0)) throw std::invalid_argument("b0 not a distribution");
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        if (!is_distribution(P[s][a])) throw std::invalid_argument("P row not a distribution");
        if (!is_distribution(Z[s][a])) throw std::invalid_argument("Z row not a distribution");
      }
    GroundMetric::validate(obs_metric);
  }
};

struct BeliefUpdateResult {
  Belief belief;      // normalized posterior (unspecified content when zero_mass)
  double likelihood;  // pre-normalization mass P(o | b, a)
  bool zero_mass;     // true when the (b,a,o) triple has probability zero
};

// Exact Bayes filter step. Zero-mass outcomes are flagged, never silently
// renormalized.
inline BeliefUpdateResult belief_update(const Pomdp& M, const Belief& b, int a, int o) {
  BeliefUpdateResult r;
  r.belief.assign(M.S, 0.0);
  double mass = 0;
  for (int sp = 0; sp < M.S; ++sp) {
    double acc = 0;
    for (int s = 0; s < M.S; ++s) acc += b[s] * M.P[s][a][sp];
    double w = acc * M.Z[sp][a][o];
    r.belief[sp] = w;
    mass += w;
  }
  r.likelihood = mass;
  r.zero_mass = mass <= 1e-300;
  if (!r.zero_mass)
    for (double& x : r.belief) x /= mass;
  return r;
}

// Observation histories are positional base-|O| indices within a depth.
struct HistoryId {
  int depth = 0;
  int64_t index = 0;  // in [0, |O|^depth)
};

inline int64_t ipow(int64_t base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

inline std::vector<int> history_obs(const HistoryId& h, int O) {
  std::vector<int> obs(h.depth);
  int64_t x = h.index;
  for (int t = h.depth - 1; t >= 0; --t) {
    obs[t] = int(x % O);
    x /= O;
  }
  return obs;
}

inline HistoryId history_from_obs(const std::vector<int>& obs, int O) {
  HistoryId h;
  h.depth = int(obs.size());
  for (int o : obs) h.index = h.index * O + o;
  return h;
}

inline int64_t history_child(int64_t index, int O, int o) { return index * O + o; }

inline std::string history_string(const HistoryId& h, const Pomdp& M) {
  std::string s;
  for (int o : history_obs(h, M.O)) {
    if (!s.empty()) s += ".";
    s += M.obs_names.empty() ? std::to_string(o) : M.obs_names[o];
  }
  return s.empty() ? "<root>" : s;
}

// Total number of histories of depth <= T.
inline int64_t history_count(int O, int T) {
  int64_t n = 0;
  for (int d = 0; d <= T; ++d) n += ipow(O, d);
  return n;
}

// Reachable belief enumeration up to depth T (across all action choices),
// with beliefs deduplicated at tolerance. Used by effective_dimension.
inline std::vector<Belief> reachable_beliefs(const Pomdp& M, int T, double tol = 1e-9) {
  std::vector<Belief> all{M.b0};
  std::vector<Belief> frontier{M.b0};
  for (int t = 0; t < T; ++t) {
    std::vector<Belief> next;
    for (const Belief& b : frontier)
      for (int a = 0; a < M.A; ++a)
        for (int o = 0; o < M.O; ++o) {
          auto r = belief_update(M, b, a, o);
          if (r.zero_mass) continue;
          bool dup = false;
          for (const Belief& c : all) {
            double diff = 0;
            for (int s = 0; s < M.S; ++s) diff = std::max(diff, std::abs(c[s] - r.belief[s]));
            if (diff <= tol) {
              dup = true;
              break;
            }
          }
          if (!dup) {
            all.push_back(r.belief);
            next.push_back(r.belief);
          }
        }
    frontier = std::move(next);
  }
  return all;
}

// Rank of a row-major matrix by Gaussian elimination with partial pivoting;
// tolerance is relative to the largest pivot encountered.
inline int matrix_rank(std::vector<std::vector<double>> rows, double rel_tol = 1e-10) {
  int nr = int(rows.size());
  if (nr == 0) return 0;
  int nc = int(rows[0].size());
  double scale = 0;
  for (auto& r : rows)
    for (double x : r) scale = std::max(scale, std::abs(x));
  if (scale == 0) return 0;
  double tol = rel_tol * scale;
  int rank = 0;
  for (int col = 0; col < nc && rank < nr; ++col) {
    int piv = -1;
    double best = tol;
    for (int r = rank; r < nr; ++r)
      if (std::abs(rows[r][col]) > best) {
        best = std::abs(rows[r][col]);
        piv = r;
      }
    if (piv < 0) continue;
    std::swap(rows[rank], rows[piv]);
    for (int r = rank + 1; r < nr; ++r) {
      double f = rows[r][col] / rows[rank][col];
      if (f == 0) continue;
      for (int c = col; c < nc; ++c) rows[r][c] -= f * rows[rank][c];
    }
    ++rank;
  }
  return rank;
}

// Effective dimension of a belief: exp of its Shannon entropy (natural log).
inline double effective_dimension(const Belief& b) {
  double h = 0;
  for (double x : b)
    if (x > 0) h -= x * std::log(x);
  return std::exp(h);
}

}  // namespace bopq
