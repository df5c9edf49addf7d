#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bopq/fsc.hpp"
#include "bopq/pomdp.hpp"
#include "bopq/transport.hpp"

namespace bopq {

// Full closed-loop law of a probe on a model up to depth T: joint leaf
// probabilities over O^T observation sequences plus the reach probability of
// every prefix. Conditional suffix laws fall out as normalized leaf slices.
struct ClosedLoopLaw {
  int T = 0;
  int O = 0;
  std::vector<std::vector<double>> reach;  // reach[d][history index], d = 0..T
  const std::vector<double>& leaf() const { return reach[T]; }

  // Conditional law P(O_{d+1:T} | h) for history (d, idx); absent if reach 0.
  bool suffix_law(int d, int64_t idx, DiscreteDistribution& out) const {
    double r = reach[d][size_t(idx)];
    if (r <= 0) return false;
    int64_t span = ipow(O, T - d);
    out.support.clear();
    out.mass.clear();
    for (int64_t s = 0; s < span; ++s) {
      double m = reach[T][size_t(idx * span + s)];
      if (m > 0) {
        out.support.push_back(s);
        out.mass.push_back(m / r);
      }
    }
    return true;
  }
};

// One forward tree pass: propagates node x state weight matrices down the
// observation tree, O(|S|^2) work per tree node per action.
inline ClosedLoopLaw closed_loop_law(const Pomdp& M, const Probe& probe, int T) {
  int m = probe_nodes(probe);
  int S = M.S, A = M.A, O = M.O;
  ClosedLoopLaw out;
  out.T = T;
  out.O = O;
  out.reach.resize(T + 1);
  // w[h] is an m x S weight matrix, flattened.
  std::vector<std::vector<double>> w(1, std::vector<double>(size_t(m) * S, 0.0));
  for (int s = 0; s < S; ++s) w[0][s] = M.b0[s];  // node 0 initial
  std::vector<double> adist, ndist;
  for (int d = 0; d <= T; ++d) {
    out.reach[d].resize(w.size());
    for (size_t h = 0; h < w.size(); ++h) {
      double r = 0;
      for (double x : w[h]) r += x;
      out.reach[d][h] = r;
    }
    if (d == T) break;
    std::vector<std::vector<double>> next(w.size() * O,
                                          std::vector<double>(size_t(m) * S, 0.0));
    for (size_t h = 0; h < w.size(); ++h) {
      if (out.reach[d][h] <= 0) continue;
      for (int n = 0; n < m; ++n) {
        probe_action_dist(probe, d, n, A, adist);
        for (int a = 0; a < A; ++a) {
          if (adist[a] <= 0) continue;
          // v[s'] = sum_s w[n][s] P(s'|s,a), weighted by the action prob.
          std::vector<double> v(S, 0.0);
          for (int s = 0; s < S; ++s) {
            double ws = w[h][size_t(n) * S + s];
            if (ws <= 0) continue;
            double wa = ws * adist[a];
            const auto& row = M.P[s][a];
            for (int sp = 0; sp < S; ++sp) v[sp] += wa * row[sp];
          }
          for (int o = 0; o < O; ++o) {
            probe_node_dist(probe, d, n, o, m, ndist);
            auto& child = next[h * O + o];
            for (int sp = 0; sp < S; ++sp) {
              double mass = v[sp] * M.Z[sp][a][o];
              if (mass <= 0) continue;
              for (int np = 0; np < m; ++np)
                if (ndist[np] > 0) child[size_t(np) * S + sp] += mass * ndist[np];
            }
          }
        }
      }
    }
    w.swap(next);
  }
  return out;
}

struct SuffixLaw {
  DiscreteDistribution law;
  double reach = 0;
  bool absent = true;
};

inline SuffixLaw suffix_law(const Pomdp& M, const Probe& probe, const HistoryId& h, int T) {
  if (h.depth > T) throw std::invalid_argument("history deeper than horizon");
  ClosedLoopLaw cl = closed_loop_law(M, probe, T);
  SuffixLaw out;
  out.reach = cl.reach[h.depth][size_t(h.index)];
  out.absent = !cl.suffix_law(h.depth, h.index, out.law);
  return out;
}

// Brute-force oracle: enumerate all length-T (state, node, action, obs)
// trajectories and condition on the history prefix. Deterministic or
// stochastic probes; exponential, for tiny models in tests only.
inline SuffixLaw suffix_law_bruteforce(const Pomdp& M, const Probe& probe, const HistoryId& h,
                                       int T) {
  int m = probe_nodes(probe);
  int S = M.S, A = M.A, O = M.O;
  std::vector<int> hobs = history_obs(h, M.O);
  int64_t span = ipow(O, T - h.depth);
  std::vector<double> joint(size_t(span), 0.0);
  double reach = 0;
  std::vector<double> adist, ndist;
  // Depth-first over observation sequences with full (s, n) joint tracking.
  struct Frame {
    std::vector<double> w;  // m x S
  };
  std::function<void(int, int64_t, const std::vector<double>&)> rec =
      [&](int d, int64_t suffix_idx, const std::vector<double>& w) {
        if (d == T) {
          double p = 0;
          for (double x : w) p += x;
          if (h.depth == T) {
            reach += p;
          } else {
            joint[size_t(suffix_idx)] += p;
          }
          return;
        }
        for (int o = 0; o < O; ++o) {
          if (d < h.depth && o != hobs[d]) continue;
          std::vector<double> nw(size_t(m) * S, 0.0);
          for (int n = 0; n < m; ++n) {
            probe_action_dist(probe, d, n, A, adist);
            probe_node_dist(probe, d, n, o, m, ndist);
            for (int a = 0; a < A; ++a) {
              if (adist[a] <= 0) continue;
              for (int s = 0; s < S; ++s) {
                double ws = w[size_t(n) * S + s] * adist[a];
                if (ws <= 0) continue;
                for (int sp = 0; sp < S; ++sp) {
                  double mass = ws * M.P[s][a][sp] * M.Z[sp][a][o];
                  if (mass <= 0) continue;
                  for (int np = 0; np < m; ++np)
                    if (ndist[np] > 0) nw[size_t(np) * S + sp] += mass * ndist[np];
                }
              }
            }
          }
          rec(d + 1, d >= h.depth ? suffix_idx * O + o : suffix_idx, nw);
        }
      };
  std::vector<double> w0(size_t(m) * S, 0.0);
  for (int s = 0; s < S; ++s) w0[s] = M.b0[s];
  rec(0, 0, w0);
  SuffixLaw out;
  if (h.depth < T) {
    for (double x : joint) reach += x;
  }
  out.reach = reach;
  if (reach <= 0) return out;
  out.absent = false;
  if (h.depth == T) {  // point mass on the empty suffix
    out.law.support.push_back(0);
    out.law.mass.push_back(1.0);
    return out;
  }
  for (int64_t i = 0; i < span; ++i)
    if (joint[size_t(i)] > 0) {
      out.law.support.push_back(i);
      out.law.mass.push_back(joint[size_t(i)] / reach);
    }
  return out;
}

}  // namespace bopq
