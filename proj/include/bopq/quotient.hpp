#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bopq/cache.hpp"
#include "bopq/pomdp.hpp"
#include "bopq/suffix.hpp"

namespace bopq {

constexpr double kExactTol = 1e-9;

// Per-depth assignment history -> class id; class ids dense per depth,
// ordered by lowest member index. Unreachable histories (zero probability
// under every probe) share a per-depth sink class, placed last.
struct Partition {
  int T = 0;
  int O = 0;
  double eps = 0;
  std::string family_desc;
  std::vector<std::vector<int>> cls;        // cls[d][hist]
  std::vector<int> n_classes;               // per depth, sink included
  std::vector<int> sink;                    // per depth: sink class id or -1
  int reachable_classes() const {
    int total = 0;
    for (int d = 0; d <= T; ++d) total += n_classes[size_t(d)] - (sink[size_t(d)] >= 0 ? 1 : 0);
    return total;
  }
  int max_depth_classes() const {
    int best = 0;
    for (int d = 0; d <= T; ++d)
      best = std::max(best, n_classes[size_t(d)] - (sink[size_t(d)] >= 0 ? 1 : 0));
    return best;
  }
};

namespace detail {
inline int uf_find(std::vector<int>& up, int x) {
  while (up[size_t(x)] != x) x = up[size_t(x)] = up[size_t(up[size_t(x)])];
  return x;
}

// Relabel raw per-history cluster keys into dense ids ordered by lowest
// member, then append the sink class for unreachable histories.
inline void finalize_depth(Partition& part, int d, const std::vector<int64_t>& raw,
                           const std::vector<uint8_t>& reach) {
  int64_t n = int64_t(raw.size());
  auto& out = part.cls[size_t(d)];
  out.assign(size_t(n), -1);
  std::map<int64_t, int> ids;
  for (int64_t h = 0; h < n; ++h)
    if (reach[size_t(h)]) {
      auto it = ids.find(raw[size_t(h)]);
      if (it == ids.end()) it = ids.emplace(raw[size_t(h)], int(ids.size())).first;
      out[size_t(h)] = it->second;
    }
  int k = int(ids.size());
  bool any_sink = false;
  for (int64_t h = 0; h < n; ++h)
    if (!reach[size_t(h)]) {
      out[size_t(h)] = k;
      any_sink = true;
    }
  part.sink[size_t(d)] = any_sink ? k : -1;
  part.n_classes[size_t(d)] = k + (any_sink ? 1 : 0);
}
}  // namespace detail

// Union-find closure of the relation history_distance <= 1e-9, per depth.
// Depth-T histories have no future experiment to compare, so the exact
// quotient keeps each reachable leaf as its own class; positive-eps
// clustering merges them (their pairwise distance is zero).
inline Partition exact_partition(const DistanceCache& cache) {
  Partition part;
  part.T = cache.T;
  part.O = cache.O;
  part.eps = 0;
  part.family_desc = cache.family_desc;
  part.cls.resize(size_t(cache.T) + 1);
  part.n_classes.resize(size_t(cache.T) + 1);
  part.sink.resize(size_t(cache.T) + 1);
  for (int d = 0; d <= cache.T; ++d) {
    int64_t n = cache.histories_at(d);
    std::vector<uint8_t> reach(size_t(n), 0);
    for (int64_t h = 0; h < n; ++h) reach[size_t(h)] = cache.reachable_any(d, h) ? 1 : 0;
    std::vector<int> up(size_t(n), 0);
    for (int64_t h = 0; h < n; ++h) up[size_t(h)] = int(h);
    for (int64_t i = 0; d < cache.T && i < n; ++i) {
      if (!reach[size_t(i)]) continue;
      for (int64_t j = i + 1; j < n; ++j) {
        if (!reach[size_t(j)]) continue;
        if (history_distance(cache, {d, i}, {d, j}) <= kExactTol) {
          int ri = detail::uf_find(up, int(i)), rj = detail::uf_find(up, int(j));
          if (ri != rj) up[size_t(std::max(ri, rj))] = std::min(ri, rj);
        }
      }
    }
    std::vector<int64_t> raw(size_t(n), 0);
    for (int64_t h = 0; h < n; ++h) raw[size_t(h)] = detail::uf_find(up, int(h));
    detail::finalize_depth(part, d, raw, reach);
  }
  return part;
}

// Per-depth complete-linkage agglomerative clustering: merge the closest
// cluster pair while the merged diameter stays <= eps (plus the exact
// tolerance); ties broken by lowest member history index.
inline Partition eps_partition(const DistanceCache& cache, double eps) {
  if (eps < 0) throw std::invalid_argument("eps must be >= 0");
  if (eps == 0) return exact_partition(cache);
  Partition part;
  part.T = cache.T;
  part.O = cache.O;
  part.eps = eps;
  part.family_desc = cache.family_desc;
  part.cls.resize(size_t(cache.T) + 1);
  part.n_classes.resize(size_t(cache.T) + 1);
  part.sink.resize(size_t(cache.T) + 1);
  double thresh = eps + kExactTol;
  for (int d = 0; d <= cache.T; ++d) {
    int64_t n = cache.histories_at(d);
    std::vector<uint8_t> reach(size_t(n), 0);
    std::vector<int64_t> members;  // reachable history indices
    for (int64_t h = 0; h < n; ++h) {
      reach[size_t(h)] = cache.reachable_any(d, h) ? 1 : 0;
      if (reach[size_t(h)]) members.push_back(h);
    }
    int k = int(members.size());
    // Clusters identified by their lowest member; link[i][j] = complete-
    // linkage distance between live clusters i, j.
    std::vector<std::vector<double>> link(size_t(k), std::vector<double>(size_t(k), 0.0));
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        link[size_t(i)][size_t(j)] = link[size_t(j)][size_t(i)] =
            history_distance(cache, {d, members[size_t(i)]}, {d, members[size_t(j)]});
    std::vector<uint8_t> live(size_t(k), uint8_t(1));
    std::vector<std::vector<int>> groups;
    groups.resize(size_t(k));
    for (int i = 0; i < k; ++i) groups[size_t(i)] = {i};
    while (true) {
      int bi = -1, bj = -1;
      double best = thresh;
      for (int i = 0; i < k; ++i) {
        if (!live[size_t(i)]) continue;
        for (int j = i + 1; j < k; ++j) {
          if (!live[size_t(j)]) continue;
          if (link[size_t(i)][size_t(j)] < best ||
              (link[size_t(i)][size_t(j)] == best && bi < 0)) {
            best = link[size_t(i)][size_t(j)];
            bi = i;
            bj = j;
          }
        }
      }
      if (bi < 0) break;
      live[size_t(bj)] = 0;
      for (int x : groups[size_t(bj)]) groups[size_t(bi)].push_back(x);
      for (int t = 0; t < k; ++t) {
        if (!live[size_t(t)] || t == bi) continue;
        link[size_t(bi)][size_t(t)] = link[size_t(t)][size_t(bi)] =
            std::max(link[size_t(bi)][size_t(t)], link[size_t(bj)][size_t(t)]);
      }
    }
    std::vector<int64_t> raw(size_t(n), 0);
    for (int i = 0; i < k; ++i) {
      if (!live[size_t(i)]) continue;
      for (int x : groups[size_t(i)]) raw[size_t(members[size_t(x)])] = members[size_t(i)];
    }
    detail::finalize_depth(part, d, raw, reach);
  }
  return part;
}

// Quotient-POMDP view of a partition: all reachable depth-T histories share
// one terminal class (they are behaviorally identical going forward). Table
// class counts and partition comparisons use this view.
inline Partition collapse_terminal(const Partition& part) {
  Partition out = part;
  int d = part.T;
  int64_t n = ipow(part.O, d);
  bool any_reach = false, any_sink = false;
  for (int64_t h = 0; h < n; ++h) {
    bool is_sink = part.cls[size_t(d)][size_t(h)] == part.sink[size_t(d)];
    if (is_sink)
      any_sink = true;
    else
      any_reach = true;
    out.cls[size_t(d)][size_t(h)] = is_sink ? 1 : 0;
  }
  if (!any_reach && any_sink)
    for (int64_t h = 0; h < n; ++h) out.cls[size_t(d)][size_t(h)] = 0;
  out.sink[size_t(d)] = any_sink ? (any_reach ? 1 : 0) : -1;
  out.n_classes[size_t(d)] = (any_reach ? 1 : 0) + (any_sink ? 1 : 0);
  return out;
}

// Quotient POMDP over time-indexed history classes: canonical beliefs,
// deterministic successor map, and per-class observation kernel.
struct QuotientPomdp {
  const Pomdp* model = nullptr;
  Partition partition;
  // Per depth, per class: canonical belief (uniform average of reachable
  // member beliefs under the uniform-random reference policy).
  std::vector<std::vector<Belief>> beliefs;
  std::vector<std::vector<double>> class_reach;        // reference-policy mass
  std::vector<std::vector<std::vector<int64_t>>> members;  // reachable members
  // succ[d][c][z] = class at depth d+1 of (lowest member)·z, or -1.
  std::vector<std::vector<std::vector<int>>> succ;
  double representative_deviation = 0;  // max member-vs-class successor mismatch at eps=0

  int classes_at(int d) const {
    return partition.n_classes[size_t(d)] - (partition.sink[size_t(d)] >= 0 ? 1 : 0);
  }
};

inline QuotientPomdp build_quotient(const Pomdp& M, const Partition& raw) {
  // Terminal histories carry no further dynamics, so the quotient machine
  // always merges reachable depth-T histories into one class.
  Partition part = collapse_terminal(raw);
  QuotientPomdp Q;
  Q.model = &M;
  Q.partition = part;
  int T = part.T, O = M.O;
  Q.beliefs.resize(size_t(T) + 1);
  Q.class_reach.resize(size_t(T) + 1);
  Q.members.resize(size_t(T) + 1);
  Q.succ.resize(size_t(T) + 1);
  // Reference filter: uniform-random actions; w[h] unnormalized over states.
  std::vector<std::vector<double>> w(1, M.b0);
  for (int d = 0; d <= T; ++d) {
    int64_t n = ipow(O, d);
    int k = Q.classes_at(d);
    Q.members[size_t(d)].assign(size_t(k), {});
    for (int64_t h = 0; h < n; ++h) {
      int c = part.cls[size_t(d)][size_t(h)];
      if (c >= 0 && c != part.sink[size_t(d)]) Q.members[size_t(d)][size_t(c)].push_back(h);
    }
    Q.beliefs[size_t(d)].assign(size_t(k), Belief(size_t(M.S), 0.0));
    Q.class_reach[size_t(d)].assign(size_t(k), 0.0);
    for (int c = 0; c < k; ++c) {
      int count = 0;
      for (int64_t h : Q.members[size_t(d)][size_t(c)]) {
        double mass = 0;
        for (double x : w[size_t(h)]) mass += x;
        Q.class_reach[size_t(d)][size_t(c)] += mass;
        if (mass <= 1e-300) continue;
        ++count;
        for (int s = 0; s < M.S; ++s)
          Q.beliefs[size_t(d)][size_t(c)][size_t(s)] += w[size_t(h)][size_t(s)] / mass;
      }
      if (count > 0)
        for (double& x : Q.beliefs[size_t(d)][size_t(c)]) x /= double(count);
    }
    if (d < T) {
      Q.succ[size_t(d)].assign(size_t(k), std::vector<int>(size_t(O), -1));
      for (int c = 0; c < k; ++c) {
        if (Q.members[size_t(d)][size_t(c)].empty()) continue;
        int64_t rep = Q.members[size_t(d)][size_t(c)].front();
        for (int z = 0; z < O; ++z) {
          int cz = part.cls[size_t(d) + 1][size_t(history_child(rep, O, z))];
          if (cz == part.sink[size_t(d) + 1]) cz = -1;
          Q.succ[size_t(d)][size_t(c)][size_t(z)] = cz;
          // Representative independence: at eps=0 every member must agree.
          if (part.eps == 0) {
            for (int64_t h : Q.members[size_t(d)][size_t(c)]) {
              int ch = part.cls[size_t(d) + 1][size_t(history_child(h, O, z))];
              if (ch == part.sink[size_t(d) + 1]) ch = -1;
              if (ch >= 0 && cz >= 0 && ch != cz) Q.representative_deviation = 1.0;
            }
          }
        }
      }
      // Advance the reference filter one step.
      std::vector<std::vector<double>> next(size_t(n) * O, std::vector<double>(size_t(M.S), 0.0));
      for (int64_t h = 0; h < n; ++h) {
        std::vector<double> v(size_t(M.S), 0.0);
        bool any = false;
        for (double x : w[size_t(h)]) any = any || x > 0;
        if (!any) continue;
        for (int a = 0; a < M.A; ++a) {
          double wa = 1.0 / M.A;
          for (int s = 0; s < M.S; ++s) {
            double ws = w[size_t(h)][size_t(s)] * wa;
            if (ws <= 0) continue;
            const auto& row = M.P[size_t(s)][size_t(a)];
            for (int sp = 0; sp < M.S; ++sp) v[size_t(sp)] += ws * row[size_t(sp)];
          }
          for (int z = 0; z < O; ++z) {
            auto& child = next[size_t(history_child(h, O, z))];
            for (int sp = 0; sp < M.S; ++sp) child[size_t(sp)] += v[size_t(sp)] * M.Z[size_t(sp)][size_t(a)][size_t(z)];
          }
          std::fill(v.begin(), v.end(), 0.0);
        }
      }
      w.swap(next);
    }
  }
  return Q;
}

// Closed-loop law of a deterministic probe on the quotient, with class
// beliefs aggregated from the probe's own filtered member weights at each
// depth (reach-weighted), preserving per-history reach.
inline ClosedLoopLaw quotient_closed_loop_law(const QuotientPomdp& Q, const Probe& probe, int T) {
  const Pomdp& M = *Q.model;
  if (std::holds_alternative<StochasticFsc>(probe))
    throw std::invalid_argument("quotient evaluation supports deterministic probes only");
  int O = M.O, S = M.S, A = M.A;
  const Partition& part = Q.partition;
  if (T > part.T) throw std::invalid_argument("horizon exceeds partition depth");
  ClosedLoopLaw out;
  out.T = T;
  out.O = O;
  out.reach.resize(size_t(T) + 1);
  // Deterministic probe: the node is a function of the observation history.
  std::vector<int> node(1, 0);
  std::vector<std::vector<double>> w(1, M.b0);
  std::vector<double> adist, ndist;
  for (int d = 0; d <= T; ++d) {
    int64_t n = ipow(O, d);
    out.reach[size_t(d)].resize(size_t(n));
    for (int64_t h = 0; h < n; ++h) {
      double r = 0;
      for (double x : w[size_t(h)]) r += x;
      out.reach[size_t(d)][size_t(h)] = r;
    }
    if (d == T) break;
    // Aggregate member weights per class, then replace each history's belief
    // by its class aggregate, scaled back to the history's own reach.
    int k = Q.classes_at(d);
    std::vector<std::vector<double>> agg(size_t(k), std::vector<double>(size_t(S), 0.0));
    for (int64_t h = 0; h < n; ++h) {
      int c = part.cls[size_t(d)][size_t(h)];
      if (c < 0 || c == part.sink[size_t(d)]) continue;
      for (int s = 0; s < S; ++s) agg[size_t(c)][size_t(s)] += w[size_t(h)][size_t(s)];
    }
    std::vector<std::vector<double>> next(size_t(n) * O, std::vector<double>(size_t(S), 0.0));
    std::vector<int> next_node(size_t(n) * O, 0);
    for (int64_t h = 0; h < n; ++h) {
      double r = out.reach[size_t(d)][size_t(h)];
      if (r <= 0) continue;
      int c = part.cls[size_t(d)][size_t(h)];
      if (c < 0 || c == part.sink[size_t(d)]) continue;
      double cm = 0;
      for (double x : agg[size_t(c)]) cm += x;
      if (cm <= 0) continue;
      std::vector<double> b(size_t(S), 0.0);
      for (int s = 0; s < S; ++s) b[size_t(s)] = agg[size_t(c)][size_t(s)] * (r / cm);
      probe_action_dist(probe, d, node[size_t(h)], A, adist);
      int a = int(std::max_element(adist.begin(), adist.end()) - adist.begin());
      std::vector<double> v(size_t(S), 0.0);
      for (int s = 0; s < S; ++s) {
        if (b[size_t(s)] <= 0) continue;
        const auto& row = M.P[size_t(s)][size_t(a)];
        for (int sp = 0; sp < S; ++sp) v[size_t(sp)] += b[size_t(s)] * row[size_t(sp)];
      }
      for (int z = 0; z < O; ++z) {
        probe_node_dist(probe, d, node[size_t(h)], z, probe_nodes(probe), ndist);
        int np = int(std::max_element(ndist.begin(), ndist.end()) - ndist.begin());
        auto& child = next[size_t(history_child(h, O, z))];
        for (int sp = 0; sp < S; ++sp) child[size_t(sp)] += v[size_t(sp)] * M.Z[size_t(sp)][size_t(a)][size_t(z)];
        next_node[size_t(history_child(h, O, z))] = np;
      }
    }
    w.swap(next);
    node.swap(next_node);
  }
  return out;
}

// Max over probes of W1 between full observation laws of M and the quotient.
inline double soundness_check(const Pomdp& M, const QuotientPomdp& Q, const ProbeFamily& family,
                              const GroundMetric& metric) {
  int T = Q.partition.T;
  double worst = 0;
  for (const Probe& probe : family.members) {
    ClosedLoopLaw lm = closed_loop_law(M, probe, T);
    ClosedLoopLaw lq = quotient_closed_loop_law(Q, probe, T);
    DiscreteDistribution pm, pq;
    for (int64_t i = 0; i < int64_t(lm.leaf().size()); ++i) {
      if (lm.leaf()[size_t(i)] > 0) {
        pm.support.push_back(i);
        pm.mass.push_back(lm.leaf()[size_t(i)]);
      }
      if (lq.leaf()[size_t(i)] > 0) {
        pq.support.push_back(i);
        pq.mass.push_back(lq.leaf()[size_t(i)]);
      }
    }
    worst = std::max(worst, w1_sequences(pm, pq, T, M.O, metric));
  }
  return worst;
}

// Materialize the quotient as a standalone POMDP. States are (class, entry
// observation) pairs per depth so the emission kernel stays well-defined
// when several observations funnel into one class; a terminal sink absorbs
// depth-T states. Rewards are belief averages of the source model's R.
inline Pomdp quotient_to_pomdp(const QuotientPomdp& Q) {
  const Pomdp& M = *Q.model;
  const Partition& part = Q.partition;
  int T = part.T, O = M.O, A = M.A;
  // Enumerate states: depth 0 root (entry obs = -1) then (d, c, z) triples.
  struct St {
    int d, c, z;
  };
  std::vector<St> states;
  std::vector<std::vector<int>> sid(size_t(T) + 1);  // sid[d][c * O + z]
  states.push_back({0, 0, -1});
  sid[0].assign(size_t(std::max(Q.classes_at(0), 1)) * O, -1);
  for (int d = 1; d <= T; ++d) {
    int k = Q.classes_at(d);
    sid[size_t(d)].assign(size_t(std::max(k, 1)) * O, -1);
    for (int c = 0; c < k; ++c)
      for (int z = 0; z < O; ++z) {
        // Keep only (c, z) pairs actually entered from some predecessor.
        bool entered = false;
        for (int cp = 0; cp < Q.classes_at(d - 1) && !entered; ++cp)
          if (Q.succ[size_t(d) - 1][size_t(cp)][size_t(z)] == c) entered = true;
        if (!entered) continue;
        sid[size_t(d)][size_t(c) * O + z] = int(states.size());
        states.push_back({d, c, z});
      }
  }
  int terminal = int(states.size());
  int S = terminal + 1;
  Pomdp P;
  P.name = M.name + "/quotient(eps=" + std::to_string(part.eps) + ")";
  P.S = S;
  P.A = A;
  P.O = O;
  P.obs_metric = M.obs_metric;
  P.action_names = M.action_names;
  P.obs_names = M.obs_names;
  P.P.assign(size_t(S), std::vector<std::vector<double>>(size_t(A), std::vector<double>(size_t(S), 0.0)));
  P.Z.assign(size_t(S), std::vector<std::vector<double>>(size_t(A), std::vector<double>(size_t(O), 0.0)));
  P.R.assign(size_t(S), std::vector<double>(size_t(A), 0.0));
  P.b0.assign(size_t(S), 0.0);
  P.b0[0] = 1.0;
  for (int u = 0; u < terminal; ++u) {
    const St& st = states[size_t(u)];
    const Belief& b = Q.beliefs[size_t(st.d)][size_t(st.c)];
    for (int a = 0; a < A; ++a) {
      for (int s = 0; s < M.S; ++s) P.R[size_t(u)][size_t(a)] += b[size_t(s)] * M.R[size_t(s)][size_t(a)];
      if (st.d == T) {
        P.P[size_t(u)][size_t(a)][size_t(terminal)] = 1.0;
        continue;
      }
      // P(z | class belief, a) mass routed to the successor (class, z) state.
      double total = 0;
      for (int z = 0; z < O; ++z) {
        double pz = 0;
        for (int s = 0; s < M.S; ++s) {
          if (b[size_t(s)] <= 0) continue;
          const auto& row = M.P[size_t(s)][size_t(a)];
          for (int sp = 0; sp < M.S; ++sp) pz += b[size_t(s)] * row[size_t(sp)] * M.Z[size_t(sp)][size_t(a)][size_t(z)];
        }
        int cz = Q.succ[size_t(st.d)][size_t(st.c)][size_t(z)];
        int v = cz >= 0 ? sid[size_t(st.d) + 1][size_t(cz) * O + z] : -1;
        if (v >= 0) {
          P.P[size_t(u)][size_t(a)][size_t(v)] += pz;
          total += pz;
        }
      }
      // Mass into dropped successors (unreachable under the family) goes to
      // the terminal sink so rows stay stochastic.
      P.P[size_t(u)][size_t(a)][size_t(terminal)] += 1.0 - total;
    }
  }
  for (int a = 0; a < A; ++a) P.P[size_t(terminal)][size_t(a)][size_t(terminal)] = 1.0;
  // Emission: entry observation of the arriving state, deterministic. The
  // root and terminal emit observation 0 by convention (never conditioned on).
  for (int u = 0; u < S; ++u)
    for (int a = 0; a < A; ++a) {
      int z = (u > 0 && u < terminal) ? states[size_t(u)].z : 0;
      P.Z[size_t(u)][size_t(a)][size_t(z)] = 1.0;
    }
  return P;
}

// Standard adjusted Rand index, pooled across depths; sink classes excluded.
inline double adjusted_rand_index(const Partition& p1, const Partition& p2) {
  if (p1.T != p2.T || p1.O != p2.O) throw std::invalid_argument("partition universe mismatch");
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int64_t, int64_t>, int64_t> cont;
  std::map<int64_t, int64_t> rows, cols;
  int64_t n = 0;
  for (int d = 0; d <= p1.T; ++d) {
    int64_t hn = ipow(p1.O, d);
    for (int64_t h = 0; h < hn; ++h) {
      int c1 = p1.cls[size_t(d)][size_t(h)];
      int c2 = p2.cls[size_t(d)][size_t(h)];
      bool s1 = c1 < 0 || c1 == p1.sink[size_t(d)];
      bool s2 = c2 < 0 || c2 == p2.sink[size_t(d)];
      if (s1 != s2) throw std::invalid_argument("partition reachability mismatch");
      if (s1) continue;
      int64_t k1 = int64_t(d) * 100000 + c1;
      int64_t k2 = int64_t(d) * 100000 + c2;
      ++cont[{k1, k2}];
      ++rows[k1];
      ++cols[k2];
      ++n;
    }
  }
  if (n < 2) return 1.0;
  double index = 0, row_sum = 0, col_sum = 0;
  for (auto& [k, v] : cont) index += comb2(double(v));
  for (auto& [k, v] : rows) row_sum += comb2(double(v));
  for (auto& [k, v] : cols) col_sum += comb2(double(v));
  double total = comb2(double(n));
  double expected = row_sum * col_sum / total;
  double max_index = 0.5 * (row_sum + col_sum);
  if (std::abs(max_index - expected) < 1e-300) return 1.0;
  return (index - expected) / (max_index - expected);
}

inline void save_partition_csv(const Partition& part, const Pomdp& M, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "# family=" << part.family_desc << " eps=" << part.eps << " T=" << part.T << "\n";
  f << "depth,history,class_id\n";
  for (int d = 0; d <= part.T; ++d) {
    int64_t n = ipow(part.O, d);
    for (int64_t h = 0; h < n; ++h)
      f << d << ',' << history_string({d, h}, M) << ',' << part.cls[size_t(d)][size_t(h)] << '\n';
  }
}

}  // namespace bopq
