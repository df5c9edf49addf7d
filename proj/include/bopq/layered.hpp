#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bopq/cache.hpp"
#include "bopq/fsc.hpp"
#include "bopq/pomdp.hpp"
#include "bopq/quotient.hpp"
#include "bopq/transport.hpp"

namespace bopq {

// W1 contraction factor of an observation channel between two ground metrics.
inline double lipschitz_constant(const std::vector<std::vector<double>>& channel,
                                 const GroundMetric& d_in, const GroundMetric& d_out) {
  int O = int(channel.size());
  if (O != d_in.n) throw std::invalid_argument("channel/metric size mismatch");
  for (const auto& row : channel) {
    if (int(row.size()) != d_out.n) throw std::invalid_argument("channel row size mismatch");
    if (!is_distribution(row)) throw std::invalid_argument("channel row is not a distribution");
  }
  double lc = 0;
  for (int o1 = 0; o1 < O; ++o1)
    for (int o2 = o1 + 1; o2 < O; ++o2) {
      double ground = d_in(o1, o2);
      if (ground <= 0) continue;
      double w = w1_exact_cost(channel[size_t(o1)], channel[size_t(o2)],
                               [&](int i, int j) { return d_out(i, j); });
      lc = std::max(lc, w / ground);
    }
  return lc;
}

// Action remapping g: A' -> dist over A (deterministic rows required for
// composition) plus an observation channel C: O -> dist over O' with its
// output metric and derived Lipschitz constant.
struct Wrapper {
  std::vector<std::vector<double>> action_remap;  // [a'][a]
  std::vector<std::vector<double>> channel;       // [o][o']
  GroundMetric out_metric;
  double lipschitz = 0;
};

inline Wrapper make_wrapper(std::vector<std::vector<double>> action_remap,
                            std::vector<std::vector<double>> channel,
                            const GroundMetric& d_in, GroundMetric d_out) {
  for (const auto& row : action_remap)
    if (!is_distribution(row)) throw std::invalid_argument("action remap row is not a distribution");
  Wrapper w;
  w.lipschitz = lipschitz_constant(channel, d_in, d_out);
  w.action_remap = std::move(action_remap);
  w.channel = std::move(channel);
  w.out_metric = std::move(d_out);
  return w;
}

inline Wrapper identity_wrapper(const Pomdp& M) {
  std::vector<std::vector<double>> g(size_t(M.A), std::vector<double>(size_t(M.A), 0.0));
  for (int a = 0; a < M.A; ++a) g[size_t(a)][size_t(a)] = 1.0;
  std::vector<std::vector<double>> c(size_t(M.O), std::vector<double>(size_t(M.O), 0.0));
  for (int o = 0; o < M.O; ++o) c[size_t(o)][size_t(o)] = 1.0;
  return make_wrapper(std::move(g), std::move(c), M.obs_metric, M.obs_metric);
}

// Composes the wrapper into the kernels: remapped actions, Z' = C o Z.
// Stochastic action remaps would correlate the emitted observation with the
// sampled original action, which a state-space POMDP cannot express, so only
// deterministic remap rows are accepted.
inline Pomdp apply_wrapper(const Pomdp& M, const Wrapper& w) {
  int Ap = int(w.action_remap.size());
  int Op = w.out_metric.n;
  if (Ap == 0 || int(w.channel.size()) != M.O)
    throw std::invalid_argument("wrapper/model alphabet mismatch");
  std::vector<int> ga(size_t(Ap), -1);
  for (int ap = 0; ap < Ap; ++ap) {
    const auto& row = w.action_remap[size_t(ap)];
    if (int(row.size()) != M.A) throw std::invalid_argument("wrapper/model alphabet mismatch");
    for (int a = 0; a < M.A; ++a)
      if (row[size_t(a)] > 1.0 - 1e-12) ga[size_t(ap)] = a;
    if (ga[size_t(ap)] < 0)
      throw std::invalid_argument("stochastic action remap is not composable");
  }
  Pomdp W;
  W.name = M.name + "|wrapped";
  W.S = M.S;
  W.A = Ap;
  W.O = Op;
  W.b0 = M.b0;
  W.obs_metric = w.out_metric;
  W.P.assign(size_t(M.S), std::vector<std::vector<double>>(size_t(Ap)));
  W.Z.assign(size_t(M.S), std::vector<std::vector<double>>(size_t(Ap)));
  W.R.assign(size_t(M.S), std::vector<double>(size_t(Ap), 0.0));
  for (int s = 0; s < M.S; ++s)
    for (int ap = 0; ap < Ap; ++ap) {
      int a = ga[size_t(ap)];
      W.P[size_t(s)][size_t(ap)] = M.P[size_t(s)][size_t(a)];
      W.R[size_t(s)][size_t(ap)] = M.R[size_t(s)][size_t(a)];
      std::vector<double> z(size_t(Op), 0.0);
      for (int o = 0; o < M.O; ++o) {
        double mass = M.Z[size_t(s)][size_t(a)][size_t(o)];
        if (mass <= 0) continue;
        for (int op = 0; op < Op; ++op) z[size_t(op)] += mass * w.channel[size_t(o)][size_t(op)];
      }
      W.Z[size_t(s)][size_t(ap)] = std::move(z);
    }
  W.validate();
  return W;
}

// Minimal delta_O-covering with its quantization map (indices into the
// representative list).
struct CoarseningSpec {
  double delta_o = 0;
  std::vector<int> representatives;  // original observation indices
  std::vector<int> quantization;     // o -> index into representatives
};

namespace detail {

inline bool covers(const std::vector<int>& reps, const GroundMetric& metric, double delta) {
  for (int o = 0; o < metric.n; ++o) {
    double best = 2.0;
    for (int r : reps) best = std::min(best, metric(o, r));
    if (best > delta + 1e-12) return false;
  }
  return true;
}

}  // namespace detail

// Greedy max-coverage covering (lowest-index ties); minimality verified
// exhaustively for |O| <= 8.
inline CoarseningSpec covering_spec(const GroundMetric& metric, double delta_o) {
  if (delta_o < 0) throw std::invalid_argument("delta_o must be >= 0");
  int O = metric.n;
  CoarseningSpec spec;
  spec.delta_o = delta_o;
  std::vector<uint8_t> covered(size_t(O), 0);
  int remaining = O;
  while (remaining > 0) {
    int best = -1, gain = 0;
    for (int cand = 0; cand < O; ++cand) {
      int g = 0;
      for (int o = 0; o < O; ++o)
        if (!covered[size_t(o)] && metric(cand, o) <= delta_o + 1e-12) ++g;
      if (g > gain) {
        gain = g;
        best = cand;
      }
    }
    spec.representatives.push_back(best);
    for (int o = 0; o < O; ++o)
      if (!covered[size_t(o)] && metric(best, o) <= delta_o + 1e-12) {
        covered[size_t(o)] = 1;
        --remaining;
      }
  }
  std::sort(spec.representatives.begin(), spec.representatives.end());
  if (O <= 8) {
    int k = int(spec.representatives.size());
    for (uint32_t mask = 1; mask < (1u << O); ++mask) {
      if (int(__builtin_popcount(mask)) >= k) continue;
      std::vector<int> reps;
      for (int o = 0; o < O; ++o)
        if (mask & (1u << o)) reps.push_back(o);
      if (detail::covers(reps, metric, delta_o))
        throw std::logic_error("greedy covering is not minimal");
    }
  }
  spec.quantization.resize(size_t(O), 0);
  for (int o = 0; o < O; ++o) {
    double best = 2.0;
    int arg = 0;
    for (int i = 0; i < int(spec.representatives.size()); ++i) {
      double d = metric(o, spec.representatives[size_t(i)]);
      if (d < best - 1e-12) {
        best = d;
        arg = i;
      }
    }
    spec.quantization[size_t(o)] = arg;
  }
  return spec;
}

// Deterministic channel o -> nearest representative; output metric is the
// restriction of the ground metric to the representatives.
inline Wrapper coarsening_wrapper(const Pomdp& M, const CoarseningSpec& spec,
                                  const GroundMetric& metric) {
  int k = int(spec.representatives.size());
  std::vector<double> sub(size_t(k) * size_t(k), 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      sub[size_t(i) * size_t(k) + size_t(j)] =
          metric(spec.representatives[size_t(i)], spec.representatives[size_t(j)]);
  GroundMetric out = GroundMetric::from_matrix(std::move(sub), k, metric.name + "|coarse");
  std::vector<std::vector<double>> channel(size_t(M.O), std::vector<double>(size_t(k), 0.0));
  for (int o = 0; o < M.O; ++o) channel[size_t(o)][size_t(spec.quantization[size_t(o)])] = 1.0;
  std::vector<std::vector<double>> g(size_t(M.A), std::vector<double>(size_t(M.A), 0.0));
  for (int a = 0; a < M.A; ++a) g[size_t(a)][size_t(a)] = 1.0;
  return make_wrapper(std::move(g), std::move(channel), metric, std::move(out));
}

inline std::pair<Pomdp, CoarseningSpec> coarsen(const Pomdp& M, double delta_o,
                                                const GroundMetric& metric) {
  CoarseningSpec spec = covering_spec(metric, delta_o);
  Wrapper w = coarsening_wrapper(M, spec, metric);
  return {apply_wrapper(M, w), spec};
}

// Re-enumerates a deterministic family over different alphabet sizes.
inline ProbeFamily family_like(const ProbeFamily& fam, int A, int O) {
  switch (fam.kind) {
    case ProbeKind::StationaryDet:
      return enumerate_stationary(fam.m, A, O);
    case ProbeKind::ClockAwareDet:
      return enumerate_clock_aware(fam.m, fam.T, A, O);
    default:
      throw std::invalid_argument("sampled family cannot be re-enumerated");
  }
}

// Pulls a deterministic family over the coarse alphabet back through a
// quantization map: node transitions read q(o) instead of o.
inline ProbeFamily pullback_family(const ProbeFamily& coarse, const std::vector<int>& quant) {
  ProbeFamily fam{coarse.kind, coarse.m, coarse.T, {}};
  int O = int(quant.size());
  for (const Probe& p : coarse.members) {
    if (auto* s = std::get_if<StationaryFsc>(&p)) {
      StationaryFsc f = *s;
      f.beta.assign(size_t(f.m), std::vector<int>(size_t(O), 0));
      for (int node = 0; node < f.m; ++node)
        for (int o = 0; o < O; ++o)
          f.beta[size_t(node)][size_t(o)] = s->beta[size_t(node)][size_t(quant[size_t(o)])];
      fam.members.emplace_back(std::move(f));
    } else if (auto* c = std::get_if<ClockAwareFsc>(&p)) {
      ClockAwareFsc f = *c;
      for (size_t st = 0; st < f.beta.size(); ++st)
        for (size_t node = 0; node < f.beta[st].size(); ++node) {
          std::vector<int> row(size_t(O), 0);
          for (int o = 0; o < O; ++o) row[size_t(o)] = c->beta[st][node][size_t(quant[size_t(o)])];
          f.beta[st][node] = std::move(row);
        }
      fam.members.emplace_back(std::move(f));
    } else {
      throw std::invalid_argument("sampled family cannot be pulled back");
    }
  }
  return fam;
}

struct DataProcessingCheck {
  double lhs = 0;        // D(W(A), W(B))
  double rhs = 0;        // L_C * D(A, B)
  double lipschitz = 0;
  bool holds = false;
};

// lhs uses the family re-enumerated over the wrapped alphabets and the
// wrapper's output metric; rhs uses the original family and metric.
inline DataProcessingCheck check_data_processing(const Pomdp& A, const Pomdp& B, const Wrapper& w,
                                                 const ProbeFamily& family, int T) {
  Pomdp WA = apply_wrapper(A, w);
  Pomdp WB = apply_wrapper(B, w);
  ProbeFamily wrapped = family_like(family, WA.A, WA.O);
  DataProcessingCheck chk;
  chk.lipschitz = w.lipschitz;
  chk.lhs = model_distance(WA, WB, wrapped, T, w.out_metric);
  chk.rhs = w.lipschitz * model_distance(A, B, family, T, A.obs_metric);
  chk.holds = chk.lhs <= chk.rhs + 1e-9;
  return chk;
}

// One layer: wrapper into the next reference model, segment horizon, and the
// merge threshold used to build the next approximate model.
struct LayeredSegment {
  Wrapper wrapper;
  int tau = 0;
  double eps = 0;
};

struct LayeredPlan {
  Pomdp root;
  std::vector<LayeredSegment> segments;
};

// Segment lengths tau,...,tau,remainder for end-to-end horizon T with
// identity wrappers.
inline LayeredPlan make_layered_plan(const Pomdp& M, int T, int tau, double eps) {
  if (T < 1 || tau < 1) throw std::invalid_argument("horizon and segment length must be >= 1");
  LayeredPlan plan;
  plan.root = M;
  int left = T;
  while (left > 0) {
    int len = std::min(tau, left);
    plan.segments.push_back({identity_wrapper(M), len, eps});
    left -= len;
  }
  return plan;
}

inline int64_t history_tree_size(int T, int O) {
  int64_t total = 0, level = 1;
  for (int d = 0; d <= T; ++d) {
    total += level;
    level *= O;
  }
  return total;
}

struct LayeredRow {
  int layer = 0;
  double lipschitz = 0;
  double eps = 0;        // measured residual D(W_i(M~_i), M~_{i+1})
  double gamma = 0;      // incoming distortion D(M_i, M~_i)
  double bound = 0;      // L_i * gamma + eps
  double empirical = 0;  // D(M_{i+1}, M~_{i+1})
  int64_t histories = 0;
  double runtime = 0;    // seconds
};

struct LayeredResult {
  std::vector<LayeredRow> rows;
  double gamma_final = 0;
  int64_t histories_total = 0;
  bool all_hold = true;
};

// Runs the plan: each layer wraps both tracks, approximates the wrapped
// approximate model by the materialized eps-quotient of its segment-horizon
// partition, measures the residual, and asserts the distortion recursion.
// All distances within a layer are taken at that segment's horizon.
inline LayeredResult run_layered(const LayeredPlan& plan, const ProbeFamily& family,
                                 const GroundMetric& metric) {
  LayeredResult res;
  Pomdp ref = plan.root;
  Pomdp approx = plan.root;
  ProbeFamily fam = family;
  GroundMetric d = metric;
  for (size_t i = 0; i < plan.segments.size(); ++i) {
    const LayeredSegment& seg = plan.segments[size_t(i)];
    auto t0 = std::chrono::steady_clock::now();
    LayeredRow row;
    row.layer = int(i) + 1;
    row.lipschitz = seg.wrapper.lipschitz;
    row.gamma = model_distance(ref, approx, fam, seg.tau, d);
    Pomdp wref = apply_wrapper(ref, seg.wrapper);
    Pomdp wapprox = apply_wrapper(approx, seg.wrapper);
    ProbeFamily wfam = family_like(fam, wref.A, wref.O);
    DistanceCache cache = build_cache(wapprox, wfam, seg.tau, seg.wrapper.out_metric);
    Partition part = eps_partition(cache, seg.eps);
    Pomdp next = quotient_to_pomdp(build_quotient(wapprox, part));
    row.eps = model_distance(wapprox, next, wfam, seg.tau, seg.wrapper.out_metric);
    row.empirical = model_distance(wref, next, wfam, seg.tau, seg.wrapper.out_metric);
    row.bound = row.lipschitz * row.gamma + row.eps;
    row.histories = history_tree_size(seg.tau, wref.O);
    row.runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (row.empirical > row.bound + 1e-9) res.all_hold = false;
    res.rows.push_back(row);
    res.histories_total += row.histories;
    res.gamma_final = row.empirical;
    ref = std::move(wref);
    approx = std::move(next);
    fam = std::move(wfam);
    d = seg.wrapper.out_metric;
  }
  return res;
}

inline void save_layered_csv(const LayeredResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "layer,L_i,eps_i,Gamma_i,bound,empirical,histories_processed,runtime\n";
  for (const LayeredRow& r : res.rows)
    out << r.layer << ',' << r.lipschitz << ',' << r.eps << ',' << r.gamma << ',' << r.bound
        << ',' << r.empirical << ',' << r.histories << ',' << r.runtime << '\n';
}

}  // namespace bopq
