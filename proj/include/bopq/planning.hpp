#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bopq/cache.hpp"
#include "bopq/fsc.hpp"
#include "bopq/pomdp.hpp"
#include "bopq/quotient.hpp"
#include "bopq/rng.hpp"
#include "bopq/suffix.hpp"

namespace bopq {

enum class ObjectiveKind { Latent, ObsScore, ActionObsScore };

// Latent objectives read R(s,a); the two agent-accessible kinds score the
// joint observation-action trajectory: obs_weight*g(o) per step plus
// action_weight per step on designated productive actions.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::Latent;
  std::string name;
  std::vector<double> g;            // per-observation score in [0,1]
  std::vector<uint8_t> productive;  // per-action bonus flag
  double obs_weight = 1.0;
  double action_weight = 0.0;
  double lipschitz = 0;  // L_R descriptor
};

inline bool is_obs_objective(const Objective& obj) { return obj.kind != ObjectiveKind::Latent; }

// L_R defaults to the reward range (valid under the discrete metric, often
// vacuous); overridable.
inline Objective latent_objective(const Pomdp& M, double lipschitz = -1.0) {
  Objective obj;
  obj.kind = ObjectiveKind::Latent;
  obj.name = "latent";
  if (lipschitz >= 0) {
    obj.lipschitz = lipschitz;
  } else {
    double lo = M.R[0][0], hi = M.R[0][0];
    for (const auto& row : M.R)
      for (double r : row) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    obj.lipschitz = hi - lo;
  }
  return obj;
}

// g assigns 1 to the first observation symbol; 1-Lipschitz under the
// discrete metric.
inline Objective obs_score_objective(const Pomdp& M) {
  Objective obj;
  obj.kind = ObjectiveKind::ObsScore;
  obj.name = "obs-score";
  obj.g.assign(size_t(M.O), 0.0);
  obj.g[0] = 1.0;
  obj.lipschitz = 1.0;
  return obj;
}

// Halved observation score plus a 0.25 per-step bonus on productive actions,
// so a productive step with an uninformative emission is worth exactly 0.5.
inline Objective action_obs_objective(const Pomdp& M, std::vector<int> productive_actions) {
  Objective obj;
  obj.kind = ObjectiveKind::ActionObsScore;
  obj.name = "action-obs-score";
  obj.g.assign(size_t(M.O), 0.0);
  obj.g[0] = 1.0;
  obj.obs_weight = 0.5;
  obj.action_weight = 0.25;
  obj.productive.assign(size_t(M.A), 0);
  for (int a : productive_actions) {
    if (a < 0 || a >= M.A) throw std::out_of_range("productive action out of range");
    obj.productive[size_t(a)] = 1;
  }
  obj.lipschitz = 0.5;
  return obj;
}

// Exact expected objective of an FSC on a POMDP: forward recursion over the
// joint (node, state) occupancy, equivalent to summing the history tree.
inline double policy_value(const Pomdp& M, const Probe& probe, const Objective& obj, int T) {
  int m = probe_nodes(probe);
  std::vector<double> w(size_t(m) * size_t(M.S), 0.0);
  for (int s = 0; s < M.S; ++s) w[size_t(s)] = M.b0[size_t(s)];
  std::vector<double> adist, ndist;
  double value = 0;
  for (int t = 0; t < T; ++t) {
    std::vector<double> next(size_t(m) * size_t(M.S), 0.0);
    for (int node = 0; node < m; ++node) {
      probe_action_dist(probe, t, node, M.A, adist);
      for (int s = 0; s < M.S; ++s) {
        double ws = w[size_t(node) * size_t(M.S) + size_t(s)];
        if (ws <= 0) continue;
        for (int a = 0; a < M.A; ++a) {
          double wa = ws * adist[size_t(a)];
          if (wa <= 0) continue;
          if (obj.kind == ObjectiveKind::Latent) value += wa * M.R[size_t(s)][size_t(a)];
          if (obj.kind == ObjectiveKind::ActionObsScore && obj.productive[size_t(a)])
            value += wa * obj.action_weight;
          const auto& row = M.P[size_t(s)][size_t(a)];
          for (int sp = 0; sp < M.S; ++sp) {
            double wsp = wa * row[size_t(sp)];
            if (wsp <= 0) continue;
            const auto& emit = M.Z[size_t(sp)][size_t(a)];
            for (int o = 0; o < M.O; ++o) {
              double wo = wsp * emit[size_t(o)];
              if (wo <= 0) continue;
              if (is_obs_objective(obj)) value += wo * obj.obs_weight * obj.g[size_t(o)];
              probe_node_dist(probe, t, node, o, m, ndist);
              for (int np = 0; np < m; ++np)
                next[size_t(np) * size_t(M.S) + size_t(sp)] += wo * ndist[size_t(np)];
            }
          }
        }
      }
    }
    w.swap(next);
  }
  return value;
}

// Expected agent-accessible objective on the quotient machine via the
// probe-dependent closed-loop law (deterministic probes). Latent objectives
// use the canonical class beliefs along the class chain, which is exactly the
// materialized quotient semantics.
inline double policy_value(const QuotientPomdp& Q, const Probe& probe, const Objective& obj,
                           int T) {
  const Pomdp& M = *Q.model;
  if (std::holds_alternative<StochasticFsc>(probe))
    throw std::invalid_argument("quotient evaluation needs a deterministic probe");
  if (is_obs_objective(obj)) {
    ClosedLoopLaw law = quotient_closed_loop_law(Q, probe, T);
    const std::vector<double>& leaf = law.leaf();
    double value = 0;
    std::vector<int> obs(size_t(T), 0);
    std::vector<double> adist, ndist;
    for (int64_t i = 0; i < int64_t(leaf.size()); ++i) {
      double mass = leaf[size_t(i)];
      if (mass <= 0) continue;
      int64_t seq = i;
      for (int t = T - 1; t >= 0; --t) {
        obs[size_t(t)] = int(seq % M.O);
        seq /= M.O;
      }
      double score = 0;
      int node = 0, m = probe_nodes(probe);
      for (int t = 0; t < T; ++t) {
        probe_action_dist(probe, t, node, M.A, adist);
        int a = int(std::max_element(adist.begin(), adist.end()) - adist.begin());
        if (obj.kind == ObjectiveKind::ActionObsScore && obj.productive[size_t(a)])
          score += obj.action_weight;
        score += obj.obs_weight * obj.g[size_t(obs[size_t(t)])];
        probe_node_dist(probe, t, node, obs[size_t(t)], m, ndist);
        node = int(std::max_element(ndist.begin(), ndist.end()) - ndist.begin());
      }
      value += mass * score;
    }
    return value;
  }
  // Latent: forward over (class, node) with canonical beliefs.
  int m = probe_nodes(probe);
  int k0 = Q.classes_at(0);
  std::vector<std::vector<double>> w(size_t(k0), std::vector<double>(size_t(m), 0.0));
  w[0][0] = 1.0;
  std::vector<double> adist, ndist;
  double value = 0;
  for (int t = 0; t < T; ++t) {
    int k = Q.classes_at(t), kn = Q.classes_at(t + 1);
    std::vector<std::vector<double>> next(size_t(kn), std::vector<double>(size_t(m), 0.0));
    for (int c = 0; c < k; ++c) {
      const Belief& b = Q.beliefs[size_t(t)][size_t(c)];
      for (int node = 0; node < m; ++node) {
        double wc = w[size_t(c)][size_t(node)];
        if (wc <= 0) continue;
        probe_action_dist(probe, t, node, M.A, adist);
        for (int a = 0; a < M.A; ++a) {
          double wa = wc * adist[size_t(a)];
          if (wa <= 0) continue;
          for (int s = 0; s < M.S; ++s)
            value += wa * b[size_t(s)] * M.R[size_t(s)][size_t(a)];
          for (int z = 0; z < M.O; ++z) {
            double pz = 0;
            for (int s = 0; s < M.S; ++s) {
              if (b[size_t(s)] <= 0) continue;
              const auto& row = M.P[size_t(s)][size_t(a)];
              for (int sp = 0; sp < M.S; ++sp)
                pz += b[size_t(s)] * row[size_t(sp)] * M.Z[size_t(sp)][size_t(a)][size_t(z)];
            }
            int cz = Q.succ[size_t(t)][size_t(c)][size_t(z)];
            if (cz < 0 || pz <= 0) continue;
            probe_node_dist(probe, t, node, z, m, ndist);
            for (int np = 0; np < m; ++np)
              next[size_t(cz)][size_t(np)] += wa * pz * ndist[size_t(np)];
          }
        }
      }
    }
    w.swap(next);
  }
  return value;
}

struct PlanResult {
  int policy = -1;              // lowest-index argmax
  double value = 0;             // value on the model searched
  double value_on_original = 0; // winner re-evaluated on the original
  double regret = 0;            // vs original-model optimum
  double runtime = 0;           // seconds for the search
};

inline PlanResult exhaustive_search(const Pomdp& M, const ProbeFamily& family,
                                    const Objective& obj, int T) {
  if (family.members.empty()) throw std::invalid_argument("empty policy family");
  auto t0 = std::chrono::steady_clock::now();
  PlanResult res;
  for (int p = 0; p < int(family.members.size()); ++p) {
    double v = policy_value(M, family.members[size_t(p)], obj, T);
    if (res.policy < 0 || v > res.value + 1e-12) {
      res.policy = p;
      res.value = v;
    }
  }
  res.value_on_original = res.value;
  res.regret = 0;
  res.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Search on the quotient, then re-evaluate the winner on the original; regret
// is measured against the original-model optimum over the same family.
inline PlanResult exhaustive_search(const Pomdp& M, const QuotientPomdp& Q,
                                    const ProbeFamily& family, const Objective& obj, int T) {
  if (family.members.empty()) throw std::invalid_argument("empty policy family");
  auto t0 = std::chrono::steady_clock::now();
  PlanResult res;
  for (int p = 0; p < int(family.members.size()); ++p) {
    double v = policy_value(Q, family.members[size_t(p)], obj, T);
    if (res.policy < 0 || v > res.value + 1e-12) {
      res.policy = p;
      res.value = v;
    }
  }
  res.value_on_original = policy_value(M, family.members[size_t(res.policy)], obj, T);
  PlanResult orig = exhaustive_search(M, family, obj, T);
  res.regret = orig.value - res.value_on_original;
  res.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Max over the family of |E_M[G] - E_Q[G]| for an agent-accessible objective
// on an eps=0 quotient.
inline double check_exact_sufficiency(const Pomdp& M, const QuotientPomdp& Q,
                                      const ProbeFamily& family, const Objective& obj, int T) {
  if (!is_obs_objective(obj))
    throw std::invalid_argument("exact sufficiency applies to agent-accessible objectives");
  if (Q.partition.eps != 0) throw std::invalid_argument("quotient must be built at eps=0");
  double dev = 0;
  for (const Probe& p : family.members)
    dev = std::max(dev, std::abs(policy_value(M, p, obj, T) - policy_value(Q, p, obj, T)));
  return dev;
}

struct ValueBoundCheck {
  double gap = 0;            // max over probes |V_M - V_Q|
  double bound = 0;          // L_R * T * eps
  double canonical = 0;      // L_R * T * eps * (1 + 2*T*|S|*|O|)
  double regret = 0;         // quotient-selected policy on the original
  double regret_bound = 0;   // 2 * L_R * T * eps
  bool holds = false;
};

inline ValueBoundCheck check_value_bound(const Pomdp& M, const QuotientPomdp& Q,
                                         const ProbeFamily& family, const Objective& obj, int T,
                                         double eps) {
  ValueBoundCheck chk;
  for (const Probe& p : family.members)
    chk.gap = std::max(chk.gap,
                       std::abs(policy_value(M, p, obj, T) - policy_value(Q, p, obj, T)));
  chk.bound = obj.lipschitz * T * eps;
  chk.canonical = chk.bound * (1.0 + 2.0 * T * M.S * M.O);
  chk.regret_bound = 2.0 * obj.lipschitz * T * eps;
  PlanResult quot = exhaustive_search(M, Q, family, obj, T);
  chk.regret = quot.regret;
  chk.holds = chk.gap <= chk.bound + 1e-9 && chk.regret >= -1e-9 &&
              chk.regret <= chk.regret_bound + 1e-9;
  return chk;
}

// Replaces R by the one-step expected observation score so a latent-reward
// planner optimizes an agent-accessible objective.
inline Pomdp with_obs_aligned_reward(Pomdp M, const std::vector<double>& g) {
  if (int(g.size()) != M.O) throw std::invalid_argument("score size mismatch");
  for (int s = 0; s < M.S; ++s)
    for (int a = 0; a < M.A; ++a) {
      double r = 0;
      for (int sp = 0; sp < M.S; ++sp) {
        double p = M.P[size_t(s)][size_t(a)][size_t(sp)];
        if (p <= 0) continue;
        for (int o = 0; o < M.O; ++o)
          r += p * M.Z[size_t(sp)][size_t(a)][size_t(o)] * g[size_t(o)];
      }
      M.R[size_t(s)][size_t(a)] = r;
    }
  return M;
}

struct PbviAlpha {
  int action = 0;
  std::vector<double> v;
};

struct PbviResult {
  double value = 0;
  double runtime = 0;
  int belief_points = 0;
  // stages[t] = alpha set for value-to-go from stage t (stages[T] is the zero set).
  std::vector<std::vector<PbviAlpha>> stages;
};

// Finite-horizon point-based value iteration: belief set sampled by forward
// simulation from b0 under uniform random actions (distinct beliefs kept,
// so small reachable belief sets are covered exhaustively), stage-indexed
// alpha-vector sets, standard point-based backup, discount 1.
inline PbviResult pbvi(const Pomdp& M, int T, int belief_points = 50, uint64_t seed = 42) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<Belief> B;
  std::set<std::vector<int64_t>> seen;
  auto try_add = [&](const Belief& nb) {
    std::vector<int64_t> key(nb.size());
    for (size_t i = 0; i < nb.size(); ++i) key[i] = llround(nb[i] * 1e10);
    if (seen.insert(std::move(key)).second) B.push_back(nb);
  };
  try_add(M.b0);
  Rng rng = Rng::substream(seed, 0, 0);
  Belief b = M.b0;
  int step = 0;
  int64_t attempts = 0, max_attempts = int64_t(belief_points) * 1000;
  while (int(B.size()) < belief_points && attempts++ < max_attempts) {
    if (step >= T) {
      b = M.b0;
      step = 0;
      continue;
    }
    int a = rng.next_int(M.A);
    // Predicted joint over (s', o); sample o, then condition.
    std::vector<double> pred(size_t(M.S), 0.0);
    for (int s = 0; s < M.S; ++s) {
      if (b[size_t(s)] <= 0) continue;
      const auto& row = M.P[size_t(s)][size_t(a)];
      for (int sp = 0; sp < M.S; ++sp) pred[size_t(sp)] += b[size_t(s)] * row[size_t(sp)];
    }
    std::vector<double> po(size_t(M.O), 0.0);
    for (int sp = 0; sp < M.S; ++sp)
      for (int o = 0; o < M.O; ++o)
        po[size_t(o)] += pred[size_t(sp)] * M.Z[size_t(sp)][size_t(a)][size_t(o)];
    double tot = 0;
    for (double x : po) tot += x;
    if (tot <= 0) {
      b = M.b0;
      step = 0;
      continue;
    }
    int o = rng.next_index(po);
    Belief nb(size_t(M.S), 0.0);
    double mass = 0;
    for (int sp = 0; sp < M.S; ++sp) {
      nb[size_t(sp)] = pred[size_t(sp)] * M.Z[size_t(sp)][size_t(a)][size_t(o)];
      mass += nb[size_t(sp)];
    }
    if (mass <= 0) {
      b = M.b0;
      step = 0;
      continue;
    }
    for (double& x : nb) x /= mass;
    try_add(nb);
    b = std::move(nb);
    ++step;
  }
  // Stage-indexed backup, V_T = {0}.
  PbviResult res;
  res.belief_points = int(B.size());
  res.stages.assign(size_t(T) + 1, {});
  res.stages[size_t(T)].push_back({0, std::vector<double>(size_t(M.S), 0.0)});
  for (int t = T - 1; t >= 0; --t) {
    const auto& V = res.stages[size_t(t) + 1];
    auto& Vn = res.stages[size_t(t)];
    for (const Belief& bp : B) {
      PbviAlpha best;
      double best_val = 0;
      bool have = false;
      for (int a = 0; a < M.A; ++a) {
        std::vector<double> alpha(size_t(M.S), 0.0);
        for (int s = 0; s < M.S; ++s) alpha[size_t(s)] = M.R[size_t(s)][size_t(a)];
        for (int o = 0; o < M.O; ++o) {
          // Pick the successor alpha maximizing the backed-up value at bp.
          const std::vector<double>* arg = nullptr;
          double mx = 0;
          for (const auto& ap : V) {
            double val = 0;
            for (int s = 0; s < M.S; ++s) {
              if (bp[size_t(s)] <= 0) continue;
              double acc = 0;
              const auto& row = M.P[size_t(s)][size_t(a)];
              for (int sp = 0; sp < M.S; ++sp)
                acc += row[size_t(sp)] * M.Z[size_t(sp)][size_t(a)][size_t(o)] * ap.v[size_t(sp)];
              val += bp[size_t(s)] * acc;
            }
            if (!arg || val > mx) {
              arg = &ap.v;
              mx = val;
            }
          }
          for (int s = 0; s < M.S; ++s) {
            double acc = 0;
            const auto& row = M.P[size_t(s)][size_t(a)];
            for (int sp = 0; sp < M.S; ++sp)
              acc += row[size_t(sp)] * M.Z[size_t(sp)][size_t(a)][size_t(o)] * (*arg)[size_t(sp)];
            alpha[size_t(s)] += acc;
          }
        }
        double val = 0;
        for (int s = 0; s < M.S; ++s) val += bp[size_t(s)] * alpha[size_t(s)];
        if (!have || val > best_val) {
          best = {a, std::move(alpha)};
          best_val = val;
          have = true;
        }
      }
      Vn.push_back(std::move(best));
    }
  }
  bool any = false;
  for (const auto& alpha : res.stages[0]) {
    double val = 0;
    for (int s = 0; s < M.S; ++s) val += M.b0[size_t(s)] * alpha.v[size_t(s)];
    if (!any || val > res.value) res.value = val;
    any = true;
  }
  res.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Exact value on `base` of the greedy alpha-policy that `plan` computed on
// `solved`: the controller filters its belief inside `solved`, feeding it the
// observations actually produced by `base` (sim-to-real policy transfer).
inline double transferred_value(const Pomdp& base, const Pomdp& solved, const PbviResult& plan,
                                int T) {
  if (base.A != solved.A || base.O != solved.O) throw std::invalid_argument("alphabet mismatch");
  if (int(plan.stages.size()) != T + 1) throw std::invalid_argument("plan horizon mismatch");
  double total = 0;
  // Node: unnormalized base belief paired with the controller's solved belief.
  std::function<void(const std::vector<double>&, const Belief&, int)> rec =
      [&](const std::vector<double>& w, const Belief& bq, int t) {
        if (t >= T) return;
        int a = 0;
        double best = 0;
        bool have = false;
        for (const auto& alpha : plan.stages[size_t(t)]) {
          double val = 0;
          for (int s = 0; s < solved.S; ++s) val += bq[size_t(s)] * alpha.v[size_t(s)];
          if (!have || val > best + 1e-12) {
            best = val;
            a = alpha.action;
            have = true;
          }
        }
        for (int s = 0; s < base.S; ++s) total += w[size_t(s)] * base.R[size_t(s)][size_t(a)];
        // Controller-side one-step prediction under a.
        std::vector<double> predq(size_t(solved.S), 0.0);
        for (int s = 0; s < solved.S; ++s) {
          if (bq[size_t(s)] <= 0) continue;
          const auto& row = solved.P[size_t(s)][size_t(a)];
          for (int sp = 0; sp < solved.S; ++sp) predq[size_t(sp)] += bq[size_t(s)] * row[size_t(sp)];
        }
        for (int z = 0; z < base.O; ++z) {
          std::vector<double> wn(size_t(base.S), 0.0);
          double mass = 0;
          for (int s = 0; s < base.S; ++s) {
            if (w[size_t(s)] <= 0) continue;
            const auto& row = base.P[size_t(s)][size_t(a)];
            for (int sp = 0; sp < base.S; ++sp) {
              double m = w[size_t(s)] * row[size_t(sp)] * base.Z[size_t(sp)][size_t(a)][size_t(z)];
              wn[size_t(sp)] += m;
              mass += m;
            }
          }
          if (mass <= 1e-300) continue;
          Belief bn(size_t(solved.S), 0.0);
          double qmass = 0;
          for (int sp = 0; sp < solved.S; ++sp) {
            bn[size_t(sp)] = predq[size_t(sp)] * solved.Z[size_t(sp)][size_t(a)][size_t(z)];
            qmass += bn[size_t(sp)];
          }
          if (qmass > 1e-300) {
            for (double& x : bn) x /= qmass;
          } else {
            // Controller assigns zero mass to this observation: fall back to
            // its unconditioned prediction.
            bn = predq;
          }
          rec(wn, bn, t + 1);
        }
      };
  rec(base.b0, solved.b0, 0);
  return total;
}

struct PbviComparison {
  // Exact values on the original model of the two greedy PBVI policies: the
  // one planned on the original and the one planned on the quotient and
  // transferred back. `gap` compares these deployed values.
  double value_orig = 0, value_quot = 0, gap = 0;
  double pbvi_value_orig = 0, pbvi_value_quot = 0;  // raw solver objectives
  int quotient_states = 0;  // time-indexed classes of the quotient
  int materialized_states = 0;  // non-terminal states of the materialized POMDP
  int max_classes = 0;          // largest per-depth class count
  double t_orig = 0, t_quot = 0, t_pipeline = 0, speedup = 0;
};

// Original-vs-quotient PBVI pipeline: solve both models with identical solver
// settings, then deploy both policies on the original and compare the exact
// deployed values. When g is non-empty both models get obs-aligned rewards;
// otherwise both keep their latent rewards.
inline PbviComparison pbvi_compare(const Pomdp& M, const ProbeFamily& family, int T, double eps,
                                   const GroundMetric& metric, const std::vector<double>& g = {},
                                   int belief_points = 50, uint64_t seed = 42) {
  Pomdp base = g.empty() ? M : with_obs_aligned_reward(M, g);
  PbviResult orig = pbvi(base, T, belief_points, seed);
  auto t0 = std::chrono::steady_clock::now();
  DistanceCache cache = build_cache(M, family, T, metric);
  Partition part = eps_partition(cache, eps);
  QuotientPomdp Q = build_quotient(M, part);
  Pomdp quot = quotient_to_pomdp(Q);
  if (!g.empty()) quot = with_obs_aligned_reward(std::move(quot), g);
  double t_build = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  PbviResult qres = pbvi(quot, T, belief_points, seed);
  PbviComparison cmp;
  cmp.pbvi_value_orig = orig.value;
  cmp.pbvi_value_quot = qres.value;
  cmp.value_orig = transferred_value(base, base, orig, T);
  cmp.value_quot = transferred_value(base, quot, qres, T);
  cmp.gap = std::abs(cmp.value_orig - cmp.value_quot);
  cmp.materialized_states = quot.S - 1;
  for (int d = 0; d <= part.T; ++d) {
    if (d < part.T) cmp.quotient_states += Q.classes_at(d);  // acting classes only
    cmp.max_classes = std::max(cmp.max_classes, Q.classes_at(d));
  }
  cmp.t_orig = orig.runtime;
  cmp.t_quot = qres.runtime;
  cmp.t_pipeline = t_build + qres.runtime;
  cmp.speedup = cmp.t_pipeline > 0 ? orig.runtime / cmp.t_pipeline : 0;
  return cmp;
}

struct PlanRow {
  std::string benchmark, objective, policy;
  int T = 0;
  int64_t histories = 0;
  int classes = 0;
  double t_orig = 0, t_quot = 0, v_orig = 0, v_quot = 0, regret = 0;
};

inline void save_plan_csv(const std::vector<PlanRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "benchmark,objective,T,histories,classes,t_orig,t_quotient,policy,V_orig,V_quotient,"
         "regret\n";
  for (const PlanRow& r : rows)
    out << r.benchmark << ',' << r.objective << ',' << r.T << ',' << r.histories << ','
        << r.classes << ',' << r.t_orig << ',' << r.t_quot << ',' << r.policy << ',' << r.v_orig
        << ',' << r.v_quot << ',' << r.regret << '\n';
}

}  // namespace bopq
