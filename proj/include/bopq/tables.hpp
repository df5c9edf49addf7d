#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bopq/benchmarks.hpp"
#include "bopq/cache.hpp"
#include "bopq/fsc.hpp"
#include "bopq/layered.hpp"
#include "bopq/planning.hpp"
#include "bopq/pomdp.hpp"
#include "bopq/quotient.hpp"
#include "bopq/sampling.hpp"
#include "bopq/selection.hpp"

namespace bopq {

// Driver configuration shared by all table runs. The tier mirrors the
// evidence tiers of the experiment suite and constrains which probe families
// a run may enumerate exactly.
struct RunConfig {
  std::string benchmark = "tiger-full";
  std::string family = "clk";  // "op" (det. stationary), "clk", "stochastic"
  int m = 1;
  int T = 2;
  std::vector<double> eps_list;
  SamplingConfig sampling;
  bool serial = false;
  std::string outdir = ".";
  uint64_t seed = 7;
  std::string tier = "exact-clk";  // exact-clk | op-exact | op-sampling

  void validate() const {
    if (m < 1 || T < 1) throw std::invalid_argument("m, T must be >= 1");
    if (tier != "exact-clk" && tier != "op-exact" && tier != "op-sampling")
      throw std::invalid_argument("unknown tier: " + tier);
    if (family != "op" && family != "clk" && family != "stochastic")
      throw std::invalid_argument("unknown family kind: " + family);
    for (double e : eps_list)
      if (e < 0) throw std::invalid_argument("eps must be nonnegative");
    sampling.validate();
  }
};

inline std::string config_descriptor(const RunConfig& c) {
  std::ostringstream s;
  s << "benchmark=" << c.benchmark << " family=" << c.family << " m=" << c.m << " T=" << c.T
    << " eps=[";
  for (size_t i = 0; i < c.eps_list.size(); ++i) s << (i ? "," : "") << c.eps_list[i];
  s << "] seed=" << c.seed << " tier=" << c.tier << " serial=" << (c.serial ? 1 : 0);
  return s.str();
}

inline uint64_t config_hash(const RunConfig& c) {
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (char ch : config_descriptor(c)) {
    h ^= uint64_t(uint8_t(ch));
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Wall time, suppressed in serial mode so artifacts are byte-identical per
// (config, seed).
inline double timing(const RunConfig& cfg, std::chrono::steady_clock::time_point t0) {
  if (cfg.serial) return 0.0;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::ofstream open_artifact(const RunConfig& cfg, const std::string& table,
                                   std::string* path_out = nullptr) {
  std::string path = cfg.outdir + "/" + table + ".csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", (unsigned long long)config_hash(cfg));
  out << "# bopq-table v1 table=" << table << " hash=" << hash << ' ' << config_descriptor(cfg)
      << '\n';
  if (path_out) *path_out = path;
  return out;
}

}  // namespace detail

// Enumerates the configured family, refusing exact clock-aware requests that
// exceed the size guard with a pointer at the tractable alternatives.
inline ProbeFamily make_family(const RunConfig& cfg, const Pomdp& M, int T) {
  if (cfg.family == "op") return enumerate_stationary(cfg.m, M.A, M.O);
  if (cfg.family == "stochastic") return sample_stochastic(cfg.m, 64, cfg.seed, M.A, M.O);
  if (cfg.tier != "exact-clk")
    throw std::invalid_argument("tier " + cfg.tier + " does not permit clock-aware enumeration");
  if (clock_aware_family_size(cfg.m, T, M.A, M.O) > kEnumerationCap)
    throw std::invalid_argument(
        "clock-aware family exceeds the enumeration cap; use the layered driver "
        "(segmented horizons) or greedy probe subsets (subset) instead");
  return enumerate_clock_aware(cfg.m, T, M.A, M.O);
}

inline BuildOptions build_options(const RunConfig& cfg) {
  BuildOptions opt;
  opt.threads = cfg.serial ? 1 : 0;
  return opt;
}

namespace tables {

// Restriction of a cache to a probe subset (columns kept, ids renumbered).
inline DistanceCache subset_cache(const DistanceCache& cache, const std::vector<int>& subset) {
  DistanceCache sub = cache;
  sub.probes = int(subset.size());
  sub.family_desc = cache.family_desc + "-subset";
  for (int d = 1; d <= cache.T; ++d) {
    int64_t pairs = pair_count(cache.histories_at(d));
    sub.D[size_t(d)].assign(size_t(pairs) * subset.size(), 0.0);
    for (int64_t u = 0; u < pairs; ++u)
      for (size_t p = 0; p < subset.size(); ++p)
        sub.D[size_t(d)][size_t(u) * subset.size() + p] =
            cache.D[size_t(d)][size_t(u) * cache.probes + subset[p]];
  }
  for (int d = 0; d <= cache.T; ++d) {
    int64_t n = cache.histories_at(d);
    sub.reach[size_t(d)].assign(size_t(n) * subset.size(), 0);
    for (int64_t h = 0; h < n; ++h)
      for (size_t p = 0; p < subset.size(); ++p)
        sub.reach[size_t(d)][size_t(h) * subset.size() + p] =
            cache.reach[size_t(d)][size_t(h) * cache.probes + subset[p]];
  }
  return sub;
}

// Deterministic quadrant merge NW,NE -> North, SW,SE -> South (Lipschitz 1).
inline Wrapper north_south_merge(const Pomdp& grid) {
  std::vector<std::vector<double>> channel = {{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  GroundMetric out = GroundMetric::from_matrix({0, 0.5, 0.5, 0}, 2, "ns");
  std::vector<std::vector<double>> g(size_t(grid.A), std::vector<double>(size_t(grid.A), 0.0));
  for (int a = 0; a < grid.A; ++a) g[size_t(a)][size_t(a)] = 1.0;
  return make_wrapper(std::move(g), std::move(channel), grid.obs_metric, std::move(out));
}

inline std::string probe_family_comparison(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "probe_family_comparison", &path);
  out << "benchmark,T,q_op,q_clk,ari,delta_clk,runtime\n";
  Pomdp M = parse_benchmark(cfg.benchmark);
  BuildOptions opt = build_options(cfg);
  for (int T = 2; T <= cfg.T; T += 2) {
    auto t0 = std::chrono::steady_clock::now();
    DistanceCache cop = build_cache(M, enumerate_stationary(1, M.A, M.O), T, M.obs_metric, opt);
    DistanceCache cclk =
        build_cache(M, enumerate_clock_aware(1, T, M.A, M.O), T, M.obs_metric, opt);
    Partition pop = collapse_terminal(exact_partition(cop));
    Partition pclk = collapse_terminal(exact_partition(cclk));
    out << M.name << ',' << T << ',' << pop.reachable_classes() << ','
        << pclk.reachable_classes() << ',' << detail::fmt(adjusted_rand_index(pop, pclk)) << ','
        << detail::fmt(delta_cross_family(cclk, cop)) << ','
        << detail::fmt(detail::timing(cfg, t0)) << '\n';
  }
  return path;
}

inline std::vector<PlanRow> plan_rows(const RunConfig& cfg, const Objective& obj) {
  Pomdp M = parse_benchmark(cfg.benchmark);
  std::vector<PlanRow> rows;
  for (int T = 2; T <= cfg.T; T += 2) {
    ProbeFamily fam = make_family(cfg, M, T);
    DistanceCache cache = build_cache(M, fam, T, M.obs_metric, build_options(cfg));
    QuotientPomdp Q = build_quotient(M, eps_partition(cache, 0.0));
    PlanResult orig = exhaustive_search(M, fam, obj, T);
    PlanResult quot = exhaustive_search(M, Q, fam, obj, T);
    PlanRow r;
    r.benchmark = M.name;
    r.objective = obj.name;
    r.policy = probe_serialize(fam.members[size_t(quot.policy)]);
    std::replace(r.policy.begin(), r.policy.end(), ',', ';');
    r.T = T;
    r.histories = history_count(M.O, T);
    r.classes = Q.partition.reachable_classes();
    r.t_orig = cfg.serial ? 0.0 : orig.runtime;
    r.t_quot = cfg.serial ? 0.0 : quot.runtime;
    r.v_orig = orig.value;
    r.v_quot = quot.value;
    r.regret = quot.regret;
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string observation_planning(const RunConfig& cfg) {
  Pomdp M = parse_benchmark(cfg.benchmark);
  std::vector<PlanRow> rows = plan_rows(cfg, obs_score_objective(M));
  std::vector<int> productive;
  for (int a = 1; a < M.A; ++a) productive.push_back(a);
  for (PlanRow& r : plan_rows(cfg, action_obs_objective(M, productive)))
    rows.push_back(std::move(r));
  std::string path = cfg.outdir + "/observation_planning.csv";
  save_plan_csv(rows, path);
  return path;
}

inline std::string latent_planning(const RunConfig& cfg) {
  Pomdp M = parse_benchmark(cfg.benchmark);
  std::vector<PlanRow> rows = plan_rows(cfg, latent_objective(M));
  std::string path = cfg.outdir + "/latent_planning.csv";
  save_plan_csv(rows, path);
  return path;
}

inline std::string partition_agreement(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "partition_agreement", &path);
  out << "k,probe,gain,coverage,delta_s,classes,ari\n";
  Pomdp M = parse_benchmark(cfg.benchmark);
  ProbeFamily fam = make_family(cfg, M, cfg.T);
  DistanceCache cache = build_cache(M, fam, cfg.T, M.obs_metric, build_options(cfg));
  Partition full = collapse_terminal(exact_partition(cache));
  int k = std::min(5, cache.probes);
  SubsetSelection sel = greedy_select(cache, k);
  for (int i = 0; i < k; ++i) {
    std::vector<int> chosen(sel.indices.begin(), sel.indices.begin() + i + 1);
    std::sort(chosen.begin(), chosen.end());
    Partition sub = collapse_terminal(exact_partition(subset_cache(cache, chosen)));
    out << i + 1 << ',' << sel.indices[size_t(i)] << ',' << detail::fmt(sel.gains[size_t(i)])
        << ',' << detail::fmt(sel.coverage[size_t(i)]) << ','
        << detail::fmt(sel.delta_s[size_t(i)]) << ',' << sub.reachable_classes() << ','
        << detail::fmt(adjusted_rand_index(sub, full)) << '\n';
  }
  return path;
}

inline std::string medium_scale(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "medium_scale", &path);
  out << "benchmark,S,T,eps,classes,max_depth_classes,runtime\n";
  Pomdp M = parse_benchmark(cfg.benchmark);
  ProbeFamily fam = make_family(cfg, M, cfg.T);
  if (cfg.eps_list.empty()) return path;
  auto t0 = std::chrono::steady_clock::now();
  DistanceCache cache = build_cache(M, fam, cfg.T, M.obs_metric, build_options(cfg));
  for (double eps : cfg.eps_list) {
    Partition part = collapse_terminal(eps_partition(cache, eps));
    out << M.name << ',' << M.S << ',' << cfg.T << ',' << detail::fmt(eps) << ','
        << part.reachable_classes() << ',' << part.max_depth_classes() << ','
        << detail::fmt(detail::timing(cfg, t0)) << '\n';
  }
  return path;
}

// Probability of the all-zero observation trajectory under the probe: a
// synthetic 1-Lipschitz trajectory score (the Panel-A reward).
inline double all_zero_mass(const ClosedLoopLaw& law) { return law.leaf()[0]; }

// Panel A uses a synthetic 1-Lipschitz trajectory score (indicator of the
// all-zero observation sequence); Panels B/C use the latent reward with
// L_R = reward range, for which the eps-bound is a fallback: latent rewards
// are not observation-measurable, so `holds` can legitimately fail on
// kernels whose exact partition merges belief-distinct histories.
inline std::string value_bounds(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "value_bounds", &path);
  out << "panel,benchmark,objective,L_R,T,eps,gap,D,bound,bound_D,canonical,holds\n";
  struct Panel {
    char id;
    std::string benchmark;
    bool synthetic;
  };
  std::vector<Panel> panels = {
      {'A', "tiger-full", true}, {'B', "tiger-full", false}, {'C', "gridworld:3", false}};
  for (const Panel& p : panels) {
    Pomdp M = parse_benchmark(p.benchmark);
    Objective obj = latent_objective(M, p.synthetic ? 1.0 : -1.0);
    ProbeFamily fam = make_family(cfg, M, cfg.T);
    DistanceCache cache = build_cache(M, fam, cfg.T, M.obs_metric, build_options(cfg));
    for (double eps : cfg.eps_list) {
      QuotientPomdp Q = build_quotient(M, eps_partition(cache, eps));
      double gap = 0;
      for (const Probe& probe : fam.members) {
        double vm, vq;
        if (p.synthetic) {
          vm = all_zero_mass(closed_loop_law(M, probe, cfg.T));
          vq = all_zero_mass(quotient_closed_loop_law(Q, probe, cfg.T));
        } else {
          vm = policy_value(M, probe, obj, cfg.T);
          vq = policy_value(Q, probe, obj, cfg.T);
        }
        gap = std::max(gap, std::abs(vm - vq));
      }
      double D = model_distance(M, quotient_to_pomdp(Q), fam, cfg.T, M.obs_metric);
      double bound = obj.lipschitz * cfg.T * eps;
      double bound_d = obj.lipschitz * cfg.T * D;
      out << p.id << ',' << M.name << ',' << (p.synthetic ? "synthetic" : obj.name) << ','
          << detail::fmt(obj.lipschitz) << ',' << cfg.T << ',' << detail::fmt(eps) << ','
          << detail::fmt(gap) << ',' << detail::fmt(D) << ',' << detail::fmt(bound) << ','
          << detail::fmt(bound_d) << ',' << detail::fmt(bound * (1.0 + 2.0 * cfg.T * M.S * M.O))
          << ',' << (gap <= bound + 1e-9 ? 1 : 0) << '\n';
    }
  }
  return path;
}

inline std::string data_processing(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "data_processing", &path);
  out << "benchmark,T,eps,lhs,rhs,lipschitz,holds,pre_max,post_max\n";
  for (int n : {3, 5}) {
    Pomdp grid = gridworld(n);
    Wrapper merge = north_south_merge(grid);
    Pomdp merged = apply_wrapper(grid, merge);
    ProbeFamily fam = enumerate_stationary(1, grid.A, grid.O);
    ProbeFamily fam2 = enumerate_stationary(1, merged.A, merged.O);
    DistanceCache cache = build_cache(grid, fam, cfg.T, grid.obs_metric, build_options(cfg));
    auto max_dist = [](const DistanceCache& c) {
      ProbeEnvelope env = envelope(c);
      double mx = 0;
      for (int d = 1; d <= c.T; ++d)
        for (double v : env.d[size_t(d)]) mx = std::max(mx, v);
      return mx;
    };
    double pre = max_dist(cache);
    double post =
        max_dist(build_cache(merged, fam2, cfg.T, merged.obs_metric, build_options(cfg)));
    for (double eps : cfg.eps_list) {
      Pomdp quot = quotient_to_pomdp(build_quotient(grid, eps_partition(cache, eps)));
      DataProcessingCheck chk = check_data_processing(grid, quot, merge, fam, cfg.T);
      out << grid.name << ',' << cfg.T << ',' << detail::fmt(eps) << ',' << detail::fmt(chk.lhs)
          << ',' << detail::fmt(chk.rhs) << ',' << detail::fmt(chk.lipschitz) << ','
          << (chk.holds ? 1 : 0) << ',' << detail::fmt(pre) << ',' << detail::fmt(post) << '\n';
    }
  }
  return path;
}

inline std::string hierarchical_scaling(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "hierarchical_scaling", &path);
  out << "benchmark,T,tau,layer,lipschitz,gamma,eps,bound,empirical,holds,histories,"
         "histories_direct,gamma_final\n";
  Pomdp M = parse_benchmark(cfg.benchmark);
  ProbeFamily fam = enumerate_stationary(cfg.m, M.A, M.O);
  for (int T : {4, 8, 10}) {
    int tau = T / 2;
    LayeredPlan plan = make_layered_plan(M, T, tau, cfg.eps_list.empty() ? 0.0 : cfg.eps_list[0]);
    LayeredResult res = run_layered(plan, fam, M.obs_metric);
    for (size_t i = 0; i < res.rows.size(); ++i) {
      const LayeredRow& r = res.rows[i];
      out << M.name << ',' << T << ',' << tau << ',' << r.layer << ','
          << detail::fmt(r.lipschitz) << ',' << detail::fmt(r.gamma) << ','
          << detail::fmt(r.eps) << ',' << detail::fmt(r.bound) << ','
          << detail::fmt(r.empirical) << ',' << (r.empirical <= r.bound + 1e-9 ? 1 : 0) << ','
          << res.histories_total << ',' << history_tree_size(T, M.O) << ','
          << detail::fmt(res.gamma_final) << '\n';
    }
  }
  return path;
}

inline std::string sampling_variance(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "sampling_variance", &path);
  out << "benchmark,T,eps,trajectories,seeds,mean,std,min,max\n";
  Pomdp M = parse_benchmark(cfg.benchmark);
  ProbeFamily fam = enumerate_stationary(cfg.m, M.A, M.O);
  SamplingConfig sc = cfg.sampling;
  if (sc.seeds.empty())
    for (uint64_t i = 0; i < 10; ++i) sc.seeds.push_back(cfg.seed + i);
  std::vector<StabilityRow> rows = seed_stability(M, fam, cfg.T, M.obs_metric, sc, cfg.eps_list);
  for (const StabilityRow& r : rows)
    out << M.name << ',' << cfg.T << ',' << detail::fmt(r.eps) << ',' << sc.trajectories << ','
        << sc.seeds.size() << ',' << detail::fmt(r.mean) << ',' << detail::fmt(r.stddev) << ','
        << r.min << ',' << r.max << '\n';
  return path;
}

inline std::string bootstrap_coverage_table(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "bootstrap_coverage", &path);
  out << "benchmark,T,trajectories,replications,resamples,confidence,coverage,mean_width\n";
  Pomdp M = parse_benchmark(cfg.benchmark);
  ProbeFamily fam = enumerate_stationary(cfg.m, M.A, M.O);
  int replications = 200, resamples = cfg.sampling.resamples;
  CoverageResult cov = bootstrap_coverage(M, fam, cfg.T, M.obs_metric, cfg.sampling.trajectories,
                                          replications, resamples, 0.95, cfg.seed);
  out << M.name << ',' << cfg.T << ',' << cfg.sampling.trajectories << ',' << replications << ','
      << resamples << ",0.95," << detail::fmt(cov.coverage) << ','
      << detail::fmt(cov.mean_width) << '\n';
  return path;
}

inline std::string convergence(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "convergence", &path);
  out << "benchmark,T,trajectories,reps,mean_ari,min_ari\n";
  Pomdp M = parse_benchmark(cfg.benchmark);
  ProbeFamily fam = enumerate_stationary(cfg.m, M.A, M.O);
  std::vector<double> eps = cfg.eps_list.empty() ? std::vector<double>{0.0} : cfg.eps_list;
  for (const ConvergenceRow& r :
       convergence_protocol(M, fam, cfg.T, M.obs_metric, {50, 100, 200, 500}, 5, eps, cfg.seed))
    out << M.name << ',' << cfg.T << ',' << r.trajectories << ',' << r.reps << ','
        << detail::fmt(r.mean_ari) << ',' << detail::fmt(r.min_ari) << '\n';
  return path;
}

inline std::string low_rank(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "low_rank", &path);
  out << "benchmark,T,depth,probes,effective_rank,hankel_rank\n";
  for (const std::string& spec : {std::string("tiger-full"), std::string("gridworld:3")}) {
    Pomdp M = parse_benchmark(spec);
    ProbeFamily fam = enumerate_stationary(cfg.m, M.A, M.O);
    DistanceCache cache = build_cache(M, fam, cfg.T, M.obs_metric, build_options(cfg));
    int hrank = hankel_rank(M, cfg.T);
    for (int d = 1; d <= cfg.T; ++d)
      out << M.name << ',' << cfg.T << ',' << d << ',' << cache.probes << ','
          << effective_rank(cache, d, 0.99) << ',' << hrank << '\n';
  }
  return path;
}

struct BeliefSensitivityRow {
  double b0_first = 0;
  double eps = 0;
  int classes = 0;
  double ari = 0;
};

// Class counts and ARI against the reference-b0 partition, at each eps and
// each initial belief in the grid (belief = [p, (1-p)/(S-1), ...]).
inline std::vector<BeliefSensitivityRow> belief_sensitivity_rows(
    const Pomdp& M, const ProbeFamily& fam, int T, const std::vector<double>& b0_grid,
    const std::vector<double>& eps_list, BuildOptions opt = {}) {
  DistanceCache ref_cache = build_cache(M, fam, T, M.obs_metric, opt);
  std::vector<BeliefSensitivityRow> rows;
  for (double p : b0_grid) {
    if (p < 0 || p > 1) throw std::invalid_argument("b0 entry out of range");
    Pomdp N = M;
    N.b0.assign(size_t(M.S), M.S > 1 ? (1.0 - p) / (M.S - 1) : 1.0);
    N.b0[0] = p;
    DistanceCache cache = build_cache(N, fam, T, M.obs_metric, opt);
    for (double eps : eps_list) {
      Partition part = collapse_terminal(eps_partition(cache, eps));
      Partition ref = collapse_terminal(eps_partition(ref_cache, eps));
      BeliefSensitivityRow r;
      r.b0_first = p;
      r.eps = eps;
      r.classes = part.reachable_classes();
      r.ari = adjusted_rand_index(part, ref);
      rows.push_back(r);
    }
  }
  return rows;
}

inline std::string belief_sensitivity(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "belief_sensitivity", &path);
  out << "benchmark,T,b0_first,eps,classes,ari\n";
  Pomdp M = parse_benchmark(cfg.benchmark);
  ProbeFamily fam = make_family(cfg, M, cfg.T);
  std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5};
  for (const BeliefSensitivityRow& r :
       belief_sensitivity_rows(M, fam, cfg.T, grid, cfg.eps_list, build_options(cfg)))
    out << M.name << ',' << cfg.T << ',' << detail::fmt(r.b0_first) << ','
        << detail::fmt(r.eps) << ',' << r.classes << ',' << detail::fmt(r.ari) << '\n';
  return path;
}

inline std::string pbvi_comparison(const RunConfig& cfg) {
  std::string path;
  std::ofstream out = detail::open_artifact(cfg, "pbvi_comparison", &path);
  out << "benchmark,S,T,eps,quotient_states,materialized,max_classes,V_orig,V_quotient,gap,"
         "t_orig,t_quotient,speedup\n";
  double eps = cfg.eps_list.empty() ? 0.5 : cfg.eps_list[0];
  for (const std::string& spec :
       {std::string("tiger-full"), std::string("gridworld:3"), std::string("gridworld:5"),
        std::string("network:4"), std::string("rocksample:4,4")}) {
    Pomdp M = parse_benchmark(spec);
    ProbeFamily fam = enumerate_stationary(1, M.A, M.O);
    PbviComparison cmp = pbvi_compare(M, fam, cfg.T, eps, M.obs_metric, {}, 50, cfg.seed);
    out << M.name << ',' << M.S << ',' << cfg.T << ',' << detail::fmt(eps) << ','
        << cmp.quotient_states << ',' << cmp.materialized_states << ',' << cmp.max_classes << ','
        << detail::fmt(cmp.value_orig) << ',' << detail::fmt(cmp.value_quot) << ','
        << detail::fmt(cmp.gap) << ',' << detail::fmt(cfg.serial ? 0.0 : cmp.t_orig) << ','
        << detail::fmt(cfg.serial ? 0.0 : cmp.t_pipeline) << ','
        << detail::fmt(cfg.serial ? 0.0 : cmp.speedup) << '\n';
  }
  return path;
}

}  // namespace tables

// Emits one table artifact under cfg.outdir; returns the file path.
inline std::string run_table(const std::string& id, const RunConfig& cfg) {
  cfg.validate();
  if (id == "probe_family_comparison") return tables::probe_family_comparison(cfg);
  if (id == "observation_planning") return tables::observation_planning(cfg);
  if (id == "latent_planning") return tables::latent_planning(cfg);
  if (id == "partition_agreement") return tables::partition_agreement(cfg);
  if (id == "medium_scale") return tables::medium_scale(cfg);
  if (id == "value_bounds") return tables::value_bounds(cfg);
  if (id == "data_processing") return tables::data_processing(cfg);
  if (id == "hierarchical_scaling") return tables::hierarchical_scaling(cfg);
  if (id == "sampling_variance") return tables::sampling_variance(cfg);
  if (id == "bootstrap_coverage") return tables::bootstrap_coverage_table(cfg);
  if (id == "convergence") return tables::convergence(cfg);
  if (id == "low_rank") return tables::low_rank(cfg);
  if (id == "belief_sensitivity") return tables::belief_sensitivity(cfg);
  if (id == "pbvi_comparison") return tables::pbvi_comparison(cfg);
  throw std::invalid_argument("unknown table: " + id);
}

inline const std::vector<std::string>& table_ids() {
  static const std::vector<std::string> ids = {
      "probe_family_comparison", "observation_planning", "latent_planning",
      "partition_agreement",     "medium_scale",         "value_bounds",
      "data_processing",         "hierarchical_scaling", "sampling_variance",
      "bootstrap_coverage",      "convergence",          "low_rank",
      "belief_sensitivity",      "pbvi_comparison"};
  return ids;
}

// ---------------------------------------------------------------------------
// Artifact verification against a JSON manifest:
//   {"files": [{"file": "x.csv",
//               "rows": [{"match": {"T": "4"},
//                         "expect": {"q_op": {"value": 11, "tol": 0}}}]}]}

struct VerifyReport {
  bool pass = true;
  int checked = 0;
  std::vector<std::string> failures;
};

namespace detail {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return int(i);
    return -1;
  }
};

inline CsvTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file: " + path);
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!s.empty() && s.back() == ',') out.push_back("");
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty())
      t.columns = split(line);
    else
      t.rows.push_back(split(line));
  }
  if (t.columns.empty()) throw std::runtime_error("empty csv: " + path);
  return t;
}

}  // namespace detail

inline VerifyReport verify_artifacts(const std::string& directory, const std::string& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("missing manifest: " + manifest);
  nlohmann::json spec = nlohmann::json::parse(in);
  VerifyReport rep;
  auto fail = [&](const std::string& msg) {
    rep.pass = false;
    rep.failures.push_back(msg);
  };
  for (const auto& file : spec.at("files")) {
    std::string name = file.at("file").get<std::string>();
    detail::CsvTable table;
    try {
      table = detail::load_csv(directory + "/" + name);
    } catch (const std::exception& e) {
      fail(e.what());
      continue;
    }
    for (const auto& row : file.at("rows")) {
      // Locate the row by exact string match on the key columns.
      std::vector<std::pair<int, std::string>> keys;
      bool drift = false;
      for (auto it = row.at("match").begin(); it != row.at("match").end(); ++it) {
        int c = table.col(it.key());
        if (c < 0) {
          fail(name + ": schema drift, missing column " + it.key());
          drift = true;
          break;
        }
        keys.emplace_back(c, it.value().get<std::string>());
      }
      if (drift) continue;
      const std::vector<std::string>* found = nullptr;
      for (const auto& r : table.rows) {
        bool ok = true;
        for (const auto& [c, v] : keys) ok = ok && r[size_t(c)] == v;
        if (ok) {
          found = &r;
          break;
        }
      }
      if (!found) {
        fail(name + ": no row matching " + row.at("match").dump());
        continue;
      }
      for (auto it = row.at("expect").begin(); it != row.at("expect").end(); ++it) {
        int c = table.col(it.key());
        if (c < 0) {
          fail(name + ": schema drift, missing column " + it.key());
          continue;
        }
        double want = it.value().at("value").get<double>();
        double tol = it.value().value("tol", 0.0);
        double got = std::stod((*found)[size_t(c)]);
        ++rep.checked;
        if (!(std::abs(got - want) <= tol + 1e-12))
          fail(name + " row " + row.at("match").dump() + " column " + it.key() + ": expected " +
               detail::fmt(want) + " +/- " + detail::fmt(tol) + ", got " + detail::fmt(got));
      }
    }
  }
  return rep;
}

}  // namespace bopq
