#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bopq/cache.hpp"
#include "bopq/quotient.hpp"
#include "bopq/rng.hpp"
#include "bopq/suffix.hpp"

namespace bopq {

struct SamplingConfig {
  int trajectories = 500;
  int resamples = 1000;
  uint64_t seed = 7;
  std::vector<uint64_t> seeds;  // for stability runs

  void validate() const {
    if (trajectories < 1 || resamples < 1) throw std::invalid_argument("counts must be positive");
  }
};

namespace detail {

// Node x state weights at an observation history under a probe; empty when
// the history is unreachable.
inline std::vector<double> history_weights(const Pomdp& M, const Probe& probe,
                                           const HistoryId& h) {
  int m = probe_nodes(probe), S = M.S, A = M.A;
  std::vector<int> hobs = history_obs(h, M.O);
  std::vector<double> w(size_t(m) * S, 0.0);
  for (int s = 0; s < S; ++s) w[size_t(s)] = M.b0[size_t(s)];
  std::vector<double> adist, ndist;
  for (int t = 0; t < h.depth; ++t) {
    int o = hobs[size_t(t)];
    std::vector<double> nw(size_t(m) * S, 0.0);
    for (int n = 0; n < m; ++n) {
      probe_action_dist(probe, t, n, A, adist);
      for (int a = 0; a < A; ++a) {
        if (adist[size_t(a)] <= 0) continue;
        for (int s = 0; s < S; ++s) {
          double ws = w[size_t(n) * S + s] * adist[size_t(a)];
          if (ws <= 0) continue;
          for (int sp = 0; sp < S; ++sp) {
            double mass = ws * M.P[size_t(s)][size_t(a)][size_t(sp)] *
                          M.Z[size_t(sp)][size_t(a)][size_t(o)];
            if (mass <= 0) continue;
            probe_node_dist(probe, t, n, o, m, ndist);
            for (int np = 0; np < m; ++np)
              if (ndist[size_t(np)] > 0) nw[size_t(np) * S + sp] += mass * ndist[size_t(np)];
          }
        }
      }
    }
    w.swap(nw);
  }
  double reach = 0;
  for (double x : w) reach += x;
  if (reach <= 0) w.clear();
  return w;
}

// One simulated suffix from (node, state) at stage `depth` to the horizon.
inline int64_t simulate_suffix(const Pomdp& M, const Probe& probe, int node, int state, int depth,
                               int T, Rng& rng) {
  int m = probe_nodes(probe);
  std::vector<double> adist, ndist;
  int64_t idx = 0;
  for (int t = depth; t < T; ++t) {
    probe_action_dist(probe, t, node, M.A, adist);
    int a = rng.next_index(adist);
    int sp = rng.next_index(M.P[size_t(state)][size_t(a)]);
    int o = rng.next_index(M.Z[size_t(sp)][size_t(a)]);
    probe_node_dist(probe, t, node, o, m, ndist);
    node = rng.next_index(ndist);
    state = sp;
    idx = idx * M.O + o;
  }
  return idx;
}

inline DiscreteDistribution empirical_from_samples(const std::vector<int64_t>& samples) {
  std::vector<int64_t> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  DiscreteDistribution d;
  double unit = 1.0 / double(sorted.size());
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    d.support.push_back(sorted[i]);
    d.mass.push_back(double(j - i) * unit);
    i = j;
  }
  return d;
}

}  // namespace detail

// Empirical suffix law: n i.i.d. suffixes drawn by sampling (node, state)
// from the probe-filtered belief at h, then simulating forward.
inline SuffixLaw empirical_suffix_law(const Pomdp& M, const Probe& probe, const HistoryId& h,
                                      int T, int n, uint64_t seed) {
  if (h.depth > T) throw std::invalid_argument("history deeper than horizon");
  if (n < 1) throw std::invalid_argument("need at least one trajectory");
  SuffixLaw out;
  std::vector<double> w = detail::history_weights(M, probe, h);
  if (w.empty()) return out;
  out.absent = false;
  for (double x : w) out.reach += x;
  int S = M.S;
  Rng rng = Rng::substream(seed, 0, 0);
  std::vector<int64_t> samples(size_t(n), 0);
  for (int i = 0; i < n; ++i) {
    int flat = rng.next_index(w);
    samples[size_t(i)] = detail::simulate_suffix(M, probe, flat / S, flat % S, h.depth, T, rng);
  }
  out.law = detail::empirical_from_samples(samples);
  return out;
}

// Raw retained samples for every reachable (depth, history, probe) triple.
struct SampledLaws {
  int T = 0;
  int O = 0;
  int probes = 0;
  int n = 0;
  // raw[d][h][p]: sampled suffix indices; empty when unreachable.
  std::vector<std::vector<std::vector<std::vector<int64_t>>>> raw;

  bool reachable(int d, int64_t h, int p) const {
    return !raw[size_t(d)][size_t(h)][size_t(p)].empty();
  }
};

inline SampledLaws sample_suffix_laws(const Pomdp& M, const ProbeFamily& family, int T,
                                      const SamplingConfig& config) {
  config.validate();
  SampledLaws out;
  out.T = T;
  out.O = M.O;
  out.probes = int(family.members.size());
  out.n = config.trajectories;
  out.raw.resize(size_t(T));  // depths 0..T-1; depth-T suffixes are empty
  int S = M.S;
  for (int d = 0; d < T; ++d) {
    int64_t nh = ipow(M.O, d);
    if (nh * out.probes * config.trajectories > kEnumerationCap)
      throw std::length_error("sampling budget exceeds enumeration cap");
    out.raw[size_t(d)].assign(size_t(nh), std::vector<std::vector<int64_t>>(size_t(out.probes)));
    for (int p = 0; p < out.probes; ++p) {
      const Probe& probe = family.members[size_t(p)];
      for (int64_t h = 0; h < nh; ++h) {
        std::vector<double> w = detail::history_weights(M, probe, {d, h});
        if (w.empty()) continue;
        Rng rng = Rng::substream(config.seed, uint64_t(p), uint64_t(d) * uint64_t(ipow(M.O, T)) +
                                                               uint64_t(h));
        auto& dst = out.raw[size_t(d)][size_t(h)][size_t(p)];
        dst.resize(size_t(config.trajectories));
        for (int i = 0; i < config.trajectories; ++i) {
          int flat = rng.next_index(w);
          dst[size_t(i)] = detail::simulate_suffix(M, probe, flat / S, flat % S, d, T, rng);
        }
      }
    }
  }
  return out;
}

// Distance cache over empirical suffix laws; layout-compatible with
// build_cache so partitions and selections run unchanged on sampled data.
inline DistanceCache cache_from_samples(const Pomdp& M, const SampledLaws& laws,
                                        const GroundMetric& metric,
                                        const std::string& family_desc = "sampled") {
  int T = laws.T, O = laws.O, P = laws.probes;
  DistanceCache cache;
  cache.T = T;
  cache.O = O;
  cache.probes = P;
  cache.family_desc = family_desc;
  cache.benchmark = M.name;
  cache.metric_name = metric.name;
  cache.metric = metric;
  cache.D.resize(size_t(T) + 1);
  cache.reach.resize(size_t(T) + 1);
  for (int d = 0; d <= T; ++d) {
    int64_t nh = ipow(O, d);
    cache.reach[size_t(d)].assign(size_t(nh) * P, 0);
    if (d >= 1) cache.D[size_t(d)].assign(size_t(pair_count(nh)) * P, 0.0);
  }
  // Reach flags: depth < T from raw samples; depth T inherits its parent.
  for (int d = 0; d < T; ++d) {
    int64_t nh = ipow(O, d);
    for (int64_t h = 0; h < nh; ++h)
      for (int p = 0; p < P; ++p)
        if (laws.reachable(d, h, p)) cache.reach[size_t(d)][size_t(h) * P + p] = 1;
  }
  {
    int64_t nh = ipow(O, T);
    for (int64_t h = 0; h < nh; ++h)
      for (int p = 0; p < P; ++p)
        if (cache.reach[size_t(T) - 1][size_t(h / O) * P + p])
          cache.reach[size_t(T)][size_t(h) * P + p] = 1;
  }
  for (int d = 1; d < T; ++d) {
    int64_t nh = ipow(O, d);
    int len = T - d;
    std::vector<DiscreteDistribution> emp(size_t(nh) * P);
    for (int64_t h = 0; h < nh; ++h)
      for (int p = 0; p < P; ++p)
        if (laws.reachable(d, h, p))
          emp[size_t(h) * P + p] =
              detail::empirical_from_samples(laws.raw[size_t(d)][size_t(h)][size_t(p)]);
    for (int64_t i = 0; i < nh; ++i)
      for (int64_t j = i + 1; j < nh; ++j) {
        size_t base = size_t(pair_index(i, j, nh)) * P;
        for (int p = 0; p < P; ++p)
          if (laws.reachable(d, i, p) && laws.reachable(d, j, p))
            cache.D[size_t(d)][base + p] =
                w1_sequences(emp[size_t(i) * P + p], emp[size_t(j) * P + p], len, O, metric);
      }
  }
  return cache;
}

inline DistanceCache sampled_cache(const Pomdp& M, const ProbeFamily& family, int T,
                                   const GroundMetric& metric, const SamplingConfig& config) {
  return cache_from_samples(M, sample_suffix_laws(M, family, T, config), metric,
                            family_descriptor(family));
}

// Max over (depth, pair, probe) of W1 between empirical suffix laws.
inline double max_w1_statistic(const SampledLaws& laws, const GroundMetric& metric) {
  double best = 0;
  for (int d = 1; d < laws.T; ++d) {
    int64_t nh = ipow(laws.O, d);
    int len = laws.T - d;
    std::vector<DiscreteDistribution> emp(size_t(nh) * laws.probes);
    for (int64_t h = 0; h < nh; ++h)
      for (int p = 0; p < laws.probes; ++p)
        if (laws.reachable(d, h, p))
          emp[size_t(h) * laws.probes + p] =
              detail::empirical_from_samples(laws.raw[size_t(d)][size_t(h)][size_t(p)]);
    for (int64_t i = 0; i < nh; ++i)
      for (int64_t j = i + 1; j < nh; ++j)
        for (int p = 0; p < laws.probes; ++p)
          if (laws.reachable(d, i, p) && laws.reachable(d, j, p))
            best = std::max(best, w1_sequences(emp[size_t(i) * laws.probes + p],
                                               emp[size_t(j) * laws.probes + p], len, laws.O,
                                               metric));
  }
  return best;
}

// Percentile bootstrap interval for the max-W1 statistic: every retained
// sample multiset is resampled with replacement per replicate.
inline std::pair<double, double> bootstrap_ci_max_w1(const SampledLaws& laws,
                                                     const GroundMetric& metric, int resamples,
                                                     double confidence, uint64_t seed) {
  if (resamples < 1) throw std::invalid_argument("need at least one resample");
  if (confidence <= 0 || confidence >= 1) throw std::invalid_argument("confidence in (0,1)");
  std::vector<double> stats(size_t(resamples), 0.0);
  for (int r = 0; r < resamples; ++r) {
    Rng rng = Rng::substream(seed, 1, uint64_t(r));
    SampledLaws boot = laws;
    for (int d = 1; d < laws.T; ++d)
      for (auto& per_hist : boot.raw[size_t(d)])
        for (auto& samples : per_hist) {
          if (samples.empty()) continue;
          const auto& src = samples;
          std::vector<int64_t> re(src.size());
          for (size_t i = 0; i < src.size(); ++i)
            re[i] = src[size_t(rng.next_int(int(src.size())))];
          samples = re;
        }
    stats[size_t(r)] = max_w1_statistic(boot, metric);
  }
  std::sort(stats.begin(), stats.end());
  double alpha = (1.0 - confidence) / 2.0;
  auto pick = [&](double q) {
    double pos = q * double(resamples - 1);
    size_t lo = size_t(pos);
    double frac = pos - double(lo);
    if (lo + 1 >= stats.size()) return stats.back();
    return stats[lo] * (1 - frac) + stats[lo + 1] * frac;
  };
  return {pick(alpha), pick(1.0 - alpha)};
}

// Total class count used by the stability/convergence protocols: reachable
// classes at depths < T plus one merged terminal class.
inline int64_t stability_class_count(const Partition& part) {
  Partition c = collapse_terminal(part);
  int64_t total = 0;
  for (int d = 0; d <= c.T; ++d) {
    total += c.n_classes[size_t(d)];
    if (c.sink[size_t(d)] >= 0) --total;  // unreachable sink class
  }
  return total;
}

struct StabilityRow {
  double eps = 0;
  double mean = 0, stddev = 0;
  int64_t min = 0, max = 0;
};

inline std::vector<StabilityRow> seed_stability(const Pomdp& M, const ProbeFamily& family, int T,
                                                const GroundMetric& metric,
                                                const SamplingConfig& config,
                                                const std::vector<double>& eps_list) {
  if (config.seeds.empty()) throw std::invalid_argument("seed list required");
  std::vector<std::vector<int64_t>> counts(eps_list.size());
  for (uint64_t s : config.seeds) {
    SamplingConfig c = config;
    c.seed = s;
    DistanceCache cache = sampled_cache(M, family, T, metric, c);
    for (size_t e = 0; e < eps_list.size(); ++e)
      counts[e].push_back(stability_class_count(eps_partition(cache, eps_list[e])));
  }
  std::vector<StabilityRow> rows(eps_list.size());
  for (size_t e = 0; e < eps_list.size(); ++e) {
    StabilityRow& r = rows[e];
    r.eps = eps_list[e];
    r.min = *std::min_element(counts[e].begin(), counts[e].end());
    r.max = *std::max_element(counts[e].begin(), counts[e].end());
    double mean = 0;
    for (int64_t c : counts[e]) mean += double(c);
    mean /= double(counts[e].size());
    double var = 0;
    for (int64_t c : counts[e]) var += (double(c) - mean) * (double(c) - mean);
    r.mean = mean;
    r.stddev = std::sqrt(var / double(counts[e].size()));
  }
  return rows;
}

struct ConvergenceRow {
  int trajectories = 0;
  double mean_ari = 0;
  double min_ari = 0;
  int reps = 0;
};

inline std::vector<ConvergenceRow> convergence_protocol(
    const Pomdp& M, const ProbeFamily& family, int T, const GroundMetric& metric,
    const std::vector<int>& n_list, int reps, const std::vector<double>& eps_list,
    uint64_t seed) {
  DistanceCache exact = build_cache(M, family, T, metric);
  std::vector<ConvergenceRow> rows;
  for (int n : n_list) {
    ConvergenceRow row;
    row.trajectories = n;
    row.reps = reps;
    row.min_ari = 1.0;
    double sum = 0;
    int cnt = 0;
    for (int r = 0; r < reps; ++r) {
      SamplingConfig c;
      c.trajectories = n;
      c.seed = Rng::mix(seed ^ Rng::mix(uint64_t(r)));
      DistanceCache cache = sampled_cache(M, family, T, metric, c);
      for (double eps : eps_list) {
        double ari = adjusted_rand_index(collapse_terminal(eps_partition(cache, eps)),
                                         collapse_terminal(eps_partition(exact, eps)));
        sum += ari;
        ++cnt;
        row.min_ari = std::min(row.min_ari, ari);
      }
    }
    row.mean_ari = sum / double(cnt);
    rows.push_back(row);
  }
  return rows;
}

struct CoverageResult {
  double coverage = 0;
  double mean_width = 0;
};

inline CoverageResult bootstrap_coverage(const Pomdp& M, const ProbeFamily& family, int T,
                                         const GroundMetric& metric, int trajectories,
                                         int replications, int resamples, double confidence,
                                         uint64_t seed) {
  DistanceCache exact = build_cache(M, family, T, metric);
  double truth = 0;
  for (int d = 1; d <= exact.T; ++d)
    for (double v : exact.D[size_t(d)]) truth = std::max(truth, v);
  int hits = 0;
  double width = 0;
  for (int r = 0; r < replications; ++r) {
    SamplingConfig c;
    c.trajectories = trajectories;
    c.seed = Rng::mix(seed ^ Rng::mix(uint64_t(r) + 1));
    SampledLaws laws = sample_suffix_laws(M, family, T, c);
    auto [lo, hi] = bootstrap_ci_max_w1(laws, metric, resamples, confidence, c.seed);
    if (truth >= lo - 1e-12 && truth <= hi + 1e-12) ++hits;
    width += hi - lo;
  }
  return {double(hits) / double(replications), width / double(replications)};
}

}  // namespace bopq
