#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bopq/fsc.hpp"
#include "bopq/pomdp.hpp"
#include "bopq/rng.hpp"
#include "bopq/suffix.hpp"
#include "bopq/transport.hpp"

namespace bopq {

// Index of pair (i, j), i < j, in the row-major upper-triangle enumeration.
inline int64_t pair_index(int64_t i, int64_t j, int64_t n) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline int64_t pair_count(int64_t n) { return n * (n - 1) / 2; }

// Exact W1 distances between conditional suffix laws, for every equal-depth
// history pair and every probe with both histories reachable.
struct DistanceCache {
  int T = 0;
  int O = 0;
  int probes = 0;
  std::string family_desc;
  std::string benchmark;
  std::string metric_name;
  GroundMetric metric;
  // D[d][pair * probes + p] for d = 1..T (depth 0 has a single history).
  std::vector<std::vector<double>> D;
  // reach[d][hist * probes + p] for d = 0..T.
  std::vector<std::vector<uint8_t>> reach;

  int64_t histories_at(int d) const { return ipow(O, d); }

  bool reachable(int d, int64_t h, int p) const {
    return reach[size_t(d)][size_t(h) * probes + p] != 0;
  }

  // Reachable under any probe of the family.
  bool reachable_any(int d, int64_t h) const {
    for (int p = 0; p < probes; ++p)
      if (reachable(d, h, p)) return true;
    return false;
  }

  double entry(int d, int64_t i, int64_t j, int p) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return D[size_t(d)][size_t(pair_index(i, j, histories_at(d))) * probes + p];
  }
};

struct BuildOptions {
  int threads = 0;  // 0 = hardware concurrency; 1 = serial
  int64_t cell_cap = kEnumerationCap;
};

inline DistanceCache build_cache(const Pomdp& M, const ProbeFamily& family, int T,
                                 const GroundMetric& metric, BuildOptions opt = {}) {
  if (family.kind == ProbeKind::ClockAwareDet && family.T != T)
    throw std::invalid_argument("family horizon does not match T");
  int P = int(family.members.size());
  DistanceCache cache;
  cache.T = T;
  cache.O = M.O;
  cache.probes = P;
  cache.family_desc = family_descriptor(family);
  cache.benchmark = M.name;
  cache.metric_name = metric.name;
  cache.metric = metric;
  cache.D.resize(size_t(T) + 1);
  cache.reach.resize(size_t(T) + 1);
  int64_t total_cells = 0;
  for (int d = 0; d <= T; ++d) {
    int64_t n = ipow(M.O, d);
    cache.reach[size_t(d)].assign(size_t(n) * P, 0);
    if (d >= 1) {
      total_cells += pair_count(n) * P;
      cache.D[size_t(d)].assign(size_t(pair_count(n)) * P, 0.0);
    }
  }
  if (total_cells > opt.cell_cap)
    throw std::length_error("cache size " + std::to_string(total_cells) +
                            " exceeds cap " + std::to_string(opt.cell_cap));

  auto work = [&](int p_begin, int p_end) {
    std::vector<DiscreteDistribution> laws;
    DiscreteDistribution tmp;
    for (int p = p_begin; p < p_end; ++p) {
      ClosedLoopLaw cl = closed_loop_law(M, family.members[size_t(p)], T);
      for (int d = 0; d <= T; ++d) {
        int64_t n = ipow(M.O, d);
        laws.assign(size_t(n), DiscreteDistribution{});
        for (int64_t h = 0; h < n; ++h) {
          bool ok = cl.suffix_law(d, h, laws[size_t(h)]);
          cache.reach[size_t(d)][size_t(h) * P + p] = ok ? 1 : 0;
        }
        if (d == 0) continue;
        auto& Dd = cache.D[size_t(d)];
        for (int64_t i = 0; i < n; ++i) {
          if (!cache.reach[size_t(d)][size_t(i) * P + p]) continue;
          for (int64_t j = i + 1; j < n; ++j) {
            if (!cache.reach[size_t(d)][size_t(j) * P + p]) continue;
            double w = w1_sequences(laws[size_t(i)], laws[size_t(j)], T - d, M.O, metric);
            Dd[size_t(pair_index(i, j, n)) * P + p] = w;
          }
        }
      }
    }
  };

  int threads = opt.threads > 0 ? opt.threads : int(std::thread::hardware_concurrency());
  if (threads <= 1 || P <= 1) {
    work(0, P);
  } else {
    threads = std::min(threads, P);
    std::vector<std::thread> pool;
    int chunk = (P + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int lo = t * chunk, hi = std::min(P, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return cache;
}

// Max over probes with both ends reachable; 0 if no probe qualifies.
inline double history_distance(const DistanceCache& cache, const HistoryId& h1,
                               const HistoryId& h2) {
  if (h1.depth != h2.depth) throw std::invalid_argument("history depth mismatch");
  if (h1.index == h2.index || h1.depth == 0) return 0.0;
  int d = h1.depth;
  int64_t i = h1.index, j = h2.index;
  if (i > j) std::swap(i, j);
  int64_t n = cache.histories_at(d);
  const double* row = cache.D[size_t(d)].data() + size_t(pair_index(i, j, n)) * cache.probes;
  const uint8_t* ri = cache.reach[size_t(d)].data() + size_t(i) * cache.probes;
  const uint8_t* rj = cache.reach[size_t(d)].data() + size_t(j) * cache.probes;
  double best = 0;
  for (int p = 0; p < cache.probes; ++p)
    if (ri[p] && rj[p]) best = std::max(best, row[p]);
  return best;
}

// Per-pair maxima over a probe index set.
struct ProbeEnvelope {
  int T = 0;
  std::vector<std::vector<double>> d;  // d[depth][pair], depth = 1..T
};

inline ProbeEnvelope envelope(const DistanceCache& cache, const std::vector<int>* subset = nullptr) {
  std::vector<int> idx;
  if (subset) {
    idx = *subset;
    for (int p : idx)
      if (p < 0 || p >= cache.probes) throw std::out_of_range("probe index out of range");
  } else {
    idx.resize(size_t(cache.probes));
    for (int p = 0; p < cache.probes; ++p) idx[size_t(p)] = p;
  }
  ProbeEnvelope env;
  env.T = cache.T;
  env.d.resize(size_t(cache.T) + 1);
  for (int d = 1; d <= cache.T; ++d) {
    int64_t n = cache.histories_at(d);
    env.d[size_t(d)].assign(size_t(pair_count(n)), 0.0);
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = i + 1; j < n; ++j) {
        const double* row =
            cache.D[size_t(d)].data() + size_t(pair_index(i, j, n)) * cache.probes;
        const uint8_t* ri = cache.reach[size_t(d)].data() + size_t(i) * cache.probes;
        const uint8_t* rj = cache.reach[size_t(d)].data() + size_t(j) * cache.probes;
        double best = 0;
        for (int p : idx)
          if (ri[p] && rj[p]) best = std::max(best, row[p]);
        env.d[size_t(d)][size_t(pair_index(i, j, n))] = best;
      }
  }
  return env;
}

// Sup-norm gap between the full envelope and a subset envelope.
inline double delta_s(const DistanceCache& cache, const std::vector<int>& subset) {
  ProbeEnvelope full = envelope(cache);
  ProbeEnvelope sub = envelope(cache, &subset);
  double gap = 0;
  for (int d = 1; d <= cache.T; ++d)
    for (size_t k = 0; k < full.d[size_t(d)].size(); ++k)
      gap = std::max(gap, full.d[size_t(d)][k] - sub.d[size_t(d)][k]);
  return gap;
}

// Max over pairs of (rich envelope - poor envelope), clamped at 0.
inline double delta_cross_family(const DistanceCache& rich, const DistanceCache& poor) {
  if (rich.T != poor.T || rich.O != poor.O)
    throw std::invalid_argument("cross-family history mismatch");
  ProbeEnvelope er = envelope(rich);
  ProbeEnvelope ep = envelope(poor);
  double gap = 0;
  for (int d = 1; d <= rich.T; ++d)
    for (size_t k = 0; k < er.d[size_t(d)].size(); ++k) {
      gap = std::max(gap, er.d[size_t(d)][k] - ep.d[size_t(d)][k]);
    }
  return std::max(gap, 0.0);
}

// Supremum over the family of W1 between full-horizon observation laws.
inline double model_distance(const Pomdp& A, const Pomdp& B, const ProbeFamily& family, int T,
                             const GroundMetric& metric) {
  if (A.A != B.A || A.O != B.O) throw std::invalid_argument("action/observation alphabet mismatch");
  double sup = 0;
  for (const Probe& probe : family.members) {
    ClosedLoopLaw la = closed_loop_law(A, probe, T);
    ClosedLoopLaw lb = closed_loop_law(B, probe, T);
    DiscreteDistribution pa, pb;
    for (int64_t i = 0; i < int64_t(la.leaf().size()); ++i)
      if (la.leaf()[size_t(i)] > 0) {
        pa.support.push_back(i);
        pa.mass.push_back(la.leaf()[size_t(i)]);
      }
    for (int64_t i = 0; i < int64_t(lb.leaf().size()); ++i)
      if (lb.leaf()[size_t(i)] > 0) {
        pb.support.push_back(i);
        pb.mass.push_back(lb.leaf()[size_t(i)]);
      }
    sup = std::max(sup, w1_sequences(pa, pb, T, A.O, metric));
  }
  return sup;
}

// Perturbs each P and Z row by a centered noise vector of total variation
// <= delta, then measures the induced shift of the closed-loop distance to
// the unperturbed model against the 4*T*delta bound.
struct PerturbResult {
  double shift = 0;
  double bound = 0;
};

inline std::vector<double> perturb_row(const std::vector<double>& row, double delta, Rng& rng) {
  size_t n = row.size();
  std::vector<double> g(n);
  double mean = 0;
  for (double& x : g) {
    x = 2.0 * rng.next_double() - 1.0;
    mean += x;
  }
  mean /= double(n);
  double l1 = 0;
  for (double& x : g) {
    x -= mean;
    l1 += std::abs(x);
  }
  std::vector<double> out = row;
  if (l1 <= 0) return out;
  double scale = 2.0 * delta / l1;  // total variation of the additive term = delta
  double mass = 0;
  for (size_t i = 0; i < n; ++i) {
    out[i] = std::max(0.0, row[i] + scale * g[i]);
    mass += out[i];
  }
  if (mass <= 0) throw std::runtime_error("perturbation infeasible: row mass vanished");
  for (double& x : out) x /= mass;
  return out;
}

inline PerturbResult perturb_and_bound(const Pomdp& M, const ProbeFamily& family, int T,
                                       const GroundMetric& metric, double delta, uint64_t seed) {
  Pomdp N = M;
  Rng rng = Rng::substream(seed, 0, 0);
  if (delta > 0) {
    for (int s = 0; s < M.S; ++s)
      for (int a = 0; a < M.A; ++a) N.P[size_t(s)][size_t(a)] = perturb_row(M.P[size_t(s)][size_t(a)], delta, rng);
    for (int sp = 0; sp < M.S; ++sp)
      for (int a = 0; a < M.A; ++a) N.Z[size_t(sp)][size_t(a)] = perturb_row(M.Z[size_t(sp)][size_t(a)], delta, rng);
  }
  PerturbResult r;
  r.shift = model_distance(M, N, family, T, metric);
  r.bound = 4.0 * T * delta;
  return r;
}

// Cache artifact: binary with a CSV mirror.
inline void save_cache_csv(const DistanceCache& cache, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "# benchmark=" << cache.benchmark << " family=" << cache.family_desc
    << " T=" << cache.T << " metric=" << cache.metric_name << " version=1\n";
  f << "depth,i,j,p,distance\n";
  char buf[64];
  for (int d = 1; d <= cache.T; ++d) {
    int64_t n = cache.histories_at(d);
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = i + 1; j < n; ++j)
        for (int p = 0; p < cache.probes; ++p) {
          if (!cache.reachable(d, i, p) || !cache.reachable(d, j, p)) continue;
          std::snprintf(buf, sizeof buf, "%.12g", cache.entry(d, i, j, p));
          f << d << ',' << i << ',' << j << ',' << p << ',' << buf << '\n';
        }
  }
}

inline void save_cache_binary(const DistanceCache& cache, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  auto put_str = [&](const std::string& s) {
    uint64_t n = s.size();
    f.write(reinterpret_cast<const char*>(&n), sizeof n);
    f.write(s.data(), std::streamsize(n));
  };
  uint32_t version = 1;
  f.write(reinterpret_cast<const char*>(&version), sizeof version);
  put_str(cache.benchmark);
  put_str(cache.family_desc);
  put_str(cache.metric_name);
  int32_t t = cache.T, o = cache.O, p = cache.probes;
  f.write(reinterpret_cast<const char*>(&t), sizeof t);
  f.write(reinterpret_cast<const char*>(&o), sizeof o);
  f.write(reinterpret_cast<const char*>(&p), sizeof p);
  for (int d = 0; d <= cache.T; ++d) {
    uint64_t nr = cache.reach[size_t(d)].size();
    f.write(reinterpret_cast<const char*>(&nr), sizeof nr);
    f.write(reinterpret_cast<const char*>(cache.reach[size_t(d)].data()), std::streamsize(nr));
    uint64_t nd = d >= 1 ? cache.D[size_t(d)].size() : 0;
    f.write(reinterpret_cast<const char*>(&nd), sizeof nd);
    if (nd)
      f.write(reinterpret_cast<const char*>(cache.D[size_t(d)].data()),
              std::streamsize(nd * sizeof(double)));
  }
}

inline DistanceCache load_cache_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  auto get_str = [&]() {
    uint64_t n = 0;
    f.read(reinterpret_cast<char*>(&n), sizeof n);
    std::string s(n, '\0');
    f.read(s.data(), std::streamsize(n));
    return s;
  };
  uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != 1) throw std::runtime_error("unsupported cache version");
  DistanceCache cache;
  cache.benchmark = get_str();
  cache.family_desc = get_str();
  cache.metric_name = get_str();
  int32_t t = 0, o = 0, p = 0;
  f.read(reinterpret_cast<char*>(&t), sizeof t);
  f.read(reinterpret_cast<char*>(&o), sizeof o);
  f.read(reinterpret_cast<char*>(&p), sizeof p);
  cache.T = t;
  cache.O = o;
  cache.probes = p;
  cache.reach.resize(size_t(t) + 1);
  cache.D.resize(size_t(t) + 1);
  for (int d = 0; d <= t; ++d) {
    uint64_t nr = 0;
    f.read(reinterpret_cast<char*>(&nr), sizeof nr);
    cache.reach[size_t(d)].resize(nr);
    f.read(reinterpret_cast<char*>(cache.reach[size_t(d)].data()), std::streamsize(nr));
    uint64_t nd = 0;
    f.read(reinterpret_cast<char*>(&nd), sizeof nd);
    cache.D[size_t(d)].resize(nd);
    if (nd)
      f.read(reinterpret_cast<char*>(cache.D[size_t(d)].data()),
             std::streamsize(nd * sizeof(double)));
  }
  if (!f) throw std::runtime_error("truncated cache file " + path);
  return cache;
}

}  // namespace bopq
