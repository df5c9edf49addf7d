#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bopq/pomdp.hpp"
#include "bopq/rng.hpp"

namespace bopq {

// Deterministic stationary FSC; initial node is always node 0.
struct StationaryFsc {
  int m = 1;
  std::vector<int> alpha;               // node -> action
  std::vector<std::vector<int>> beta;   // node x obs -> node
};

// Deterministic clock-aware FSC with stage-indexed maps.
struct ClockAwareFsc {
  int m = 1;
  std::vector<std::vector<int>> alpha;              // stage x node -> action (T stages)
  std::vector<std::vector<std::vector<int>>> beta;  // stage x node x obs -> node (T-1 stages)
};

struct StochasticFsc {
  int m = 1;
  std::vector<std::vector<double>> alpha;              // node -> dist over actions
  std::vector<std::vector<std::vector<double>>> beta;  // node x obs -> dist over nodes
};

using Probe = std::variant<StationaryFsc, ClockAwareFsc, StochasticFsc>;

enum class ProbeKind { StationaryDet, ClockAwareDet, StochasticSampled };

struct ProbeFamily {
  ProbeKind kind;
  int m = 1;
  int T = 1;
  std::vector<Probe> members;
};

inline constexpr int64_t kEnumerationCap = 10000000;

inline int probe_nodes(const Probe& p) {
  return std::visit([](const auto& f) { return f.m; }, p);
}

// Action distribution at (stage, node) as a dense vector.
inline void probe_action_dist(const Probe& p, int stage, int node, int A,
                              std::vector<double>& out) {
  out.assign(A, 0.0);
  if (auto* s = std::get_if<StationaryFsc>(&p)) {
    out[s->alpha[node]] = 1.0;
  } else if (auto* c = std::get_if<ClockAwareFsc>(&p)) {
    out[c->alpha[stage][node]] = 1.0;
  } else {
    out = std::get<StochasticFsc>(p).alpha[node];
  }
}

// Node-transition distribution at (stage, node, obs).
inline void probe_node_dist(const Probe& p, int stage, int node, int obs, int m,
                            std::vector<double>& out) {
  out.assign(m, 0.0);
  if (auto* s = std::get_if<StationaryFsc>(&p)) {
    out[s->beta[node][obs]] = 1.0;
  } else if (auto* c = std::get_if<ClockAwareFsc>(&p)) {
    // Past the last transition stage the node is never consulted again.
    int next = stage < int(c->beta.size()) ? c->beta[stage][node][obs] : 0;
    out[next] = 1.0;
  } else {
    out = std::get<StochasticFsc>(p).beta[node][obs];
  }
}

inline int64_t stationary_family_size(int m, int A, int O) {
  int64_t total = 0;
  for (int mp = 1; mp <= m; ++mp) {
    int64_t n = ipow(A, mp);
    int64_t maps = ipow(mp, mp * O);
    if (n > kEnumerationCap / std::max<int64_t>(maps, 1)) return kEnumerationCap + 1;
    total += n * maps;
    if (total > kEnumerationCap) return kEnumerationCap + 1;
  }
  return total;
}

// All deterministic stationary FSCs with at most m nodes, lexicographic order:
// node count ascending, then action map, then transition map.
inline ProbeFamily enumerate_stationary(int m, int A, int O) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (stationary_family_size(m, A, O) > kEnumerationCap)
    throw std::runtime_error("stationary family exceeds enumeration cap");
  ProbeFamily fam{ProbeKind::StationaryDet, m, 0, {}};
  for (int mp = 1; mp <= m; ++mp) {
    int64_t acts = ipow(A, mp);
    int64_t maps = ipow(mp, mp * O);
    for (int64_t ai = 0; ai < acts; ++ai) {
      StationaryFsc base;
      base.m = mp;
      base.alpha.resize(mp);
      int64_t x = ai;
      for (int n = mp - 1; n >= 0; --n) {
        base.alpha[n] = int(x % A);
        x /= A;
      }
      for (int64_t bi = 0; bi < maps; ++bi) {
        StationaryFsc f = base;
        f.beta.assign(mp, std::vector<int>(O));
        int64_t y = bi;
        for (int n = mp - 1; n >= 0; --n)
          for (int o = O - 1; o >= 0; --o) {
            f.beta[n][o] = int(y % mp);
            y /= mp;
          }
        fam.members.push_back(f);
      }
    }
  }
  return fam;
}

inline int64_t clock_aware_family_size(int m, int T, int A, int O) {
  if (m == 1) return ipow(A, T);
  // Exactly-m stage maps (see enumerate_clock_aware).
  int64_t acts = 1, maps = 1;
  for (int t = 0; t < T; ++t) {
    acts *= ipow(A, m);
    if (acts > kEnumerationCap) return kEnumerationCap + 1;
  }
  for (int t = 0; t + 1 < T; ++t) {
    maps *= ipow(m, m * O);
    if (maps > kEnumerationCap) return kEnumerationCap + 1;
  }
  if (acts > kEnumerationCap / std::max<int64_t>(maps, 1)) return kEnumerationCap + 1;
  return acts * maps;
}

// Clock-aware deterministic family. m=1 reduces to open-loop action
// sequences; for m >= 2 we enumerate all stage-indexed maps over exactly m
// nodes (the published counts fix this convention).
inline ProbeFamily enumerate_clock_aware(int m, int T, int A, int O) {
  if (m < 1 || T < 1) throw std::invalid_argument("m, T must be >= 1");
  if (clock_aware_family_size(m, T, A, O) > kEnumerationCap)
    throw std::runtime_error("clock-aware family exceeds enumeration cap");
  ProbeFamily fam{ProbeKind::ClockAwareDet, m, T, {}};
  if (m == 1) {
    int64_t total = ipow(A, T);
    for (int64_t i = 0; i < total; ++i) {
      ClockAwareFsc f;
      f.m = 1;
      f.alpha.assign(T, std::vector<int>(1));
      f.beta.assign(std::max(T - 1, 0),
                    std::vector<std::vector<int>>(1, std::vector<int>(O, 0)));
      int64_t x = i;
      for (int t = T - 1; t >= 0; --t) {
        f.alpha[t][0] = int(x % A);
        x /= A;
      }
      fam.members.push_back(f);
    }
    return fam;
  }
  int64_t acts_per_stage = ipow(A, m);
  int64_t maps_per_stage = ipow(m, m * O);
  int64_t total_acts = 1, total_maps = 1;
  for (int t = 0; t < T; ++t) total_acts *= acts_per_stage;
  for (int t = 0; t + 1 < T; ++t) total_maps *= maps_per_stage;
  for (int64_t ai = 0; ai < total_acts; ++ai) {
    ClockAwareFsc base;
    base.m = m;
    base.alpha.assign(T, std::vector<int>(m));
    int64_t x = ai;
    for (int t = T - 1; t >= 0; --t)
      for (int n = m - 1; n >= 0; --n) {
        base.alpha[t][n] = int(x % A);
        x /= A;
      }
    for (int64_t bi = 0; bi < total_maps; ++bi) {
      ClockAwareFsc f = base;
      f.beta.assign(T - 1, std::vector<std::vector<int>>(m, std::vector<int>(O)));
      int64_t y = bi;
      for (int t = T - 2; t >= 0; --t)
        for (int n = m - 1; n >= 0; --n)
          for (int o = O - 1; o >= 0; --o) {
            f.beta[t][n][o] = int(y % m);
            y /= m;
          }
      fam.members.push_back(f);
    }
  }
  return fam;
}

inline ProbeFamily sample_stochastic(int m, int count, uint64_t seed, int A, int O) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  ProbeFamily fam{ProbeKind::StochasticSampled, m, 0, {}};
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::substream(seed, uint64_t(i), 0);
    StochasticFsc f;
    f.m = m;
    f.alpha.resize(m);
    f.beta.assign(m, std::vector<std::vector<double>>(O));
    for (int n = 0; n < m; ++n) {
      f.alpha[n] = rng.next_dirichlet(A, 1.0);
      for (int o = 0; o < O; ++o) f.beta[n][o] = rng.next_dirichlet(m, 1.0);
    }
    fam.members.push_back(f);
  }
  return fam;
}

// Canonical text form for artifact reproducibility.
inline std::string probe_serialize(const Probe& p) {
  std::string s;
  auto num = [](double v) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  if (auto* f = std::get_if<StationaryFsc>(&p)) {
    s = "stationary m=" + std::to_string(f->m) + " alpha=";
    for (int a : f->alpha) s += std::to_string(a) + ",";
    s += " beta=";
    for (auto& row : f->beta)
      for (int n : row) s += std::to_string(n) + ",";
  } else if (auto* f = std::get_if<ClockAwareFsc>(&p)) {
    s = "clock m=" + std::to_string(f->m);
    for (size_t t = 0; t < f->alpha.size(); ++t) {
      s += " t" + std::to_string(t) + ":alpha=";
      for (int a : f->alpha[t]) s += std::to_string(a) + ",";
      if (t < f->beta.size()) {
        s += " t" + std::to_string(t) + ":beta=";
        for (auto& row : f->beta[t])
          for (int n : row) s += std::to_string(n) + ",";
      }
    }
  } else {
    auto& g = std::get<StochasticFsc>(p);
    s = "stochastic m=" + std::to_string(g.m) + " alpha=";
    for (auto& row : g.alpha)
      for (double v : row) s += num(v) + ",";
    s += " beta=";
    for (auto& bo : g.beta)
      for (auto& row : bo)
        for (double v : row) s += num(v) + ",";
  }
  return s;
}

inline std::string family_descriptor(const ProbeFamily& fam) {
  std::string kind = fam.kind == ProbeKind::StationaryDet    ? "stationary"
                     : fam.kind == ProbeKind::ClockAwareDet ? "clock-aware"
                                                            : "stochastic";
  std::string s = kind + " m<=" + std::to_string(fam.m) + " size=" +
                  std::to_string(fam.members.size());
  if (fam.T > 0) s += " T=" + std::to_string(fam.T);
  return s;
}

}  // namespace bopq
