#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bopq/pomdp.hpp"
#include "bopq/rng.hpp"

namespace bopq {

inline Pomdp tiger_listen_only(double accuracy = 0.85) {
  Pomdp M;
  M.name = "tiger";
  M.S = 2;
  M.A = 1;
  M.O = 2;
  M.action_names = {"listen"};
  M.obs_names = {"L", "R"};
  M.P.assign(2, std::vector<std::vector<double>>(1, std::vector<double>(2, 0.0)));
  M.P[0][0][0] = 1.0;
  M.P[1][0][1] = 1.0;
  M.Z.assign(2, std::vector<std::vector<double>>(1, std::vector<double>(2, 0.0)));
  M.Z[0][0] = {accuracy, 1 - accuracy};
  M.Z[1][0] = {1 - accuracy, accuracy};
  M.R.assign(2, std::vector<double>(1, -1.0));
  M.b0 = {0.5, 0.5};
  M.obs_metric = GroundMetric::discrete(2);
  M.validate();
  return M;
}

inline Pomdp tiger_full(double accuracy = 0.85) {
  Pomdp M;
  M.name = "tiger-full";
  M.S = 2;
  M.A = 3;
  M.O = 2;
  M.action_names = {"listen", "open-left", "open-right"};
  M.obs_names = {"L", "R"};
  M.P.assign(2, std::vector<std::vector<double>>(3, std::vector<double>(2, 0.0)));
  M.Z.assign(2, std::vector<std::vector<double>>(3, std::vector<double>(2, 0.0)));
  for (int s = 0; s < 2; ++s) {
    M.P[s][0][s] = 1.0;  // listen keeps the state
    for (int a = 1; a < 3; ++a) M.P[s][a] = {0.5, 0.5};  // open resets uniformly
  }
  for (int sp = 0; sp < 2; ++sp) {
    M.Z[sp][0] = sp == 0 ? std::vector<double>{accuracy, 1 - accuracy}
                         : std::vector<double>{1 - accuracy, accuracy};
    M.Z[sp][1] = {0.5, 0.5};  // opening is uninformative
    M.Z[sp][2] = {0.5, 0.5};
  }
  M.R.assign(2, std::vector<double>(3, 0.0));
  M.R[0][0] = M.R[1][0] = -1.0;
  M.R[0][1] = -100.0;  // tiger behind the opened door
  M.R[0][2] = 10.0;
  M.R[1][1] = 10.0;
  M.R[1][2] = -100.0;
  M.b0 = {0.5, 0.5};
  M.obs_metric = GroundMetric::discrete(2);
  M.validate();
  return M;
}

inline GroundMetric quadrant_metric() {
  // NW=00, NE=01, SW=10, SE=11; distance = half the Hamming distance.
  GroundMetric g;
  g.name = "quadrant";
  g.n = 4;
  g.d.assign(16, 0.0);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      g.d[a * 4 + b] = 0.5 * (((a ^ b) & 1) + (((a ^ b) >> 1) & 1));
  return g;
}

inline Pomdp gridworld(int n) {
  if (n < 2) throw std::invalid_argument("gridworld needs n >= 2");
  Pomdp M;
  M.name = "gridworld:" + std::to_string(n);
  M.S = n * n;
  M.A = 5;
  M.O = 4;
  M.action_names = {"Up", "Down", "Left", "Right", "Stay"};
  M.obs_names = {"NW", "NE", "SW", "SE"};
  M.P.assign(M.S, std::vector<std::vector<double>>(5, std::vector<double>(M.S, 0.0)));
  M.Z.assign(M.S, std::vector<std::vector<double>>(5, std::vector<double>(4, 0.0)));
  const int dr[5] = {-1, 1, 0, 0, 0};
  const int dc[5] = {0, 0, -1, 1, 0};
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int s = r * n + c;
      for (int a = 0; a < 5; ++a) {
        int rr = std::min(std::max(r + dr[a], 0), n - 1);
        int cc = std::min(std::max(c + dc[a], 0), n - 1);
        int t = rr * n + cc;
        M.P[s][a][t] += 0.9;
        M.P[s][a][s] += 0.1;  // stay-slip
      }
      int quad = ((r > (n - 1) / 2) ? 2 : 0) + ((c > (n - 1) / 2) ? 1 : 0);
      for (int a = 0; a < 5; ++a)
        for (int o = 0; o < 4; ++o) M.Z[s][a][o] = (o == quad) ? 0.85 : 0.05;
    }
  M.R.assign(M.S, std::vector<double>(5, 0.0));
  for (int a = 0; a < 5; ++a) M.R[M.S - 1][a] = 1.0;  // goal cell (n-1,n-1)
  M.b0.assign(M.S, 1.0 / M.S);
  M.obs_metric = quadrant_metric();
  M.validate();
  return M;
}

inline Pomdp rocksample(int n, int k) {
  if (n < 2 || k < 1 || k > 16) throw std::invalid_argument("rocksample size invalid");
  Pomdp M;
  M.name = "rocksample:" + std::to_string(n) + "," + std::to_string(k);
  int cells = n * n;
  int masks = 1 << k;
  M.S = cells * masks + 1;  // + terminal
  M.A = 5 + k;              // 4 moves, sample, k checks
  M.O = 3;                  // good, bad, null
  M.action_names = {"Up", "Down", "Left", "Right", "Sample"};
  for (int i = 0; i < k; ++i) M.action_names.push_back("Check" + std::to_string(i));
  M.obs_names = {"good", "bad", "null"};
  int term = M.S - 1;

  // Deterministic seeded rock placement (distinct cells).
  Rng rng = Rng::substream(0x9E3779B97F4A7C15ULL, uint64_t(n) * 131 + k, 0);
  std::vector<int> rock_cell;
  std::vector<bool> used(cells, false);
  while (int(rock_cell.size()) < k) {
    int c = rng.next_int(cells);
    if (!used[c]) {
      used[c] = true;
      rock_cell.push_back(c);
    }
  }

  M.P.assign(M.S, std::vector<std::vector<double>>(M.A, std::vector<double>(M.S, 0.0)));
  M.Z.assign(M.S, std::vector<std::vector<double>>(M.A, std::vector<double>(3, 0.0)));
  M.R.assign(M.S, std::vector<double>(M.A, 0.0));
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  for (int a = 0; a < M.A; ++a) M.P[term][a][term] = 1.0;
  for (int pos = 0; pos < cells; ++pos) {
    int r = pos / n, c = pos % n;
    for (int mask = 0; mask < masks; ++mask) {
      int s = pos * masks + mask;
      for (int a = 0; a < 4; ++a) {
        int rr = r + dr[a], cc = c + dc[a];
        if (a == 3 && cc >= n) {
          M.P[s][a][term] = 1.0;  // exit east
          M.R[s][a] = 10.0;
          continue;
        }
        rr = std::min(std::max(rr, 0), n - 1);
        cc = std::min(std::max(cc, 0), n - 1);
        M.P[s][a][(rr * n + cc) * masks + mask] = 1.0;
      }
      // Sample: a good rock at the rover's cell turns bad and pays +10.
      int here = -1;
      for (int i = 0; i < k; ++i)
        if (rock_cell[i] == pos) here = i;
      if (here >= 0 && (mask >> here & 1)) {
        M.P[s][4][pos * masks + (mask & ~(1 << here))] = 1.0;
        M.R[s][4] = 10.0;
      } else {
        M.P[s][4][s] = 1.0;
        M.R[s][4] = here >= 0 ? -10.0 : 0.0;
      }
      for (int i = 0; i < k; ++i) M.P[s][5 + i][s] = 1.0;  // checks keep state
    }
  }
  // Observations depend on the arriving state and the action taken.
  for (int sp = 0; sp < M.S; ++sp) {
    for (int a = 0; a < M.A; ++a) {
      if (sp == term || a < 5) {
        M.Z[sp][a] = {0.0, 0.0, 1.0};  // moves/sample/terminal emit null
        continue;
      }
      int i = a - 5;
      int pos = sp / masks, mask = sp % masks;
      double dx = double(pos / n - rock_cell[i] / n);
      double dy = double(pos % n - rock_cell[i] % n);
      double dist = std::sqrt(dx * dx + dy * dy);
      double acc = 0.5 + 0.5 * std::pow(2.0, -dist / 2.0);
      bool good = (mask >> i) & 1;
      M.Z[sp][a][0] = good ? acc : 1 - acc;
      M.Z[sp][a][1] = good ? 1 - acc : acc;
      M.Z[sp][a][2] = 0.0;
    }
  }
  // Initial belief: rover at (n/2, 0) as usual, rocks independently good w.p. 1/2.
  M.b0.assign(M.S, 0.0);
  int start = (n / 2) * n + 0;
  for (int mask = 0; mask < masks; ++mask) M.b0[start * masks + mask] = 1.0 / masks;
  M.obs_metric = GroundMetric::discrete(3);
  M.validate();
  return M;
}

inline Pomdp hallway(int L) {
  if (L < 2) throw std::invalid_argument("hallway needs L >= 2");
  Pomdp M;
  M.name = "hallway:" + std::to_string(L);
  M.S = L;
  M.A = 2;
  M.O = 3;
  M.action_names = {"Left", "Right"};
  M.obs_names = {"lm0", "lm1", "lm2"};
  M.P.assign(L, std::vector<std::vector<double>>(2, std::vector<double>(L, 0.0)));
  M.Z.assign(L, std::vector<std::vector<double>>(2, std::vector<double>(3, 0.0)));
  for (int s = 0; s < L; ++s) {
    M.P[s][0][std::max(s - 1, 0)] = 1.0;
    M.P[s][1][std::min(s + 1, L - 1)] = 1.0;
    int lm = s % 3;  // cyclically assigned landmarks
    for (int a = 0; a < 2; ++a)
      for (int o = 0; o < 3; ++o) M.Z[s][a][o] = (o == lm) ? 0.9 : 0.05;
  }
  M.R.assign(L, std::vector<double>(2, 0.0));
  for (int a = 0; a < 2; ++a) M.R[L - 1][a] = 1.0;
  M.b0.assign(L, 1.0 / L);
  M.obs_metric = GroundMetric::discrete(3);
  M.validate();
  return M;
}

inline Pomdp network_monitoring(int n) {
  if (n < 1 || n > 16) throw std::invalid_argument("network size invalid");
  Pomdp M;
  M.name = "network:" + std::to_string(n);
  M.S = 1 << n;  // bitmask of failed nodes
  M.A = n + 1;   // n probes + reboot
  M.O = 3;       // ok, fault, null
  for (int i = 0; i < n; ++i) M.action_names.push_back("Probe" + std::to_string(i));
  M.action_names.push_back("Reboot");
  M.obs_names = {"ok", "fault", "null"};
  M.P.assign(M.S, std::vector<std::vector<double>>(M.A, std::vector<double>(M.S, 0.0)));
  M.Z.assign(M.S, std::vector<std::vector<double>>(M.A, std::vector<double>(3, 0.0)));
  const double fail = 0.1;
  for (int s = 0; s < M.S; ++s) {
    for (int a = 0; a < M.A; ++a) {
      int base = (a == n) ? 0 : s;  // reboot repairs everything first
      // Each currently working node then fails independently.
      for (int t = 0; t < M.S; ++t) {
        if ((t & base) != base) continue;  // failed nodes stay failed
        double pr = 1.0;
        for (int i = 0; i < n; ++i) {
          if (base >> i & 1) continue;
          pr *= (t >> i & 1) ? fail : 1 - fail;
        }
        M.P[s][a][t] = pr;
      }
    }
  }
  for (int sp = 0; sp < M.S; ++sp) {
    for (int a = 0; a < n; ++a) {
      bool down = sp >> a & 1;
      M.Z[sp][a][0] = down ? 0.05 : 0.95;
      M.Z[sp][a][1] = down ? 0.95 : 0.05;
      M.Z[sp][a][2] = 0.0;
    }
    M.Z[sp][n] = {0.0, 0.0, 1.0};
  }
  M.R.assign(M.S, std::vector<double>(M.A, 0.0));
  for (int s = 0; s < M.S; ++s) {
    double up = n - __builtin_popcount(unsigned(s));
    for (int a = 0; a < M.A; ++a) M.R[s][a] = up / n - (a == n ? 0.5 : 0.0);
  }
  M.b0.assign(M.S, 0.0);
  M.b0[0] = 1.0;
  M.obs_metric = GroundMetric::discrete(3);
  M.validate();
  return M;
}

inline Pomdp random_pomdp(int S, int O, uint64_t seed, bool structured = false) {
  if (S < 1 || O < 1) throw std::invalid_argument("random_pomdp size invalid");
  Pomdp M;
  M.name = (structured ? "random-structured:" : "random:") + std::to_string(S) + "," +
           std::to_string(O) + ",seed=" + std::to_string(seed);
  M.S = S;
  M.A = 4;
  M.O = O;
  Rng rng = Rng::substream(seed, 0, 0);
  M.P.assign(S, std::vector<std::vector<double>>(M.A));
  M.Z.assign(S, std::vector<std::vector<double>>(M.A));
  M.R.assign(S, std::vector<double>(M.A));
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < M.A; ++a) {
      if (structured && S > 3) {
        std::vector<double> row(S, 0.0);
        std::vector<int> succ;
        while (int(succ.size()) < 3) {
          int t = rng.next_int(S);
          bool dup = false;
          for (int u : succ) dup |= (u == t);
          if (!dup) succ.push_back(t);
        }
        auto w = rng.next_dirichlet(3, 1.0);
        for (int i = 0; i < 3; ++i) row[succ[i]] = w[i];
        M.P[s][a] = row;
      } else {
        M.P[s][a] = rng.next_dirichlet(S, 1.0);
      }
      M.Z[s][a] = rng.next_dirichlet(O, 1.0);
      M.R[s][a] = rng.next_double();
    }
  M.b0.assign(S, 1.0 / S);
  M.obs_metric = GroundMetric::discrete(O);
  M.validate();
  return M;
}

inline Pomdp stationary_witness() {
  Pomdp M;
  M.name = "witness";
  // States: 0=p_L 1=p_R 2=x_0 3=y_0 4=x_1 5=y_1 6=d_U 7=d_X 8=d_Y
  M.S = 9;
  M.A = 2;
  M.O = 5;
  M.action_names = {"A", "B"};
  M.obs_names = {"L", "R", "U", "X", "Y"};
  M.P.assign(9, std::vector<std::vector<double>>(2, std::vector<double>(9, 0.0)));
  M.Z.assign(9, std::vector<std::vector<double>>(2, std::vector<double>(5, 0.0)));
  auto det = [&](int s, int a, int t) { M.P[s][a][t] = 1.0; };
  det(0, 0, 2);
  det(0, 1, 2);  // p_L -> x_0 either action
  det(1, 0, 3);
  det(1, 1, 3);  // p_R -> y_0
  det(2, 0, 4);  // x_0 -A-> x_1
  det(2, 1, 6);  // x_0 -B-> d_U
  det(3, 0, 5);  // y_0 -A-> y_1
  det(3, 1, 6);  // y_0 -B-> d_U
  det(4, 0, 6);  // x_1 -A-> d_U
  det(4, 1, 7);  // x_1 -B-> d_X
  det(5, 0, 6);  // y_1 -A-> d_U
  det(5, 1, 8);  // y_1 -B-> d_Y
  for (int a = 0; a < 2; ++a) {
    det(6, a, 6);
    det(7, a, 7);
    det(8, a, 8);
  }
  // Emissions by arriving state: x_0 emits L, y_0 emits R, x_1/y_1/d_U emit U,
  // d_X emits X, d_Y emits Y; p_L/p_R are never arrived at (emit U).
  const int emit[9] = {2, 2, 0, 1, 2, 2, 2, 3, 4};
  for (int sp = 0; sp < 9; ++sp)
    for (int a = 0; a < 2; ++a) M.Z[sp][a][emit[sp]] = 1.0;
  M.R.assign(9, std::vector<double>(2, 0.0));
  M.b0.assign(9, 0.0);
  M.b0[0] = M.b0[1] = 0.5;
  M.obs_metric = GroundMetric::discrete(5);
  M.validate();
  return M;
}

// CLI spec string form: "tiger", "tiger-full", "gridworld:5", "rocksample:4,4",
// "network:9", "hallway:8", "random:100,4,seed=7", "random-structured:...",
// "witness".
inline Pomdp parse_benchmark(const std::string& spec) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto split = [&](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
  };
  if (kind == "tiger") return tiger_listen_only();
  if (kind == "tiger-full") return tiger_full();
  if (kind == "witness") return stationary_witness();
  auto parts = split(args);
  if (kind == "gridworld") return gridworld(std::stoi(parts.at(0)));
  if (kind == "rocksample") return rocksample(std::stoi(parts.at(0)), std::stoi(parts.at(1)));
  if (kind == "network") return network_monitoring(std::stoi(parts.at(0)));
  if (kind == "hallway") return hallway(std::stoi(parts.at(0)));
  if (kind == "random" || kind == "random-structured") {
    int S = std::stoi(parts.at(0));
    int O = std::stoi(parts.at(1));
    uint64_t seed = 0;
    if (parts.size() > 2) {
      auto eq = parts[2].find('=');
      seed = std::stoull(eq == std::string::npos ? parts[2] : parts[2].substr(eq + 1));
    }
    return random_pomdp(S, O, seed, kind == "random-structured");
  }
  throw std::invalid_argument("unknown benchmark: " + spec);
}

}  // namespace bopq
