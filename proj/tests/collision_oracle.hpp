#pragma once

// Brute-force re-implementation of the collision predicate table, written
// directly from the documented inequality forms and sharing no code with the
// engine. Used to certify detect_collisions on random instances and to pin
// the zero-spread S1 count.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

struct Hit {
  std::string type;
  std::vector<int> qubits;
  double detuning;
};

inline bool hit_less(const Hit& a, const Hit& b) {
  return std::tie(a.type, a.qubits) < std::tie(b.type, b.qubits);
}

inline std::vector<int> other_neighbours(
    const std::vector<std::pair<int, int>>& edges, int q, int exclude) {
  std::vector<int> out;
  for (auto [a, b] : edges) {
    int n = -1;
    if (a == q) n = b;
    if (b == q) n = a;
    if (n >= 0 && n != exclude) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Hit> collisions(const std::vector<double>& f,
                                   const std::vector<std::pair<int, int>>& edges,
                                   double alpha,
                                   const std::map<std::string, double>& thr,
                                   const std::set<std::string>& enabled) {
  std::vector<Hit> hits;
  const auto on = [&](const char* t) { return enabled.count(t) > 0; };
  const auto d = [&](const char* t) { return thr.at(t); };

  for (auto [x, y] : edges) {
    const int i = std::min(x, y);
    const int j = std::max(x, y);

    if (on("A1") && std::abs(f[i] - f[j]) < d("A1"))
      hits.push_back({"A1", {i, j}, f[i] - f[j]});

    if (on("A2")) {
      for (auto [p, q] : {std::pair{i, j}, std::pair{j, i}}) {
        const double det = f[p] - (f[q] + alpha / 2.0);
        if (std::abs(det) < d("A2")) hits.push_back({"A2", {p, q}, det});
      }
    }

    if (on("C1")) {
      const double gap = std::abs(f[i] - f[j]);
      if (!(gap > d("C1") && gap < std::abs(alpha) - d("C1"))) {
        const int c = f[i] >= f[j] ? i : j;
        const int t = f[i] >= f[j] ? j : i;
        hits.push_back({"C1", {c, t}, std::min(gap, std::abs(alpha) - gap)});
      }
    }

    if (on("D1")) {
      for (auto [p, q] : {std::pair{i, j}, std::pair{j, i}}) {
        const double det = f[p] + alpha / 2.0 - f[q];
        if (std::abs(det) < d("D1")) hits.push_back({"D1", {p, q}, det});
      }
    }

    for (auto [c, t] : {std::pair{i, j}, std::pair{j, i}}) {
      const double fd = f[t];
      if (on("E1") && std::abs(f[c] - fd) < d("E1"))
        hits.push_back({"E1", {c, t}, f[c] - fd});
      if (on("E2")) {
        const double det = f[c] - (fd + alpha / 2.0);
        if (std::abs(det) < d("E2")) hits.push_back({"E2", {c, t}, det});
      }
    }
  }

  for (auto [x, y] : edges) {
    for (auto [c, t] : {std::pair{x, y}, std::pair{y, x}}) {
      const double fd = f[t];
      for (int k : other_neighbours(edges, c, t)) {
        if (on("S1") && std::abs(fd - f[k]) < d("S1"))
          hits.push_back({"S1", {c, t, k}, fd - f[k]});
        if (on("S2")) {
          const double det = fd - (f[k] + alpha);
          if (std::abs(det) < d("S2")) hits.push_back({"S2", {c, t, k}, det});
        }
        if (on("T1")) {
          const double det = 2.0 * fd - (f[c] + f[k]);
          if (std::abs(det) < d("T1")) hits.push_back({"T1", {c, t, k}, det});
        }
      }
    }
  }

  std::sort(hits.begin(), hits.end(), hit_less);
  return hits;
}

inline std::map<std::string, double> default_thresholds() {
  return {{"A1", 17e6}, {"A2", 4e6}, {"C1", 10e6}, {"D1", 25e6},
          {"E1", 17e6}, {"E2", 4e6}, {"S1", 17e6}, {"S2", 4e6}, {"T1", 17e6}};
}

inline std::set<std::string> default_enabled() {
  return {"A1", "A2", "C1", "D1", "S1", "S2", "T1"};
}

} // namespace oracle
