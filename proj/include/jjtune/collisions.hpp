#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "jjtune/junction.hpp"
#include "jjtune/layout.hpp"
#include "jjtune/stats.hpp"
#include "jjtune/transmon.hpp"

namespace jjtune {

// Frequency-collision taxonomy for the cross-resonance architecture.
// With f_i, f_j adjacent qubits, alpha < 0 the anharmonicity, f_d = f_t the
// drive tone of a directed gate c->t, and k a spectator adjacent to the
// control (k != t):
//
//   A1  edge (i,j)            |f_i - f_j| < dA1
//   A2  directed (i,j)        |f_i - (f_j + alpha/2)| < dA2
//   C1  edge (i,j)            NOT (dC1 < |f_i - f_j| < |alpha| - dC1)
//                             (straddling window; dC1 = 0 flags exit only)
//   D1  directed (i,j)        |f_i + alpha/2 - f_j| < dD1
//   E1  gate (c,t)            |f_c - f_d| < dE1          (= A1 when f_d = f_t)
//   E2  gate (c,t)            |f_c - (f_d + alpha/2)| < dE2
//   S1  gate (c,t), spect k   |f_d - f_k| < dS1
//   S2  gate (c,t), spect k   |f_d - (f_k + alpha)| < dS2
//   T1  gate (c,t), spect k   |2 f_d - (f_c + f_k)| < dT1
//
// E1/E2 are disabled by default: a CR gate drives the control at its
// neighbour's frequency, which makes them duplicates of A1/A2.

enum class CollisionType { A1, A2, C1, D1, E1, E2, S1, S2, T1 };

inline constexpr std::array<CollisionType, 9> kAllCollisionTypes = {
    CollisionType::A1, CollisionType::A2, CollisionType::C1,
    CollisionType::D1, CollisionType::E1, CollisionType::E2,
    CollisionType::S1, CollisionType::S2, CollisionType::T1};

inline const char* to_string(CollisionType t) {
  switch (t) {
    case CollisionType::A1: return "A1";
    case CollisionType::A2: return "A2";
    case CollisionType::C1: return "C1";
    case CollisionType::D1: return "D1";
    case CollisionType::E1: return "E1";
    case CollisionType::E2: return "E2";
    case CollisionType::S1: return "S1";
    case CollisionType::S2: return "S2";
    case CollisionType::T1: return "T1";
  }
  return "?";
}

inline CollisionType collision_type_from_string(const std::string& s) {
  for (CollisionType t : kAllCollisionTypes)
    if (s == to_string(t)) return t;
  throw validation_error("unknown collision type: " + s);
}

/// Detection thresholds and which types are evaluated. The defaults are
/// gate-bandwidth-order configuration values; acceptance tests pin their own.
struct CollisionParams {
  double anharmonicity_hz = -200e6;
  std::map<CollisionType, double> thresholds_hz = {
      {CollisionType::A1, 17e6}, {CollisionType::A2, 4e6},
      {CollisionType::C1, 10e6}, {CollisionType::D1, 25e6},
      {CollisionType::E1, 17e6}, {CollisionType::E2, 4e6},
      {CollisionType::S1, 17e6}, {CollisionType::S2, 4e6},
      {CollisionType::T1, 17e6}};
  std::set<CollisionType> enabled = {
      CollisionType::A1, CollisionType::A2, CollisionType::C1,
      CollisionType::D1, CollisionType::S1, CollisionType::S2,
      CollisionType::T1};

  double threshold(CollisionType t) const {
    auto it = thresholds_hz.find(t);
    return it == thresholds_hz.end() ? 0.0 : it->second;
  }

  void validate() const {
    if (!(anharmonicity_hz < 0.0))
      throw validation_error("collision params: anharmonicity must be negative");
    for (const auto& [t, d] : thresholds_hz)
      if (d < 0.0)
        throw validation_error("collision params: negative threshold for " +
                               std::string(to_string(t)));
  }
};

/// One detected collision. participants[2] is -1 for two-qubit types.
/// detuning is the signed distance to the resonance condition; for C1 it is
/// the signed distance into the straddling window (negative = outside).
struct CollisionHit {
  CollisionType type;
  std::array<int, 3> participants;
  double detuning_hz = 0.0;

  friend bool operator==(const CollisionHit&, const CollisionHit&) = default;
};

struct CollisionReport {
  std::map<CollisionType, std::size_t> per_type_counts;
  std::vector<CollisionHit> hits;
  std::size_t total_excluding_s1 = 0;

  std::size_t total_enabled() const {
    std::size_t n = 0;
    for (const auto& [t, c] : per_type_counts) n += c;
    return n;
  }
};

namespace detail {

inline void add_hit(CollisionReport& rep, CollisionType t, int a, int b, int c,
                    double detuning) {
  rep.hits.push_back({t, {a, b, c}, detuning});
}

} // namespace detail

/// Evaluate the full predicate table on per-qubit frequencies (vector indexed
/// by qubit). Hits are reported in a canonical order (type, participants).
inline CollisionReport detect_collisions(const std::vector<double>& freqs,
                                         const QpuLayout& layout,
                                         const CollisionParams& params) {
  layout.validate();
  params.validate();
  if (static_cast<int>(freqs.size()) != layout.qubit_count)
    throw validation_error("detect_collisions: frequency count != qubit count");
  for (double f : freqs)
    if (!(f > 0.0))
      throw validation_error("detect_collisions: frequencies must be positive");

  const double alpha = params.anharmonicity_hz;
  const auto on = [&](CollisionType t) { return params.enabled.count(t) > 0; };
  CollisionReport rep;

  for (auto [x, y] : layout.edges) {
    const int i = std::min(x, y), j = std::max(x, y);
    const double fi = freqs[i], fj = freqs[j];

    if (on(CollisionType::A1) &&
        std::abs(fi - fj) < params.threshold(CollisionType::A1))
      detail::add_hit(rep, CollisionType::A1, i, j, -1, fi - fj);

    if (on(CollisionType::A2)) {
      for (auto [p, q] : {std::pair{i, j}, std::pair{j, i}}) {
        const double d = freqs[p] - (freqs[q] + alpha / 2.0);
        if (std::abs(d) < params.threshold(CollisionType::A2))
          detail::add_hit(rep, CollisionType::A2, p, q, -1, d);
      }
    }

    if (on(CollisionType::C1)) {
      // straddling requirement on the pair: the gap must sit inside
      // (dC1, |alpha| - dC1); the higher-frequency qubit is the control.
      const double gap = std::abs(fi - fj);
      const double margin = params.threshold(CollisionType::C1);
      if (!(gap > margin && gap < std::abs(alpha) - margin)) {
        const int c = fi >= fj ? i : j;
        const int t = fi >= fj ? j : i;
        detail::add_hit(rep, CollisionType::C1, c, t, -1,
                        std::min(gap, std::abs(alpha) - gap));
      }
    }

    if (on(CollisionType::D1)) {
      for (auto [p, q] : {std::pair{i, j}, std::pair{j, i}}) {
        const double d = freqs[p] + alpha / 2.0 - freqs[q];
        if (std::abs(d) < params.threshold(CollisionType::D1))
          detail::add_hit(rep, CollisionType::D1, p, q, -1, d);
      }
    }

    if (on(CollisionType::E1) || on(CollisionType::E2)) {
      for (auto [c, t] : {std::pair{i, j}, std::pair{j, i}}) {
        const double fd = freqs[t];
        if (on(CollisionType::E1)) {
          const double d = freqs[c] - fd;
          if (std::abs(d) < params.threshold(CollisionType::E1))
            detail::add_hit(rep, CollisionType::E1, c, t, -1, d);
        }
        if (on(CollisionType::E2)) {
          const double d = freqs[c] - (fd + alpha / 2.0);
          if (std::abs(d) < params.threshold(CollisionType::E2))
            detail::add_hit(rep, CollisionType::E2, c, t, -1, d);
        }
      }
    }
  }

  // spectator triples: every edge gives two directed gates; spectators are
  // the control's other neighbours, driven at f_d = f_t
  if (on(CollisionType::S1) || on(CollisionType::S2) || on(CollisionType::T1)) {
    for (auto [x, y] : layout.edges) {
      for (auto [c, t] : {std::pair{x, y}, std::pair{y, x}}) {
        const double fd = freqs[t];
        for (int k : layout.neighbours(c)) {
          if (k == t) continue;
          if (on(CollisionType::S1)) {
            const double d = fd - freqs[k];
            if (std::abs(d) < params.threshold(CollisionType::S1))
              detail::add_hit(rep, CollisionType::S1, c, t, k, d);
          }
          if (on(CollisionType::S2)) {
            const double d = fd - (freqs[k] + alpha);
            if (std::abs(d) < params.threshold(CollisionType::S2))
              detail::add_hit(rep, CollisionType::S2, c, t, k, d);
          }
          if (on(CollisionType::T1)) {
            const double d = 2.0 * fd - (freqs[c] + freqs[k]);
            if (std::abs(d) < params.threshold(CollisionType::T1))
              detail::add_hit(rep, CollisionType::T1, c, t, k, d);
          }
        }
      }
    }
  }

  std::sort(rep.hits.begin(), rep.hits.end(),
            [](const CollisionHit& a, const CollisionHit& b) {
              return std::tie(a.type, a.participants) <
                     std::tie(b.type, b.participants);
            });
  for (const auto& h : rep.hits) ++rep.per_type_counts[h.type];
  rep.total_excluding_s1 = 0;
  for (const auto& [t, n] : rep.per_type_counts)
    if (t != CollisionType::S1) rep.total_excluding_s1 += n;
  return rep;
}

/// Map each qubit of a die to its frequency from the latest measured
/// resistance. Out-of-spec junctions keep their flag but still get a
/// frequency.
inline std::vector<double> assign_frequencies(
    const std::vector<Junction>& die_junctions, const QpuLayout& layout,
    const PhysicsConfig& physics) {
  std::vector<double> freqs(static_cast<std::size_t>(layout.qubit_count), 0.0);
  std::vector<bool> seen(static_cast<std::size_t>(layout.qubit_count), false);
  for (const auto& j : die_junctions) {
    if (j.qubit_index < 0 || j.qubit_index >= layout.qubit_count)
      throw validation_error("assign_frequencies: qubit index " +
                             std::to_string(j.qubit_index) + " outside layout");
    if (seen[static_cast<std::size_t>(j.qubit_index)])
      throw validation_error("assign_frequencies: duplicate qubit index " +
                             std::to_string(j.qubit_index));
    seen[static_cast<std::size_t>(j.qubit_index)] = true;
    freqs[static_cast<std::size_t>(j.qubit_index)] = frequency_from_resistance(
        j.latest_resistance(), physics, /*allow_regime_violation=*/true);
  }
  for (int q = 0; q < layout.qubit_count; ++q)
    if (!seen[static_cast<std::size_t>(q)])
      throw validation_error("assign_frequencies: missing qubit index " +
                             std::to_string(q));
  return freqs;
}

/// Per-die collision reports over a whole wafer. Incomplete dies are skipped
/// and listed. Die evaluation is independent, so it can fan out over
/// `threads`; the merge order is fixed by die coordinates either way.
struct WaferCollisionMap {
  std::map<std::pair<int, int>, CollisionReport> per_die;
  std::vector<std::pair<int, int>> skipped_dies;

  /// Histogram over dies of total_excluding_s1 (sums to the die count).
  std::map<std::size_t, std::size_t> histogram_excluding_s1() const {
    std::map<std::size_t, std::size_t> h;
    for (const auto& [die, rep] : per_die) ++h[rep.total_excluding_s1];
    return h;
  }

  std::size_t total_excluding_s1() const {
    std::size_t n = 0;
    for (const auto& [die, rep] : per_die) n += rep.total_excluding_s1;
    return n;
  }

  std::size_t total_enabled() const {
    std::size_t n = 0;
    for (const auto& [die, rep] : per_die) n += rep.total_enabled();
    return n;
  }
};

inline WaferCollisionMap wafer_collision_map(const Wafer& wafer,
                                             const QpuLayout& layout,
                                             const CollisionParams& params,
                                             const PhysicsConfig& physics,
                                             unsigned threads = 1) {
  std::map<std::pair<int, int>, std::vector<Junction>> dies;
  for (const auto& j : wafer.junctions)
    dies[{j.die_row, j.die_col}].push_back(j);

  std::vector<std::pair<int, int>> keys;
  keys.reserve(dies.size());
  for (const auto& [key, js] : dies) keys.push_back(key);

  WaferCollisionMap out;
  std::vector<int> ok(keys.size(), 0);
  std::vector<CollisionReport> reports(keys.size());

  auto eval_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& js = dies.at(keys[i]);
      if (static_cast<int>(js.size()) != layout.qubit_count) continue;
      try {
        reports[i] =
            detect_collisions(assign_frequencies(js, layout, physics),
                              layout, params);
        ok[i] = 1;
      } catch (const validation_error&) {
        ok[i] = 0;
      }
    }
  };

  if (threads <= 1 || keys.size() < 2) {
    eval_range(0, keys.size());
  } else {
    const std::size_t n = std::min<std::size_t>(threads, keys.size());
    std::vector<std::thread> pool;
    const std::size_t chunk = (keys.size() + n - 1) / n;
    for (std::size_t t = 0; t < n; ++t)
      pool.emplace_back(eval_range, t * chunk,
                        std::min(keys.size(), (t + 1) * chunk));
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (ok[i])
      out.per_die.emplace(keys[i], std::move(reports[i]));
    else
      out.skipped_dies.push_back(keys[i]);
  }
  return out;
}

/// Appendix-B style assessment: every qubit exactly at its group target.
/// For the validated default layout the report contains S1 hits only.
inline CollisionReport zero_spread_assessment(const QpuLayout& layout,
                                              const CollisionParams& params) {
  layout.validate();
  std::vector<double> freqs;
  freqs.reserve(static_cast<std::size_t>(layout.qubit_count));
  for (int q = 0; q < layout.qubit_count; ++q)
    freqs.push_back(layout.target_frequency_hz.at(layout.group_of[q]));
  return detect_collisions(freqs, layout, params);
}

// --- JSON -------------------------------------------------------------

inline nlohmann::json to_json(const CollisionParams& p) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["anharmonicity_hz"] = p.anharmonicity_hz;
  auto& thr = j["thresholds_hz"] = nlohmann::json::object();
  for (const auto& [t, d] : p.thresholds_hz) thr[to_string(t)] = d;
  auto& en = j["enabled"] = nlohmann::json::array();
  for (CollisionType t : kAllCollisionTypes)
    if (p.enabled.count(t)) en.push_back(to_string(t));
  return j;
}

inline CollisionParams collision_params_from_json(const nlohmann::json& j) {
  CollisionParams p;
  p.anharmonicity_hz = j.value("anharmonicity_hz", p.anharmonicity_hz);
  if (j.contains("thresholds_hz"))
    for (const auto& [key, val] : j.at("thresholds_hz").items())
      p.thresholds_hz[collision_type_from_string(key)] = val.get<double>();
  if (j.contains("enabled")) {
    p.enabled.clear();
    for (const auto& t : j.at("enabled"))
      p.enabled.insert(collision_type_from_string(t.get<std::string>()));
  }
  p.validate();
  return p;
}

inline nlohmann::json to_json(const CollisionReport& rep) {
  nlohmann::json j;
  j["schema_version"] = 1;
  auto& counts = j["per_type_counts"] = nlohmann::json::object();
  for (CollisionType t : kAllCollisionTypes) {
    auto it = rep.per_type_counts.find(t);
    if (it != rep.per_type_counts.end()) counts[to_string(t)] = it->second;
  }
  auto& hits = j["hits"] = nlohmann::json::array();
  for (const auto& h : rep.hits) {
    nlohmann::json e;
    e["type"] = to_string(h.type);
    auto& parts = e["participants"] = nlohmann::json::array();
    for (int p : h.participants)
      if (p >= 0) parts.push_back(p);
    e["detuning_hz"] = h.detuning_hz;
    hits.push_back(std::move(e));
  }
  j["total_excluding_s1"] = rep.total_excluding_s1;
  return j;
}

} // namespace jjtune
