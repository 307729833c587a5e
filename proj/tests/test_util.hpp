#pragma once

// Shared helpers for the test suite: engine-report adapters, the exhaustive
// per-die dose-grid search, and the frozen showcase die fixture.

#include <cmath>
#include <string>
#include <vector>

#include "collision_oracle.hpp"
#include "jjtune/jjtune.hpp"

namespace testutil {

inline std::vector<oracle::Hit> to_oracle_hits(
    const jjtune::CollisionReport& rep) {
  std::vector<oracle::Hit> out;
  for (const auto& h : rep.hits) {
    oracle::Hit o;
    o.type = jjtune::to_string(h.type);
    for (int p : h.participants)
      if (p >= 0) o.qubits.push_back(p);
    o.detuning = h.detuning_hz;
    out.push_back(std::move(o));
  }
  std::sort(out.begin(), out.end(), oracle::hit_less);
  return out;
}

inline bool same_hits(const std::vector<oracle::Hit>& a,
                      const std::vector<oracle::Hit>& b,
                      double detuning_tol_hz = 1e-3) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].type != b[i].type || a[i].qubits != b[i].qubits) return false;
    if (std::abs(a[i].detuning - b[i].detuning) > detuning_tol_hz) return false;
  }
  return true;
}

inline std::vector<long> dose_grid(const jjtune::DoseResponseModel& model,
                                   double headroom = jjtune::kHeadroomFrac) {
  const long n0 = std::max<long>(1, std::lround(model.shots_scale));
  std::vector<long> grid = {0, n0, 2 * n0, 4 * n0,
                            jjtune::saturation_shots(model, headroom)};
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

/// Exhaustively search per-qubit shot assignments from the grid and return
/// the minimal enabled-collision count (and one assignment achieving it).
struct ExhaustiveResult {
  std::size_t min_collisions = 0;
  std::vector<long> shots;
};

inline ExhaustiveResult exhaustive_min_collisions(
    const std::vector<double>& base_r, const jjtune::QpuLayout& layout,
    const jjtune::CollisionParams& params, const jjtune::PhysicsConfig& physics,
    const jjtune::DoseResponseModel& model, const std::vector<long>& grid) {
  const int n = layout.qubit_count;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  ExhaustiveResult best;
  best.min_collisions = static_cast<std::size_t>(-1);
  std::vector<double> freqs(static_cast<std::size_t>(n));
  while (true) {
    std::vector<long> shots(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q)
      shots[static_cast<std::size_t>(q)] = grid[idx[static_cast<std::size_t>(q)]];
    for (int q = 0; q < n; ++q)
      freqs[static_cast<std::size_t>(q)] = jjtune::frequency_from_resistance(
          base_r[static_cast<std::size_t>(q)] +
              jjtune::delta_r(shots[static_cast<std::size_t>(q)], model),
          physics, true);
    const std::size_t count =
        jjtune::detect_collisions(freqs, layout, params).total_enabled();
    if (count < best.min_collisions) {
      best.min_collisions = count;
      best.shots = shots;
      if (count == 0) break;
    }
    int q = 0;
    while (q < n && ++idx[static_cast<std::size_t>(q)] == grid.size()) {
      idx[static_cast<std::size_t>(q)] = 0;
      ++q;
    }
    if (q == n) break;
  }
  return best;
}

/// Showcase die: resistances constructed (via the exhaustive oracle) to show
/// exactly 5 enabled collisions with S1/E1/E2 disabled, all resolvable within
/// the dose range. Initial hits: 1x A1, 2x D1, 2x T1.
inline std::vector<double> showcase_die_resistances() {
  return {7971.085710, 7779.540555, 7873.311174, 8143.840568,
          7740.185136, 7792.703662, 7838.225820, 8079.753403};
}

inline jjtune::CollisionParams showcase_params() {
  jjtune::CollisionParams params; // default thresholds, pinned enabled set
  params.enabled = {jjtune::CollisionType::A1, jjtune::CollisionType::A2,
                    jjtune::CollisionType::C1, jjtune::CollisionType::D1,
                    jjtune::CollisionType::S2, jjtune::CollisionType::T1};
  return params;
}

inline std::vector<jjtune::Junction> make_die(const std::vector<double>& r,
                                              const jjtune::QpuLayout& layout,
                                              int die_row = 0, int die_col = 0) {
  std::vector<jjtune::Junction> die;
  for (int q = 0; q < layout.qubit_count; ++q) {
    jjtune::Junction j;
    j.id = "d" + std::to_string(die_row) + "c" + std::to_string(die_col) +
           "q" + std::to_string(q);
    j.die_row = die_row;
    j.die_col = die_col;
    j.qubit_index = q;
    j.group = layout.group_of[static_cast<std::size_t>(q)];
    j.history.push_back({0, r[static_cast<std::size_t>(q)]});
    die.push_back(std::move(j));
  }
  return die;
}

/// Wafer wrapper for collections used by the stats tests.
inline jjtune::Junction simple_junction(const std::string& id, double r,
                                        int group = 1, int qubit = 0,
                                        int row = 0, int col = 0) {
  jjtune::Junction j;
  j.id = id;
  j.die_row = row;
  j.die_col = col;
  j.qubit_index = qubit;
  j.group = group;
  j.history.push_back({0, r});
  return j;
}

} // namespace testutil
