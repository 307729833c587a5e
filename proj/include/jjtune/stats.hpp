#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "jjtune/junction.hpp"

namespace jjtune {

inline constexpr double kYieldWindowLow = 0.80;
inline constexpr double kYieldWindowHigh = 1.20;

/// Median with the even-count convention: mean of the two middle values.
inline double median(std::vector<double> values) {
  if (values.empty()) throw stats_error("median of empty collection");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2]
               : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline std::vector<double> latest_resistances(
    const std::vector<Junction>& junctions) {
  std::vector<double> out;
  out.reserve(junctions.size());
  for (const auto& j : junctions) out.push_back(j.latest_resistance());
  return out;
}

/// Indices of junctions inside / outside [low_frac, high_frac] x median of
/// the latest resistances. Non-mutating; the partition is exhaustive and
/// disjoint.
struct WindowPartition {
  double median_ohm = 0.0;
  std::vector<std::size_t> in_window;
  std::vector<std::size_t> out_of_spec;
};

inline WindowPartition window_partition(const std::vector<Junction>& junctions,
                                        double low_frac = kYieldWindowLow,
                                        double high_frac = kYieldWindowHigh) {
  if (junctions.empty())
    throw stats_error("yield window of empty collection");
  WindowPartition p;
  p.median_ohm = median(latest_resistances(junctions));
  for (std::size_t i = 0; i < junctions.size(); ++i) {
    const double r = junctions[i].latest_resistance();
    if (r >= low_frac * p.median_ohm && r <= high_frac * p.median_ohm)
      p.in_window.push_back(i);
    else
      p.out_of_spec.push_back(i);
  }
  return p;
}

/// Partition by the 80-120 % window and mark the out-of-spec junctions.
/// They stay in the collection: out-of-spec junctions still count against
/// yield.
inline WindowPartition yield_window(std::vector<Junction>& junctions,
                                    double low_frac = kYieldWindowLow,
                                    double high_frac = kYieldWindowHigh) {
  WindowPartition p = window_partition(junctions, low_frac, high_frac);
  for (std::size_t i : p.out_of_spec)
    junctions[i].status = JunctionStatus::OutOfSpec;
  return p;
}

/// Spread = 100 * sample std / mean over the in-window latest resistances
/// (coefficient of variation, the only "percent spread" that compares groups
/// of different median).
inline SpreadStats spread_stats(const std::vector<Junction>& junctions,
                                double low_frac = kYieldWindowLow,
                                double high_frac = kYieldWindowHigh) {
  const WindowPartition p = window_partition(junctions, low_frac, high_frac);
  if (p.in_window.size() < 2)
    throw stats_error("spread statistics need at least 2 in-window junctions");
  SpreadStats s;
  s.count_total = junctions.size();
  s.count_in_window = p.in_window.size();
  s.median_ohm = p.median_ohm;
  double sum = 0.0;
  for (std::size_t i : p.in_window) sum += junctions[i].latest_resistance();
  s.mean_ohm = sum / static_cast<double>(p.in_window.size());
  double ss = 0.0;
  for (std::size_t i : p.in_window) {
    const double d = junctions[i].latest_resistance() - s.mean_ohm;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(p.in_window.size() - 1);
  s.sigma_percent = 100.0 * std::sqrt(var) / s.mean_ohm;
  s.yield_percent = 100.0 * static_cast<double>(p.in_window.size()) /
                    static_cast<double>(junctions.size());
  return s;
}

/// Disjoint, exhaustive partition by frequency-group label.
inline std::map<int, std::vector<Junction>> group_by_design(
    const Wafer& wafer) {
  std::map<int, std::vector<Junction>> groups;
  for (const auto& j : wafer.junctions) groups[j.group].push_back(j);
  return groups;
}

/// Pooled cross-group spread: each group's in-window resistances are
/// normalized by that group's median before pooling, matching the paper's
/// "normalized cumulative distribution" across design groups. The returned
/// median/mean are in units of group-median (dimensionless, ~1).
inline SpreadStats normalized_spread_stats(const std::vector<Junction>& junctions,
                                           double low_frac = kYieldWindowLow,
                                           double high_frac = kYieldWindowHigh) {
  if (junctions.empty()) throw stats_error("spread of empty collection");
  std::map<int, std::vector<Junction>> groups;
  for (const auto& j : junctions) groups[j.group].push_back(j);

  std::vector<double> pooled;
  std::size_t total = 0;
  for (auto& [g, js] : groups) {
    total += js.size();
    const WindowPartition p = window_partition(js, low_frac, high_frac);
    for (std::size_t i : p.in_window)
      pooled.push_back(js[i].latest_resistance() / p.median_ohm);
  }
  if (pooled.size() < 2)
    throw stats_error("spread statistics need at least 2 in-window junctions");

  SpreadStats s;
  s.count_total = total;
  s.count_in_window = pooled.size();
  s.median_ohm = median(pooled);
  double sum = 0.0;
  for (double v : pooled) sum += v;
  s.mean_ohm = sum / static_cast<double>(pooled.size());
  double ss = 0.0;
  for (double v : pooled) ss += (v - s.mean_ohm) * (v - s.mean_ohm);
  s.sigma_percent =
      100.0 * std::sqrt(ss / static_cast<double>(pooled.size() - 1)) /
      s.mean_ohm;
  s.yield_percent =
      100.0 * static_cast<double>(pooled.size()) / static_cast<double>(total);
  return s;
}

inline SpreadStats normalized_spread_stats(const Wafer& wafer,
                                           double low_frac = kYieldWindowLow,
                                           double high_frac = kYieldWindowHigh) {
  return normalized_spread_stats(wafer.junctions, low_frac, high_frac);
}

} // namespace jjtune
