#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "jjtune/errors.hpp"

namespace jjtune {

enum class JunctionStatus { AsFabricated, Tuned, OutOfSpec, Failed };

inline const char* to_string(JunctionStatus s) {
  switch (s) {
    case JunctionStatus::AsFabricated: return "as_fabricated";
    case JunctionStatus::Tuned: return "tuned";
    case JunctionStatus::OutOfSpec: return "out_of_spec";
    case JunctionStatus::Failed: return "failed";
  }
  return "as_fabricated";
}

inline JunctionStatus junction_status_from_string(const std::string& s) {
  if (s == "as_fabricated") return JunctionStatus::AsFabricated;
  if (s == "tuned") return JunctionStatus::Tuned;
  if (s == "out_of_spec") return JunctionStatus::OutOfSpec;
  if (s == "failed") return JunctionStatus::Failed;
  throw validation_error("unknown junction status: " + s);
}

/// One room-temperature resistance measurement, indexed by campaign round.
struct Measurement {
  int round = 0;
  double resistance_ohm = 0.0;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// One Josephson junction: identity, die placement, frequency group and its
/// resistance history. Tuning and ageing only ever increase the resistance,
/// so a valid history is non-decreasing.
struct Junction {
  std::string id;
  int die_row = 0;
  int die_col = 0;
  int qubit_index = 0;
  int group = 1;
  double x_um = 0.0;
  double y_um = 0.0;
  std::vector<Measurement> history;
  JunctionStatus status = JunctionStatus::AsFabricated;

  double latest_resistance() const {
    if (history.empty())
      throw validation_error("junction " + id + ": empty resistance history");
    return history.back().resistance_ohm;
  }

  int latest_round() const {
    if (history.empty())
      throw validation_error("junction " + id + ": empty resistance history");
    return history.back().round;
  }

  double initial_resistance() const {
    if (history.empty())
      throw validation_error("junction " + id + ": empty resistance history");
    return history.front().resistance_ohm;
  }

  /// Resistance as of `round` (latest measurement with round <= round).
  double resistance_at(int round) const {
    const Measurement* found = nullptr;
    for (const auto& m : history)
      if (m.round <= round) found = &m;
    if (!found)
      throw validation_error("junction " + id + ": no measurement at round " +
                             std::to_string(round));
    return found->resistance_ohm;
  }

  void validate() const {
    if (history.empty())
      throw validation_error("junction " + id + ": empty resistance history");
    if (group < 1)
      throw validation_error("junction " + id + ": unknown group label");
    double prev_r = 0.0;
    int prev_round = -1;
    for (const auto& m : history) {
      if (!(m.resistance_ohm > 0.0))
        throw validation_error("junction " + id +
                               ": resistance must be positive");
      if (m.round <= prev_round)
        throw validation_error("junction " + id +
                               ": history rounds must be increasing");
      if (m.resistance_ohm < prev_r)
        throw validation_error("junction " + id +
                               ": resistance history must be non-decreasing");
      prev_r = m.resistance_ohm;
      prev_round = m.round;
    }
  }
};

/// A measured wafer: a flat collection of junctions plus identification.
struct Wafer {
  std::string wafer_id;
  std::string layout_ref;
  std::map<std::string, std::string> metadata;
  std::vector<Junction> junctions;

  void validate() const {
    std::vector<std::string> ids;
    std::vector<std::tuple<int, int, int>> sites;
    ids.reserve(junctions.size());
    sites.reserve(junctions.size());
    for (const auto& j : junctions) {
      j.validate();
      ids.push_back(j.id);
      sites.emplace_back(j.die_row, j.die_col, j.qubit_index);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw validation_error("wafer " + wafer_id + ": duplicate junction id");
    std::sort(sites.begin(), sites.end());
    if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
      throw validation_error("wafer " + wafer_id +
                             ": duplicate (die_row, die_col, qubit_index)");
  }

  /// Canonical junction order: (die_row, die_col, qubit_index). Serialization
  /// always emits this order so equal wafers produce identical bytes.
  void canonicalize() {
    std::sort(junctions.begin(), junctions.end(),
              [](const Junction& a, const Junction& b) {
                return std::tie(a.die_row, a.die_col, a.qubit_index) <
                       std::tie(b.die_row, b.die_col, b.qubit_index);
              });
  }

  Junction* find(const std::string& id) {
    for (auto& j : junctions)
      if (j.id == id) return &j;
    return nullptr;
  }
  const Junction* find(const std::string& id) const {
    for (const auto& j : junctions)
      if (j.id == id) return &j;
    return nullptr;
  }
};

/// Spread statistics of one junction population. `median_ohm` anchors the
/// 80-120 % yield window (median of the whole population); mean and sigma are
/// computed over the in-window junctions only.
struct SpreadStats {
  std::size_t count_total = 0;
  std::size_t count_in_window = 0;
  double median_ohm = 0.0;
  double mean_ohm = 0.0;
  double sigma_percent = 0.0;
  double yield_percent = 0.0;
};

} // namespace jjtune
