#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jjtune/errors.hpp"

namespace jjtune {

/// Coupling graph of one QPU die plus the frequency-group assignment and the
/// per-group design target frequencies.
struct QpuLayout {
  int qubit_count = 0;
  std::vector<std::pair<int, int>> edges; // unordered pairs, simple graph
  std::vector<int> group_of;              // indexed by qubit
  std::map<int, double> target_frequency_hz;

  void validate() const {
    if (qubit_count < 0) throw validation_error("layout: negative qubit count");
    if (static_cast<int>(group_of.size()) != qubit_count)
      throw validation_error("layout: every qubit needs a group");
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edges) {
      if (a == b) throw validation_error("layout: self-loop");
      if (a < 0 || b < 0 || a >= qubit_count || b >= qubit_count)
        throw validation_error("layout: edge endpoint out of range");
      auto key = std::minmax(a, b);
      if (!seen.insert(key).second)
        throw validation_error("layout: duplicate edge");
    }
    for (int g : group_of)
      if (!target_frequency_hz.count(g))
        throw validation_error("layout: group " + std::to_string(g) +
                               " has no target frequency");
  }

  std::vector<int> neighbours(int q) const {
    std::vector<int> out;
    for (auto [a, b] : edges) {
      if (a == q) out.push_back(b);
      else if (b == q) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// The default Lucy-style die: an 8-qubit ring with three frequency groups
  /// in the pattern [1,2,1,3,1,2,1,3]. Every group-2/3 qubit sits between two
  /// group-1 qubits, which makes S1 collisions structurally unavoidable at
  /// zero spread. The target triple (5.000, 5.060, 4.940) GHz was selected by
  /// a grid search over group gaps so that a zero-spread assessment fires S1
  /// and nothing else (regression-tested).
  static QpuLayout ring8() {
    QpuLayout l;
    l.qubit_count = 8;
    for (int q = 0; q < 8; ++q) l.edges.emplace_back(q, (q + 1) % 8);
    l.group_of = {1, 2, 1, 3, 1, 2, 1, 3};
    l.target_frequency_hz = {{1, 5.000e9}, {2, 5.060e9}, {3, 4.940e9}};
    return l;
  }
};

inline nlohmann::json to_json(const QpuLayout& l) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["qubit_count"] = l.qubit_count;
  auto& edges = j["edges"] = nlohmann::json::array();
  for (auto [a, b] : l.edges) edges.push_back({a, b});
  j["group_of"] = l.group_of;
  auto& targets = j["target_frequency_hz"] = nlohmann::json::object();
  for (auto [g, f] : l.target_frequency_hz) targets[std::to_string(g)] = f;
  return j;
}

inline QpuLayout layout_from_json(const nlohmann::json& j) {
  QpuLayout l;
  l.qubit_count = j.at("qubit_count").get<int>();
  for (const auto& e : j.at("edges"))
    l.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  l.group_of = j.at("group_of").get<std::vector<int>>();
  for (const auto& [key, val] : j.at("target_frequency_hz").items())
    l.target_frequency_hz[std::stoi(key)] = val.get<double>();
  l.validate();
  return l;
}

} // namespace jjtune
