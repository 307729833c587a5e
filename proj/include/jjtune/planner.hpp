#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jjtune/collisions.hpp"
#include "jjtune/dose.hpp"
#include "jjtune/junction.hpp"
#include "jjtune/layout.hpp"
#include "jjtune/rng.hpp"
#include "jjtune/stats.hpp"
#include "jjtune/transmon.hpp"

namespace jjtune {

enum class Strategy { EnsembleBelowMedian, TargetedInverse, CollisionAware };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::EnsembleBelowMedian: return "ensemble";
    case Strategy::TargetedInverse: return "targeted";
    case Strategy::CollisionAware: return "collision-aware";
  }
  return "targeted";
}

inline Strategy strategy_from_string(const std::string& s) {
  if (s == "ensemble") return Strategy::EnsembleBelowMedian;
  if (s == "targeted") return Strategy::TargetedInverse;
  if (s == "collision-aware") return Strategy::CollisionAware;
  throw validation_error("unknown strategy: " + s);
}

/// One junction's exposure in a tuning round. `partial` marks junctions whose
/// required shift exceeded the dose headroom and were planned at saturation
/// instead (they count against targeting, not as errors).
struct PlanEntry {
  std::string junction_id;
  long shots = 0;
  BeamPlacement placement{};
  bool partial = false;
};

/// Per-round exposure plan: the artifact's analogue of a qubit-specific
/// lithography mask. Junctions absent from `entries` are not exposed.
/// predicted_post maps every junction the planner looked at to its expected
/// post-round resistance (exposed: dose + ageing; untouched: ageing only).
struct TunePlan {
  int round_index = 1;
  Strategy strategy = Strategy::TargetedInverse;
  std::vector<PlanEntry> entries;
  std::map<std::string, double> predicted_post;
};

/// How the per-group resistance target is chosen when group_targets_ohm is
/// not given explicitly. Sigma: every group's target is its in-window median
/// times a common factor 1 + target_sigma_factor * max_g(relative std) — the
/// common factor keeps the designed inter-group frequency gaps in place
/// (per-group factors would walk the gaps into collision bands), and sizing
/// it by the widest group keeps the deepest tail reachable within a
/// few dose-saturation rounds. Max: the group's in-window maximum, which
/// closes the spread from below but strands outliers more than ~3 saturation
/// shifts deep.
enum class TargetRule { Sigma, Max };

struct CampaignConfig {
  int max_rounds = 3;
  Strategy strategy = Strategy::TargetedInverse;
  std::map<int, double> group_targets_ohm; // empty = derive via target_rule
  TargetRule target_rule = TargetRule::Sigma;
  double target_sigma_factor = 1.5;
  long ensemble_shots = 8;
  double w_spread = 0.05;
  double w_collisions = 1.0;
  double stop_sigma_percent = 1.5;
  double headroom_frac = kHeadroomFrac;
  int search_sweeps = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_rounds < 1) throw validation_error("campaign: max_rounds must be >= 1");
    if (w_spread < 0.0 || w_collisions < 0.0 ||
        (w_spread == 0.0 && w_collisions == 0.0))
      throw validation_error(
          "campaign: objective weights must be >= 0 and not both zero");
    if (ensemble_shots < 1)
      throw validation_error("campaign: ensemble_shots must be >= 1");
    if (!(headroom_frac > 0.0 && headroom_frac < 1.0))
      throw validation_error("campaign: headroom_frac must be in (0, 1)");
    if (search_sweeps < 1)
      throw validation_error("campaign: search_sweeps must be >= 1");
  }
};

/// Junctions of one group with latest resistance strictly below the group's
/// in-window median: the ensemble strategy's selection rule.
inline std::vector<Junction> select_below_median(
    const std::vector<Junction>& group) {
  const WindowPartition p = window_partition(group);
  if (p.in_window.size() < 2)
    throw planning_error("select_below_median: need at least 2 in-window junctions");
  std::vector<double> in_window_r;
  in_window_r.reserve(p.in_window.size());
  for (std::size_t i : p.in_window)
    in_window_r.push_back(group[i].latest_resistance());
  const double med = median(in_window_r);
  std::vector<Junction> selected;
  for (std::size_t i : p.in_window)
    if (group[i].latest_resistance() < med) selected.push_back(group[i]);
  return selected;
}

/// Same dose for every selected junction, beam centered on the JJ.
inline TunePlan ensemble_plan(const std::vector<Junction>& selected, long shots,
                              int round, const DoseResponseModel& model) {
  if (shots < 1) throw planning_error("ensemble_plan: shots must be >= 1");
  TunePlan plan;
  plan.round_index = round;
  plan.strategy = Strategy::EnsembleBelowMedian;
  const double shift = delta_r(shots, model);
  const double ageing = ambient_ageing(1, model);
  for (const auto& j : selected) {
    plan.entries.push_back({j.id, shots, BeamPlacement{}, false});
    plan.predicted_post[j.id] = j.latest_resistance() + shift + ageing;
  }
  return plan;
}

/// Per-junction inverse-dose plan toward a common group resistance target.
/// The expected ambient drift of the round is subtracted from each required
/// shift so untouched junctions do not overshoot. Junctions needing more than
/// the dose headroom are planned at saturation and flagged partial.
inline TunePlan targeted_plan(const std::vector<Junction>& group,
                              double target_ohm,
                              const DoseResponseModel& model, int round,
                              double headroom_frac = kHeadroomFrac) {
  const WindowPartition p = window_partition(group);
  std::vector<double> in_window_r;
  for (std::size_t i : p.in_window)
    in_window_r.push_back(group[i].latest_resistance());
  if (in_window_r.size() < 2)
    throw planning_error("targeted_plan: need at least 2 in-window junctions");
  if (target_ohm < median(in_window_r))
    throw planning_error(
        "targeted_plan: target below the group median is unreachable "
        "(tuning only raises resistance)");

  TunePlan plan;
  plan.round_index = round;
  plan.strategy = Strategy::TargetedInverse;
  const double ageing = ambient_ageing(1, model);
  const long sat = saturation_shots(model, headroom_frac);

  for (const auto& j : group) plan.predicted_post[j.id] = j.latest_resistance() + ageing;
  for (std::size_t i : p.in_window) {
    const Junction& j = group[i];
    const double need = target_ohm - j.latest_resistance() - ageing;
    if (need <= 0.0) continue;
    const std::optional<long> shots = invert_dose(need, model, headroom_frac);
    const long n = shots.value_or(sat);
    if (n < 1) continue;
    plan.entries.push_back({j.id, n, BeamPlacement{}, !shots.has_value()});
    plan.predicted_post[j.id] = j.latest_resistance() + delta_r(n, model) + ageing;
  }
  return plan;
}

namespace detail {

/// Objective for the collision-aware search on one die: weighted count of
/// enabled collisions plus the spread of resistances normalized by the
/// layout's design resistances (so the cross-group CV is meaningful).
struct DieObjective {
  const QpuLayout* layout;
  const CollisionParams* params;
  const PhysicsConfig* physics;
  std::vector<double> base_r;     // indexed by qubit
  std::vector<double> design_r;   // indexed by qubit
  double w_spread, w_collisions;

  double operator()(const std::vector<double>& shift) const {
    const int n = layout->qubit_count;
    std::vector<double> freqs(static_cast<std::size_t>(n));
    std::vector<double> norm(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
      const double r = base_r[q] + shift[q];
      freqs[q] = frequency_from_resistance(r, *physics, true);
      norm[q] = r / design_r[q];
    }
    const CollisionReport rep = detect_collisions(freqs, *layout, *params);
    double mean = 0.0;
    for (double v : norm) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : norm) ss += (v - mean) * (v - mean);
    const double sigma_pc =
        n > 1 ? 100.0 * std::sqrt(ss / (n - 1)) / mean : 0.0;
    return w_collisions * static_cast<double>(rep.total_enabled()) +
           w_spread * sigma_pc;
  }
};

} // namespace detail

/// Local search over per-junction doses on one complete die: coordinate
/// descent over the shot grid {0, n0, 2n0, 4n0, saturation} with a shuffled
/// visit order per sweep, then steepest single-junction improvement at
/// integer shot resolution until no move helps (the grid quantum is ~50 MHz
/// in frequency, too coarse to dodge collision bands on its own). Never
/// returns a plan worse than doing nothing.
inline TunePlan collision_aware_plan(const std::vector<Junction>& die,
                                     const QpuLayout& layout,
                                     const DoseResponseModel& model,
                                     const CollisionParams& params,
                                     const CampaignConfig& cfg,
                                     const PhysicsConfig& physics,
                                     int round, std::uint64_t seed) {
  cfg.validate();
  if (static_cast<int>(die.size()) != layout.qubit_count)
    throw validation_error("collision_aware_plan: die is incomplete");

  std::vector<const Junction*> by_qubit(die.size(), nullptr);
  for (const auto& j : die) {
    if (j.qubit_index < 0 || j.qubit_index >= layout.qubit_count ||
        by_qubit[static_cast<std::size_t>(j.qubit_index)])
      throw validation_error("collision_aware_plan: bad qubit indexing");
    by_qubit[static_cast<std::size_t>(j.qubit_index)] = &j;
  }

  detail::DieObjective obj;
  obj.layout = &layout;
  obj.params = &params;
  obj.physics = &physics;
  obj.w_spread = cfg.w_spread;
  obj.w_collisions = cfg.w_collisions;
  for (const Junction* j : by_qubit) {
    obj.base_r.push_back(j->latest_resistance());
    obj.design_r.push_back(resistance_for_frequency(
        layout.target_frequency_hz.at(j->group), physics, true));
  }

  const long n0 = std::max<long>(1, std::lround(model.shots_scale));
  std::vector<long> grid = {0, n0, 2 * n0, 4 * n0,
                            saturation_shots(model, cfg.headroom_frac)};
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const int n = layout.qubit_count;
  std::vector<long> shots(static_cast<std::size_t>(n), 0);
  std::vector<double> shift(static_cast<std::size_t>(n), 0.0);
  double best = obj(shift);

  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) order[static_cast<std::size_t>(q)] = q;

  for (int sweep = 0; sweep < cfg.search_sweeps; ++sweep) {
    rng.shuffle(order);
    bool improved = false;
    for (int q : order) {
      const long keep = shots[static_cast<std::size_t>(q)];
      long best_level = keep;
      for (long level : grid) {
        if (level == keep) continue;
        shift[static_cast<std::size_t>(q)] = delta_r(level, model);
        const double j = obj(shift);
        if (j < best - 1e-12) {
          best = j;
          best_level = level;
          improved = true;
        }
      }
      shots[static_cast<std::size_t>(q)] = best_level;
      shift[static_cast<std::size_t>(q)] = delta_r(best_level, model);
    }
    if (!improved) break;
  }

  // steepest single-junction refinement, integer shot resolution
  const long max_shots = grid.back();
  while (true) {
    double best_j = best;
    int move_q = -1;
    long move_level = 0;
    for (int q = 0; q < n; ++q) {
      const long keep = shots[static_cast<std::size_t>(q)];
      for (long level = 0; level <= max_shots; ++level) {
        if (level == keep) continue;
        shift[static_cast<std::size_t>(q)] = delta_r(level, model);
        const double j = obj(shift);
        if (j < best_j - 1e-12) {
          best_j = j;
          move_q = q;
          move_level = level;
        }
      }
      shift[static_cast<std::size_t>(q)] = delta_r(keep, model);
    }
    if (move_q < 0) break;
    shots[static_cast<std::size_t>(move_q)] = move_level;
    shift[static_cast<std::size_t>(move_q)] = delta_r(move_level, model);
    best = best_j;
  }

  TunePlan plan;
  plan.round_index = round;
  plan.strategy = Strategy::CollisionAware;
  const double ageing = ambient_ageing(1, model);
  for (int q = 0; q < n; ++q) {
    const Junction& j = *by_qubit[static_cast<std::size_t>(q)];
    const long s = shots[static_cast<std::size_t>(q)];
    if (s > 0) plan.entries.push_back({j.id, s, BeamPlacement{}, false});
    plan.predicted_post[j.id] =
        j.latest_resistance() + delta_r(s, model) + ageing;
  }
  return plan;
}

namespace detail {

/// Group resistance targets, fixed at campaign start.
inline std::map<int, double> campaign_targets(
    const std::map<int, std::vector<Junction>>& groups,
    const CampaignConfig& cfg, const DoseResponseModel& model) {
  std::map<int, double> medians;
  std::map<int, double> rel_std;
  for (const auto& [g, js] : groups) {
    const WindowPartition p = window_partition(js);
    std::vector<double> r;
    for (std::size_t i : p.in_window) r.push_back(js[i].latest_resistance());
    if (r.size() < 2)
      throw planning_error("campaign: group " + std::to_string(g) +
                           " has fewer than 2 in-window junctions");
    medians[g] = median(r);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    rel_std[g] = std::sqrt(ss / static_cast<double>(r.size() - 1)) / mean;
  }

  std::map<int, double> targets;
  if (!cfg.group_targets_ohm.empty()) {
    for (const auto& [g, js] : groups) {
      auto it = cfg.group_targets_ohm.find(g);
      if (it == cfg.group_targets_ohm.end())
        throw planning_error("campaign: no target for group " + std::to_string(g));
      if (it->second < medians.at(g))
        throw planning_error("campaign: target for group " + std::to_string(g) +
                             " lies below the group median (tuning only "
                             "raises resistance)");
      targets[g] = it->second;
    }
    return targets;
  }

  if (cfg.target_rule == TargetRule::Max) {
    for (const auto& [g, js] : groups) {
      const WindowPartition p = window_partition(js);
      double max_r = 0.0;
      for (std::size_t i : p.in_window)
        max_r = std::max(max_r, js[i].latest_resistance());
      targets[g] = max_r + ambient_ageing(1, model);
    }
    return targets;
  }

  double worst_rel = 0.0;
  for (const auto& [g, s] : rel_std) worst_rel = std::max(worst_rel, s);
  const double factor = 1.0 + cfg.target_sigma_factor * worst_rel;
  for (const auto& [g, m] : medians) targets[g] = m * factor;
  return targets;
}

inline TunePlan plan_one_round(const Wafer& wafer, const CampaignConfig& cfg,
                               const DoseResponseModel& model,
                               const QpuLayout& layout,
                               const CollisionParams& params,
                               const PhysicsConfig& physics, int round,
                               const std::map<int, double>& targets) {
  TunePlan merged;
  merged.round_index = round;
  merged.strategy = cfg.strategy;

  if (cfg.strategy == Strategy::CollisionAware) {
    std::map<std::pair<int, int>, std::vector<Junction>> dies;
    for (const auto& j : wafer.junctions)
      dies[{j.die_row, j.die_col}].push_back(j);
    for (const auto& [key, js] : dies) {
      if (static_cast<int>(js.size()) != layout.qubit_count) continue;
      const std::uint64_t die_seed = derive_seed(
          cfg.seed, (static_cast<std::uint64_t>(static_cast<std::uint32_t>(key.first)) << 32) ^
                        static_cast<std::uint32_t>(key.second) ^
                        (static_cast<std::uint64_t>(round) << 17));
      TunePlan p = collision_aware_plan(js, layout, model, params, cfg,
                                        physics, round, die_seed);
      merged.entries.insert(merged.entries.end(), p.entries.begin(), p.entries.end());
      merged.predicted_post.insert(p.predicted_post.begin(), p.predicted_post.end());
    }
    return merged;
  }

  const std::map<int, std::vector<Junction>> groups = group_by_design(wafer);
  for (const auto& [g, js] : groups) {
    TunePlan p;
    if (cfg.strategy == Strategy::TargetedInverse) {
      // later rounds: the collapsed bulk may sit marginally above the fixed
      // target, so plan toward max(target, current median)
      const WindowPartition part = window_partition(js);
      std::vector<double> r;
      for (std::size_t i : part.in_window) r.push_back(js[i].latest_resistance());
      double target = targets.at(g);
      if (r.size() >= 2) target = std::max(target, median(r));
      p = targeted_plan(js, target, model, round, cfg.headroom_frac);
    } else {
      const std::vector<Junction> selected = select_below_median(js);
      p = ensemble_plan(selected, cfg.ensemble_shots, round, model);
    }
    merged.entries.insert(merged.entries.end(), p.entries.begin(), p.entries.end());
    merged.predicted_post.insert(p.predicted_post.begin(), p.predicted_post.end());
  }
  return merged;
}

/// Advance a wafer to its predicted post-round state (noiseless surrogate for
/// re-measurement between planning rounds).
inline void apply_predicted(Wafer& wafer, const TunePlan& plan,
                            const DoseResponseModel& model) {
  const double ageing = ambient_ageing(1, model);
  std::set<std::string> exposed;
  for (const auto& e : plan.entries) exposed.insert(e.junction_id);
  for (auto& j : wafer.junctions) {
    auto it = plan.predicted_post.find(j.id);
    const double next =
        it != plan.predicted_post.end() ? it->second : j.latest_resistance() + ageing;
    j.history.push_back({plan.round_index, next});
    if (exposed.count(j.id)) j.status = JunctionStatus::Tuned;
  }
}

} // namespace detail

/// Multi-round planning loop over a wafer. Each round re-plans from the
/// noiselessly advanced wafer; stops early on an empty plan or once the
/// normalized spread is at stop_sigma_percent with no enabled collisions
/// beyond the structural S1s.
inline std::vector<TunePlan> run_campaign_plan(const Wafer& wafer,
                                               const CampaignConfig& cfg,
                                               const DoseResponseModel& model,
                                               const QpuLayout& layout,
                                               const CollisionParams& params,
                                               const PhysicsConfig& physics) {
  cfg.validate();
  model.validate();
  Wafer work = wafer;
  work.validate();

  std::map<int, double> targets;
  if (cfg.strategy == Strategy::TargetedInverse)
    targets = detail::campaign_targets(group_by_design(work), cfg, model);

  std::vector<TunePlan> plans;
  const int first_round = work.junctions.empty()
                              ? 1
                              : work.junctions.front().latest_round() + 1;
  for (int r = 0; r < cfg.max_rounds; ++r) {
    const double sigma = normalized_spread_stats(work).sigma_percent;
    const std::size_t collisions =
        wafer_collision_map(work, layout, params, physics).total_excluding_s1();
    if (sigma <= cfg.stop_sigma_percent && collisions == 0) break;

    TunePlan plan = detail::plan_one_round(work, cfg, model, layout, params,
                                           physics, first_round + r, targets);
    if (plan.entries.empty()) break;
    detail::apply_predicted(work, plan, model);
    plans.push_back(std::move(plan));
  }
  return plans;
}

// --- JSON -------------------------------------------------------------

inline nlohmann::json to_json(const TunePlan& plan) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["round"] = plan.round_index;
  j["strategy"] = to_string(plan.strategy);
  auto& entries = j["entries"] = nlohmann::json::array();
  std::vector<PlanEntry> sorted = plan.entries;
  std::sort(sorted.begin(), sorted.end(),
            [](const PlanEntry& a, const PlanEntry& b) {
              return a.junction_id < b.junction_id;
            });
  for (const auto& e : sorted)
    entries.push_back({{"junction_id", e.junction_id},
                       {"shots", e.shots},
                       {"distance_um", e.placement.distance_um},
                       {"partial", e.partial}});
  j["predicted_post"] = plan.predicted_post;
  return j;
}

inline TunePlan plan_from_json(const nlohmann::json& j) {
  TunePlan plan;
  plan.round_index = j.at("round").get<int>();
  plan.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  for (const auto& e : j.at("entries")) {
    PlanEntry entry;
    entry.junction_id = e.at("junction_id").get<std::string>();
    entry.shots = e.at("shots").get<long>();
    entry.placement.distance_um = e.value("distance_um", 0.0);
    entry.partial = e.value("partial", false);
    if (entry.shots < 1)
      throw validation_error("plan: entry shots must be >= 1");
    plan.entries.push_back(std::move(entry));
  }
  if (j.contains("predicted_post"))
    plan.predicted_post =
        j.at("predicted_post").get<std::map<std::string, double>>();
  return plan;
}

inline nlohmann::json to_json(const CampaignConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["max_rounds"] = cfg.max_rounds;
  j["strategy"] = to_string(cfg.strategy);
  if (!cfg.group_targets_ohm.empty()) {
    auto& t = j["group_targets_ohm"] = nlohmann::json::object();
    for (auto [g, r] : cfg.group_targets_ohm) t[std::to_string(g)] = r;
  }
  j["target_rule"] = cfg.target_rule == TargetRule::Max ? "max" : "sigma";
  j["target_sigma_factor"] = cfg.target_sigma_factor;
  j["ensemble_shots"] = cfg.ensemble_shots;
  j["objective_weights"] = {{"w_spread", cfg.w_spread},
                            {"w_collisions", cfg.w_collisions}};
  j["stop_sigma_percent"] = cfg.stop_sigma_percent;
  j["headroom_frac"] = cfg.headroom_frac;
  j["search_sweeps"] = cfg.search_sweeps;
  j["seed"] = cfg.seed;
  return j;
}

inline CampaignConfig campaign_config_from_json(const nlohmann::json& j) {
  CampaignConfig cfg;
  cfg.max_rounds = j.value("max_rounds", cfg.max_rounds);
  if (j.contains("strategy"))
    cfg.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  if (j.contains("group_targets_ohm"))
    for (const auto& [key, val] : j.at("group_targets_ohm").items())
      cfg.group_targets_ohm[std::stoi(key)] = val.get<double>();
  if (j.contains("target_rule")) {
    const std::string rule = j.at("target_rule").get<std::string>();
    if (rule == "max") cfg.target_rule = TargetRule::Max;
    else if (rule == "sigma") cfg.target_rule = TargetRule::Sigma;
    else throw validation_error("campaign: unknown target_rule " + rule);
  }
  cfg.target_sigma_factor = j.value("target_sigma_factor", cfg.target_sigma_factor);
  cfg.ensemble_shots = j.value("ensemble_shots", cfg.ensemble_shots);
  if (j.contains("objective_weights")) {
    cfg.w_spread = j.at("objective_weights").value("w_spread", cfg.w_spread);
    cfg.w_collisions =
        j.at("objective_weights").value("w_collisions", cfg.w_collisions);
  }
  cfg.stop_sigma_percent = j.value("stop_sigma_percent", cfg.stop_sigma_percent);
  cfg.headroom_frac = j.value("headroom_frac", cfg.headroom_frac);
  cfg.search_sweeps = j.value("search_sweeps", cfg.search_sweeps);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

} // namespace jjtune
