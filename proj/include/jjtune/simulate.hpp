#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "jjtune/collisions.hpp"
#include "jjtune/dose.hpp"
#include "jjtune/junction.hpp"
#include "jjtune/layout.hpp"
#include "jjtune/planner.hpp"
#include "jjtune/rng.hpp"
#include "jjtune/stats.hpp"
#include "jjtune/transmon.hpp"
#include "jjtune/wafer_io.hpp"

namespace jjtune {

/// Recipe for a synthetic wafer. Group medians default to the design
/// resistances implied by the layout's target frequencies.
struct WaferSpec {
  int die_rows = 1;
  int die_cols = 1;
  QpuLayout layout = QpuLayout::ring8();
  std::map<int, double> group_median_ohm;    // empty = derive from layout
  std::map<int, double> group_sigma_percent; // missing groups: rel_sigma_percent
  double rel_sigma_percent = 3.11;
  double out_of_spec_fraction = 0.0;
  std::uint64_t seed = 0;
  std::string wafer_id;

  void validate() const {
    if (die_rows < 1 || die_cols < 1)
      throw validation_error("wafer spec: need at least one die");
    if (rel_sigma_percent < 0.0)
      throw validation_error("wafer spec: rel_sigma_percent must be >= 0");
    for (const auto& [g, s] : group_sigma_percent)
      if (s < 0.0)
        throw validation_error("wafer spec: group sigma must be >= 0");
    if (out_of_spec_fraction < 0.0 || out_of_spec_fraction > 1.0)
      throw validation_error("wafer spec: out_of_spec_fraction in [0, 1]");
    layout.validate();
  }

  double sigma_for(int group) const {
    auto it = group_sigma_percent.find(group);
    return it == group_sigma_percent.end() ? rel_sigma_percent : it->second;
  }
};

// die geometry used for synthetic positions (um)
inline constexpr double kDiePitchUm = 7000.0;
inline constexpr double kRingRadiusUm = 2500.0;

/// Draw a wafer: per-group normal resistances (mean = group median,
/// std = sigma% of it), with an optional out-of-spec fraction thrown beyond
/// the 80-120 % window. Each junction draws from its own (seed, id, round 0)
/// stream, so the result is byte-identical for a given seed regardless of
/// evaluation order.
inline Wafer generate_wafer(const WaferSpec& spec,
                            const PhysicsConfig& physics = {}) {
  spec.validate();
  std::map<int, double> medians = spec.group_median_ohm;
  for (int g : spec.layout.group_of)
    if (!medians.count(g))
      medians[g] = resistance_for_frequency(
          spec.layout.target_frequency_hz.at(g), physics);

  Wafer wafer;
  wafer.wafer_id = spec.wafer_id.empty()
                       ? "SYN-" + std::to_string(spec.seed)
                       : spec.wafer_id;
  wafer.layout_ref = "ring8";
  wafer.metadata["synthetic"] = "true";
  wafer.metadata["seed"] = std::to_string(spec.seed);

  for (int row = 0; row < spec.die_rows; ++row) {
    for (int col = 0; col < spec.die_cols; ++col) {
      for (int q = 0; q < spec.layout.qubit_count; ++q) {
        Junction j;
        j.id = detail::derived_junction_id(row, col, q);
        j.die_row = row;
        j.die_col = col;
        j.qubit_index = q;
        j.group = spec.layout.group_of[static_cast<std::size_t>(q)];
        const double theta = 2.0 * std::numbers::pi * q /
                             std::max(1, spec.layout.qubit_count);
        j.x_um = col * kDiePitchUm + kDiePitchUm / 2 +
                 kRingRadiusUm * std::cos(theta);
        j.y_um = row * kDiePitchUm + kDiePitchUm / 2 +
                 kRingRadiusUm * std::sin(theta);

        Rng rng(stream_seed(spec.seed, j.id, 0));
        const double med = medians.at(j.group);
        double r;
        if (spec.out_of_spec_fraction > 0.0 &&
            rng.uniform01() < spec.out_of_spec_fraction) {
          const double mag = rng.uniform(1.25, 1.40);
          r = rng.uniform01() < 0.5 ? med * mag : med / mag;
        } else {
          r = med * (1.0 + spec.sigma_for(j.group) / 100.0 * rng.normal());
        }
        if (!(r > 0.0)) r = 0.01 * med; // physicality clamp, unreachable at sane sigma
        j.history.push_back({0, r});
        wafer.junctions.push_back(std::move(j));
      }
    }
  }
  wafer.canonicalize();
  wafer.validate();
  return wafer;
}

/// Simulated anneal round: every planned junction gains its dose response
/// times a lognormal noise factor, every junction (planned or not) ages by
/// one round, and a new history entry is appended at the plan's round index.
inline Wafer apply_plan(const Wafer& wafer, const TunePlan& plan,
                        const DoseResponseModel& model, std::uint64_t seed) {
  model.validate();
  Wafer out = wafer;
  std::map<std::string, const PlanEntry*> by_id;
  for (const auto& e : plan.entries) {
    if (!out.find(e.junction_id))
      throw validation_error("apply_plan: unknown junction " + e.junction_id);
    if (e.shots < 1)
      throw validation_error("apply_plan: entry shots must be >= 1");
    by_id[e.junction_id] = &e;
  }
  const double ageing = ambient_ageing(1, model);
  for (auto& j : out.junctions) {
    if (plan.round_index <= j.latest_round())
      throw validation_error("apply_plan: round " +
                             std::to_string(plan.round_index) +
                             " not after junction " + j.id + " history");
    double shift = ageing;
    auto it = by_id.find(j.id);
    if (it != by_id.end()) {
      const PlanEntry& e = *it->second;
      Rng rng(stream_seed(seed, j.id, plan.round_index));
      shift += delta_r(e.shots, e.placement, model) *
               rng.lognormal_unit_mean(model.noise_rel_std);
      j.status = JunctionStatus::Tuned;
    }
    j.history.push_back({plan.round_index, j.latest_resistance() + shift});
  }
  return out;
}

/// Snapshot of one campaign stage (round 0 = as fabricated).
struct RoundReport {
  int round = 0;
  double sigma_percent_overall = 0.0;
  std::map<int, double> sigma_percent_by_group;
  double yield_percent = 0.0;
  std::size_t collisions_excluding_s1 = 0;
  std::map<std::size_t, std::size_t> collision_histogram; // dies per count
  WaferCollisionMap collision_map;
};

struct CampaignReport {
  std::uint64_t seed = 0;
  std::vector<RoundReport> per_round;
  std::vector<TunePlan> plans;
  SpreadStats initial_stats;
  SpreadStats final_stats;
  double mean_shift_tuned_ohm = 0.0;
  double mean_shift_untuned_ohm = 0.0;
  Wafer final_wafer;
};

namespace detail {

inline RoundReport round_report(const Wafer& wafer, int round,
                                const QpuLayout& layout,
                                const CollisionParams& params,
                                const PhysicsConfig& physics,
                                unsigned threads) {
  RoundReport rep;
  rep.round = round;
  const SpreadStats overall = normalized_spread_stats(wafer);
  rep.sigma_percent_overall = overall.sigma_percent;
  rep.yield_percent = overall.yield_percent;
  for (const auto& [g, js] : group_by_design(wafer))
    rep.sigma_percent_by_group[g] = spread_stats(js).sigma_percent;
  rep.collision_map = wafer_collision_map(wafer, layout, params, physics, threads);
  rep.collision_histogram = rep.collision_map.histogram_excluding_s1();
  rep.collisions_excluding_s1 = rep.collision_map.total_excluding_s1();
  return rep;
}

} // namespace detail

/// Full measure -> plan -> anneal loop on a wafer (or a freshly generated
/// one). Deterministic: the spec seed fixes fabrication, cfg.seed fixes
/// planning and the per-round anneal noise.
inline CampaignReport run_campaign(const Wafer& initial,
                                   const CampaignConfig& cfg,
                                   const DoseResponseModel& model,
                                   const QpuLayout& layout,
                                   const CollisionParams& params,
                                   const PhysicsConfig& physics = {},
                                   unsigned threads = 1) {
  cfg.validate();
  model.validate();
  Wafer wafer = initial;
  wafer.validate();

  CampaignReport report;
  report.seed = cfg.seed;
  report.initial_stats = normalized_spread_stats(wafer);
  yield_window(wafer.junctions); // flag out-of-spec before planning

  std::map<int, double> targets;
  if (cfg.strategy == Strategy::TargetedInverse)
    targets = detail::campaign_targets(group_by_design(wafer), cfg, model);

  const int first_round =
      wafer.junctions.empty() ? 1 : wafer.junctions.front().latest_round() + 1;
  report.per_round.push_back(detail::round_report(
      wafer, first_round - 1, layout, params, physics, threads));

  for (int r = 0; r < cfg.max_rounds; ++r) {
    const RoundReport& last = report.per_round.back();
    if (last.sigma_percent_overall <= cfg.stop_sigma_percent &&
        last.collisions_excluding_s1 == 0)
      break;

    const int round = first_round + r;
    TunePlan plan = detail::plan_one_round(wafer, cfg, model, layout, params,
                                           physics, round, targets);
    if (plan.entries.empty()) break;

    wafer = apply_plan(wafer, plan, model, derive_seed(cfg.seed, static_cast<std::uint64_t>(round)));
    yield_window(wafer.junctions);
    report.plans.push_back(std::move(plan));
    report.per_round.push_back(detail::round_report(
        wafer, round, layout, params, physics, threads));
  }

  report.final_stats = normalized_spread_stats(wafer);

  std::set<std::string> tuned;
  for (const auto& p : report.plans)
    for (const auto& e : p.entries) tuned.insert(e.junction_id);
  double sum_t = 0.0, sum_u = 0.0;
  std::size_t n_t = 0, n_u = 0;
  for (const auto& j : wafer.junctions) {
    const double shift = j.latest_resistance() - j.initial_resistance();
    if (tuned.count(j.id)) {
      sum_t += shift;
      ++n_t;
    } else {
      sum_u += shift;
      ++n_u;
    }
  }
  report.mean_shift_tuned_ohm = n_t ? sum_t / static_cast<double>(n_t) : 0.0;
  report.mean_shift_untuned_ohm = n_u ? sum_u / static_cast<double>(n_u) : 0.0;
  report.final_wafer = std::move(wafer);
  return report;
}

inline CampaignReport run_campaign(const WaferSpec& spec,
                                   const CampaignConfig& cfg,
                                   const DoseResponseModel& model,
                                   const CollisionParams& params,
                                   const PhysicsConfig& physics = {},
                                   unsigned threads = 1) {
  return run_campaign(generate_wafer(spec, physics), cfg, model, spec.layout,
                      params, physics, threads);
}

// --- JSON -------------------------------------------------------------

inline nlohmann::json to_json(const WaferSpec& spec) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["dies"] = {{"rows", spec.die_rows}, {"cols", spec.die_cols}};
  j["layout"] = to_json(spec.layout);
  auto& groups = j["groups"] = nlohmann::json::object();
  std::set<int> all_groups(spec.layout.group_of.begin(), spec.layout.group_of.end());
  for (int g : all_groups) {
    nlohmann::json e;
    if (spec.group_median_ohm.count(g)) e["median_ohm"] = spec.group_median_ohm.at(g);
    e["sigma_percent"] = spec.sigma_for(g);
    groups[std::to_string(g)] = std::move(e);
  }
  j["rel_sigma_percent"] = spec.rel_sigma_percent;
  j["out_of_spec_fraction"] = spec.out_of_spec_fraction;
  j["seed"] = spec.seed;
  if (!spec.wafer_id.empty()) j["wafer_id"] = spec.wafer_id;
  return j;
}

inline WaferSpec wafer_spec_from_json(const nlohmann::json& j) {
  WaferSpec spec;
  if (j.contains("dies")) {
    spec.die_rows = j.at("dies").value("rows", 1);
    spec.die_cols = j.at("dies").value("cols", 1);
  }
  if (j.contains("layout")) spec.layout = layout_from_json(j.at("layout"));
  spec.rel_sigma_percent = j.value("rel_sigma_percent", spec.rel_sigma_percent);
  if (j.contains("groups")) {
    for (const auto& [key, val] : j.at("groups").items()) {
      const int g = std::stoi(key);
      if (val.contains("median_ohm"))
        spec.group_median_ohm[g] = val.at("median_ohm").get<double>();
      if (val.contains("sigma_percent"))
        spec.group_sigma_percent[g] = val.at("sigma_percent").get<double>();
    }
  }
  spec.out_of_spec_fraction = j.value("out_of_spec_fraction", 0.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.wafer_id = j.value("wafer_id", std::string{});
  spec.validate();
  return spec;
}

inline nlohmann::json to_json(const SpreadStats& s) {
  return {{"count_total", s.count_total},
          {"count_in_window", s.count_in_window},
          {"median_ohm", s.median_ohm},
          {"mean_ohm", s.mean_ohm},
          {"sigma_percent", s.sigma_percent},
          {"yield_percent", s.yield_percent}};
}

inline nlohmann::json to_json(const RoundReport& r) {
  nlohmann::json j;
  j["round"] = r.round;
  j["sigma_percent_overall"] = r.sigma_percent_overall;
  auto& by_group = j["sigma_percent_by_group"] = nlohmann::json::object();
  for (auto [g, s] : r.sigma_percent_by_group) by_group[std::to_string(g)] = s;
  j["yield_percent"] = r.yield_percent;
  j["collisions_excluding_s1"] = r.collisions_excluding_s1;
  auto& hist = j["collision_histogram"] = nlohmann::json::object();
  for (auto [count, dies] : r.collision_histogram)
    hist[std::to_string(count)] = dies;
  auto& map = j["collision_map"] = nlohmann::json::array();
  for (const auto& [die, rep] : r.collision_map.per_die) {
    nlohmann::json e;
    e["die"] = {{"row", die.first}, {"col", die.second}};
    e["total_excluding_s1"] = rep.total_excluding_s1;
    auto& counts = e["per_type_counts"] = nlohmann::json::object();
    for (const auto& [t, n] : rep.per_type_counts) counts[to_string(t)] = n;
    map.push_back(std::move(e));
  }
  auto& skipped = j["skipped_dies"] = nlohmann::json::array();
  for (auto [row, col] : r.collision_map.skipped_dies)
    skipped.push_back({{"row", row}, {"col", col}});
  return j;
}

inline nlohmann::json to_json(const CampaignReport& rep) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["seed"] = rep.seed;
  auto& rounds = j["per_round"] = nlohmann::json::array();
  for (const auto& r : rep.per_round) rounds.push_back(to_json(r));
  auto& plans = j["plans"] = nlohmann::json::array();
  for (const auto& p : rep.plans) plans.push_back(to_json(p));
  j["initial_stats"] = to_json(rep.initial_stats);
  j["final_stats"] = to_json(rep.final_stats);
  j["tuned_vs_untuned_shift_ohm"] = {{"tuned", rep.mean_shift_tuned_ohm},
                                     {"untuned", rep.mean_shift_untuned_ohm}};
  j["final_wafer"] = to_json(rep.final_wafer);
  return j;
}

} // namespace jjtune
