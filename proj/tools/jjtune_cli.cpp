// jjtune: wafer-scale Josephson-junction frequency tuning planner/simulator.
//
// Subcommands: gen, stats, collisions, plan, apply, campaign, zero-spread.
// Exit codes: 0 success, 2 validation error, 3 planning error, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jjtune/jjtune.hpp"

namespace {

using namespace jjtune;

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

QpuLayout load_layout(const std::string& path) {
  return path.empty() ? QpuLayout::ring8() : layout_from_json(load_json(path));
}

CollisionParams load_params(const std::string& path) {
  return path.empty() ? CollisionParams{}
                      : collision_params_from_json(load_json(path));
}

DoseResponseModel load_dose_model(const std::string& path) {
  return path.empty() ? DoseResponseModel{}
                      : dose_model_from_json(load_json(path));
}

CampaignConfig load_campaign_config(const std::string& path) {
  return path.empty() ? CampaignConfig{}
                      : campaign_config_from_json(load_json(path));
}

void print_spread(const char* label, const SpreadStats& s) {
  std::printf("%-10s n=%zu in_window=%zu yield=%.2f%% sigma=%.3f%%\n", label,
              s.count_total, s.count_in_window, s.yield_percent,
              s.sigma_percent);
}

void print_report(const CollisionReport& rep, bool include_s1) {
  for (CollisionType t : kAllCollisionTypes) {
    auto it = rep.per_type_counts.find(t);
    if (it != rep.per_type_counts.end())
      std::printf("  %s: %zu\n", to_string(t), it->second);
  }
  if (include_s1)
    std::printf("total (enabled types): %zu\n", rep.total_enabled());
  else
    std::printf("total (excluding S1): %zu\n", rep.total_excluding_s1);
}

int cmd_gen(const std::string& spec_path, const std::string& out_path) {
  const WaferSpec spec = wafer_spec_from_json(load_json(spec_path));
  const Wafer wafer = generate_wafer(spec);
  save_wafer(wafer, out_path);
  std::printf("wrote %s: %zu junctions, seed %llu\n", out_path.c_str(),
              wafer.junctions.size(),
              static_cast<unsigned long long>(spec.seed));
  return 0;
}

int cmd_stats(const std::string& wafer_path, bool by_group) {
  const Wafer wafer = load_wafer(wafer_path);
  print_spread("overall", normalized_spread_stats(wafer));
  if (by_group)
    for (const auto& [g, js] : group_by_design(wafer))
      print_spread(("group " + std::to_string(g)).c_str(), spread_stats(js));
  return 0;
}

int cmd_collisions(const std::string& wafer_path, const std::string& layout_path,
                   const std::string& params_path, bool include_s1,
                   const std::string& out_path, unsigned threads) {
  const Wafer wafer = load_wafer(wafer_path);
  const QpuLayout layout = load_layout(layout_path);
  const CollisionParams params = load_params(params_path);
  const WaferCollisionMap map =
      wafer_collision_map(wafer, layout, params, PhysicsConfig{}, threads);

  nlohmann::json out;
  out["schema_version"] = 1;
  auto& dies = out["dies"] = nlohmann::json::array();
  for (const auto& [die, rep] : map.per_die) {
    std::printf("die (%d,%d): %zu%s\n", die.first, die.second,
                include_s1 ? rep.total_enabled() : rep.total_excluding_s1,
                include_s1 ? "" : " (excl. S1)");
    nlohmann::json e = to_json(rep);
    e["die"] = {{"row", die.first}, {"col", die.second}};
    dies.push_back(std::move(e));
  }
  for (auto [row, col] : map.skipped_dies)
    std::printf("die (%d,%d): skipped (incomplete)\n", row, col);
  std::printf("wafer total: %zu%s over %zu dies (%zu skipped)\n",
              include_s1 ? map.total_enabled() : map.total_excluding_s1(),
              include_s1 ? "" : " excl. S1", map.per_die.size(),
              map.skipped_dies.size());
  if (!out_path.empty()) write_file(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_plan(const std::string& wafer_path, const std::string& strategy,
             const std::string& model_path, const std::string& layout_path,
             const std::string& params_path, const std::string& config_path,
             const std::string& out_path) {
  const Wafer wafer = load_wafer(wafer_path);
  const DoseResponseModel model = load_dose_model(model_path);
  CampaignConfig cfg = load_campaign_config(config_path);
  cfg.strategy = strategy_from_string(strategy);
  const QpuLayout layout = load_layout(layout_path);
  const CollisionParams params = load_params(params_path);

  std::map<int, double> targets;
  if (cfg.strategy == Strategy::TargetedInverse)
    targets = detail::campaign_targets(group_by_design(wafer), cfg, model);
  const int round = wafer.junctions.empty()
                        ? 1
                        : wafer.junctions.front().latest_round() + 1;
  const TunePlan plan = detail::plan_one_round(
      wafer, cfg, model, layout, params, PhysicsConfig{}, round, targets);
  write_file(out_path, to_json(plan).dump(2) + "\n");
  std::printf("wrote %s: round %d, %zu junctions planned\n", out_path.c_str(),
              plan.round_index, plan.entries.size());
  return 0;
}

int cmd_apply(const std::string& wafer_path, const std::string& plan_path,
              const std::string& model_path, std::uint64_t seed,
              const std::string& out_path) {
  const Wafer wafer = load_wafer(wafer_path);
  const TunePlan plan = plan_from_json(load_json(plan_path));
  const DoseResponseModel model = load_dose_model(model_path);
  const Wafer next = apply_plan(wafer, plan, model, seed);
  save_wafer(next, out_path);
  std::printf("wrote %s: round %d applied to %zu junctions (seed %llu)\n",
              out_path.c_str(), plan.round_index, plan.entries.size(),
              static_cast<unsigned long long>(seed));
  return 0;
}

int cmd_campaign(const std::string& spec_path, const std::string& wafer_path,
                 const std::string& config_path, const std::string& model_path,
                 const std::string& layout_path, const std::string& params_path,
                 const std::string& out_dir, unsigned threads) {
  const CampaignConfig cfg = load_campaign_config(config_path);
  const DoseResponseModel model = load_dose_model(model_path);
  const CollisionParams params = load_params(params_path);

  CampaignReport report;
  if (!spec_path.empty()) {
    WaferSpec spec = wafer_spec_from_json(load_json(spec_path));
    if (!layout_path.empty()) spec.layout = load_layout(layout_path);
    report = run_campaign(spec, cfg, model, params, PhysicsConfig{}, threads);
  } else {
    const Wafer wafer = load_wafer(wafer_path);
    const QpuLayout layout = load_layout(layout_path);
    report = run_campaign(wafer, cfg, model, layout, params, PhysicsConfig{},
                          threads);
  }

  emit_reports(report, out_dir);
  std::printf("campaign seed %llu: %zu planning rounds\n",
              static_cast<unsigned long long>(report.seed),
              report.plans.size());
  for (const auto& r : report.per_round)
    std::printf("  round %d: sigma %.3f%%, yield %.2f%%, collisions %zu (excl. S1)\n",
                r.round, r.sigma_percent_overall, r.yield_percent,
                r.collisions_excluding_s1);
  std::printf("sigma %.3f%% -> %.3f%%, reports in %s\n",
              report.initial_stats.sigma_percent,
              report.final_stats.sigma_percent, out_dir.c_str());
  return 0;
}

int cmd_zero_spread(const std::string& layout_path,
                    const std::string& params_path) {
  const CollisionReport rep =
      zero_spread_assessment(load_layout(layout_path), load_params(params_path));
  std::printf("zero-spread assessment:\n");
  print_report(rep, /*include_s1=*/true);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Josephson-junction frequency-tuning planner and simulator"};
  app.require_subcommand(1);

  std::string spec_path, wafer_path, layout_path, params_path, model_path;
  std::string config_path, plan_path, out_path, out_dir, strategy;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool by_group = false, include_s1 = false;

  auto* gen = app.add_subcommand("gen", "generate a synthetic wafer");
  gen->add_option("--spec", spec_path, "wafer spec JSON")->required();
  gen->add_option("--out", out_path, "output wafer file (.json or .csv)")->required();

  auto* stats = app.add_subcommand("stats", "spread and yield statistics");
  stats->add_option("--wafer", wafer_path, "wafer file")->required();
  stats->add_flag("--by-group", by_group, "also print per-group statistics");

  auto* col = app.add_subcommand("collisions", "frequency-collision report");
  col->add_option("--wafer", wafer_path, "wafer file")->required();
  col->add_option("--layout", layout_path, "QPU layout JSON (default: ring-8)");
  col->add_option("--params,--collision-params", params_path,
                  "collision params JSON");
  col->add_flag("--include-s1", include_s1, "count S1 hits in totals");
  col->add_option("--out", out_path, "write per-die report JSON");
  col->add_option("--threads", threads, "die-level parallelism");

  auto* plan = app.add_subcommand("plan", "plan one tuning round");
  plan->add_option("--wafer", wafer_path, "wafer file")->required();
  plan->add_option("--strategy", strategy, "ensemble|targeted|collision-aware")
      ->required();
  plan->add_option("--dose-model", model_path, "dose response model JSON");
  plan->add_option("--layout", layout_path, "QPU layout JSON");
  plan->add_option("--params,--collision-params", params_path,
                   "collision params JSON");
  plan->add_option("--config", config_path, "campaign config JSON");
  plan->add_option("--out", out_path, "output plan JSON")->required();

  auto* apply = app.add_subcommand("apply", "apply a plan (virtual anneal)");
  apply->add_option("--wafer", wafer_path, "wafer file")->required();
  apply->add_option("--plan", plan_path, "plan JSON")->required();
  apply->add_option("--dose-model", model_path, "dose response model JSON");
  apply->add_option("--seed", seed, "noise seed");
  apply->add_option("--out", out_path, "output wafer file")->required();

  auto* camp = app.add_subcommand("campaign", "run a full tuning campaign");
  auto* camp_spec = camp->add_option("--spec", spec_path, "wafer spec JSON");
  auto* camp_wafer = camp->add_option("--wafer", wafer_path, "measured wafer file");
  camp_spec->excludes(camp_wafer);
  camp->add_option("--config", config_path, "campaign config JSON");
  camp->add_option("--dose-model", model_path, "dose response model JSON");
  camp->add_option("--layout", layout_path, "QPU layout JSON");
  camp->add_option("--params,--collision-params", params_path,
                   "collision params JSON");
  camp->add_option("--out-dir", out_dir, "report directory")->required();
  camp->add_option("--threads", threads, "die-level parallelism");

  auto* zs = app.add_subcommand("zero-spread",
                                "collision assessment at exact design targets");
  zs->add_option("--layout", layout_path, "QPU layout JSON");
  zs->add_option("--params,--collision-params", params_path,
                 "collision params JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(spec_path, out_path);
    if (stats->parsed()) return cmd_stats(wafer_path, by_group);
    if (col->parsed())
      return cmd_collisions(wafer_path, layout_path, params_path, include_s1,
                            out_path, threads);
    if (plan->parsed())
      return cmd_plan(wafer_path, strategy, model_path, layout_path,
                      params_path, config_path, out_path);
    if (apply->parsed())
      return cmd_apply(wafer_path, plan_path, model_path, seed, out_path);
    if (camp->parsed()) {
      if (spec_path.empty() && wafer_path.empty())
        throw validation_error("campaign: need --spec or --wafer");
      return cmd_campaign(spec_path, wafer_path, config_path, model_path,
                          layout_path, params_path, out_dir, threads);
    }
    if (zs->parsed()) return cmd_zero_spread(layout_path, params_path);
  } catch (const planning_error& e) {
    std::fprintf(stderr, "planning error: %s\n", e.what());
    return 3;
  } catch (const io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const validation_error& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
