#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "jjtune/reports.hpp"
#include "jjtune/simulate.hpp"
#include "test_util.hpp"

using namespace jjtune;
using Catch::Approx;

namespace {

WaferSpec paper_scale_spec(std::uint64_t seed) {
  WaferSpec spec;
  spec.die_rows = 3;
  spec.die_cols = 23; // 69 dies x 8 qubits = 552 junctions
  spec.group_sigma_percent = {{1, 2.76}, {2, 3.59}, {3, 2.99}};
  spec.seed = seed;
  return spec;
}

} // namespace

TEST_CASE("wafer generation") {
  SECTION("552 junctions at paper scale") {
    const Wafer w = generate_wafer(paper_scale_spec(1));
    CHECK(w.junctions.size() == 552);
  }
  SECTION("same seed is byte-identical, different seed is not") {
    WaferSpec spec = paper_scale_spec(5);
    const std::string a = to_json(generate_wafer(spec)).dump();
    const std::string b = to_json(generate_wafer(spec)).dump();
    CHECK(a == b);
    spec.seed = 6;
    CHECK(to_json(generate_wafer(spec)).dump() != a);
  }
  SECTION("zero spread puts every junction exactly at its group median") {
    WaferSpec spec;
    spec.rel_sigma_percent = 0.0;
    spec.group_median_ohm = {{1, 8000.0}, {2, 8300.0}, {3, 8600.0}};
    const Wafer w = generate_wafer(spec);
    for (const auto& j : w.junctions) {
      const double expected = spec.group_median_ohm.at(j.group);
      CHECK(j.latest_resistance() == expected);
    }
  }
  SECTION("out-of-spec injection lands outside the window") {
    WaferSpec spec = paper_scale_spec(7);
    spec.out_of_spec_fraction = 0.08;
    Wafer w = generate_wafer(spec);
    std::size_t out = 0;
    for (const auto& [g, js] : group_by_design(w))
      out += window_partition(js).out_of_spec.size();
    CHECK(out > 20); // ~44 expected
    CHECK(out < 70);
  }
}

TEST_CASE("apply plan") {
  DoseResponseModel model;
  model.noise_rel_std = 0.0;
  WaferSpec spec;
  spec.seed = 3;
  const Wafer wafer = generate_wafer(spec);

  SECTION("empty plan ages everything by exactly one round") {
    TunePlan plan;
    plan.round_index = 1;
    const Wafer next = apply_plan(wafer, plan, model, 0);
    for (std::size_t i = 0; i < wafer.junctions.size(); ++i)
      CHECK(next.junctions[i].latest_resistance() ==
            wafer.junctions[i].latest_resistance() + model.ageing_per_round_ohm);
  }
  SECTION("saturation dose shifts by exactly delta_r_sat plus ageing") {
    TunePlan plan;
    plan.round_index = 1;
    plan.entries.push_back({wafer.junctions[0].id, 400, BeamPlacement{}, false});
    const Wafer next = apply_plan(wafer, plan, model, 0);
    CHECK(next.junctions[0].latest_resistance() ==
          Approx(wafer.junctions[0].latest_resistance() + 250.0 +
                 model.ageing_per_round_ohm)
              .epsilon(1e-12));
    CHECK(next.junctions[0].status == JunctionStatus::Tuned);
    for (std::size_t i = 1; i < wafer.junctions.size(); ++i)
      CHECK(next.junctions[i].latest_resistance() ==
            wafer.junctions[i].latest_resistance() + model.ageing_per_round_ohm);
  }
  SECTION("unknown junction and stale rounds are rejected") {
    TunePlan plan;
    plan.round_index = 1;
    plan.entries.push_back({"nope", 4, BeamPlacement{}, false});
    CHECK_THROWS_AS(apply_plan(wafer, plan, model, 0), validation_error);
    TunePlan stale;
    stale.round_index = 0;
    CHECK_THROWS_AS(apply_plan(wafer, stale, model, 0), validation_error);
  }
  SECTION("noise is deterministic per seed") {
    DoseResponseModel noisy = model;
    noisy.noise_rel_std = 0.15;
    TunePlan plan;
    plan.round_index = 1;
    for (const auto& j : wafer.junctions)
      plan.entries.push_back({j.id, 8, BeamPlacement{}, false});
    const std::string a = to_json(apply_plan(wafer, plan, noisy, 5)).dump();
    const std::string b = to_json(apply_plan(wafer, plan, noisy, 5)).dump();
    CHECK(a == b);
    CHECK(to_json(apply_plan(wafer, plan, noisy, 6)).dump() != a);
  }
}

TEST_CASE("ensemble campaign reproduces the fixed-dose shift separation") {
  // fixed dose at full saturation: planned shift exactly 200 ohm
  DoseResponseModel model;
  model.delta_r_sat_ohm = 200.0;
  model.noise_rel_std = 0.0;
  CampaignConfig cfg;
  cfg.strategy = Strategy::EnsembleBelowMedian;
  cfg.max_rounds = 1;
  cfg.ensemble_shots = 400; // 100 * n0 -> exact saturation
  const CollisionParams params;

  const CampaignReport rep =
      run_campaign(paper_scale_spec(11), cfg, model, params);
  REQUIRE(rep.plans.size() == 1);
  CHECK(rep.mean_shift_tuned_ohm - rep.mean_shift_untuned_ohm ==
        Approx(200.0).margin(1e-9));
  CHECK(rep.mean_shift_untuned_ohm ==
        Approx(model.ageing_per_round_ohm).margin(1e-9));
}

TEST_CASE("campaign terminates immediately on a perfect wafer") {
  WaferSpec spec;
  spec.rel_sigma_percent = 0.0;
  DoseResponseModel model;
  model.noise_rel_std = 0.0;
  CampaignConfig cfg;
  const CampaignReport rep =
      run_campaign(spec, cfg, model, CollisionParams{});
  CHECK(rep.plans.empty());
  REQUIRE(rep.per_round.size() == 1);
  CHECK(rep.per_round[0].sigma_percent_overall == 0.0);
  CHECK(rep.final_stats.sigma_percent == 0.0);
}

TEST_CASE("noiseless targeted campaign strictly improves the spread") {
  DoseResponseModel model;
  model.noise_rel_std = 0.0;
  CampaignConfig cfg;
  const CampaignReport rep =
      run_campaign(paper_scale_spec(13), cfg, model, CollisionParams{});
  REQUIRE(!rep.plans.empty());
  CHECK(rep.final_stats.sigma_percent < rep.initial_stats.sigma_percent);
  for (std::size_t i = 1; i < rep.per_round.size(); ++i)
    CHECK(rep.per_round[i].sigma_percent_overall <=
          rep.per_round[i - 1].sigma_percent_overall + 1e-9);
}

TEST_CASE("histories never decrease across a noisy campaign") {
  DoseResponseModel model; // noise 0.15
  CampaignConfig cfg;
  const CampaignReport rep =
      run_campaign(paper_scale_spec(17), cfg, model, CollisionParams{});
  for (const auto& j : rep.final_wafer.junctions) {
    REQUIRE(j.history.size() == rep.plans.size() + 1);
    for (std::size_t k = 1; k < j.history.size(); ++k)
      CHECK(j.history[k].resistance_ohm >= j.history[k - 1].resistance_ohm);
  }
}

TEST_CASE("campaign determinism including die-level parallelism") {
  const WaferSpec spec = paper_scale_spec(19);
  DoseResponseModel model;
  CampaignConfig cfg;
  cfg.seed = 19;
  const std::string a =
      to_json(run_campaign(spec, cfg, model, CollisionParams{}, {}, 1)).dump();
  const std::string b =
      to_json(run_campaign(spec, cfg, model, CollisionParams{}, {}, 1)).dump();
  const std::string c =
      to_json(run_campaign(spec, cfg, model, CollisionParams{}, {}, 4)).dump();
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("report emission") {
  namespace fs = std::filesystem;
  WaferSpec spec; // one die
  spec.seed = 23;
  DoseResponseModel model;
  CampaignConfig cfg;
  cfg.max_rounds = 2;
  const CampaignReport rep = run_campaign(spec, cfg, model, CollisionParams{});

  const fs::path dir = fs::temp_directory_path() / "jjtune_test_reports";
  fs::remove_all(dir);
  const auto files = emit_reports(rep, dir.string());
  REQUIRE(!files.empty());

  SECTION("single-die SVG has one filled cell") {
    const std::string svg = read_file((dir / "collision_map_r0.svg").string());
    std::size_t rects = 0, pos = 0;
    while ((pos = svg.find("<rect", pos)) != std::string::npos) {
      ++rects;
      pos += 5;
    }
    CHECK(rects == 1);
  }
  SECTION("re-emission is byte identical") {
    std::map<std::string, std::string> first;
    for (const auto& f : files) first[f] = read_file(f);
    const auto again = emit_reports(rep, dir.string());
    REQUIRE(again == files);
    for (const auto& f : again) CHECK(read_file(f) == first.at(f));
  }
  SECTION("campaign.json round trips through the wafer parser") {
    const auto j = nlohmann::json::parse(
        read_file((dir / "campaign.json").string()));
    CHECK(j.at("schema_version") == 1);
    const Wafer final_wafer = parse_wafer_json(j.at("final_wafer"));
    CHECK(final_wafer.junctions.size() == rep.final_wafer.junctions.size());
    CHECK(j.at("per_round").size() == rep.per_round.size());
  }
  fs::remove_all(dir);
}

TEST_CASE("yield accounting") {
  SECTION("hand fixture follows the 80-120% rule") {
    std::vector<Junction> js;
    for (int i = 0; i < 8; ++i)
      js.push_back(testutil::simple_junction("j" + std::to_string(i),
                                             8000.0 + 10.0 * i, 1, i));
    js.push_back(testutil::simple_junction("low", 6300.0, 1, 0, 1));
    js.push_back(testutil::simple_junction("high", 9700.0, 1, 1, 1));
    const auto stats = spread_stats(js);
    CHECK(stats.count_total == 10);
    CHECK(stats.count_in_window == 8);
    CHECK(stats.yield_percent == Approx(80.0));
  }
  SECTION("campaign reports yield per round") {
    WaferSpec spec = paper_scale_spec(29);
    spec.out_of_spec_fraction = 0.05;
    DoseResponseModel model;
    CampaignConfig cfg;
    const CampaignReport rep = run_campaign(spec, cfg, model, CollisionParams{});
    CHECK(rep.per_round.front().yield_percent ==
          Approx(rep.initial_stats.yield_percent));
    CHECK(rep.per_round.back().yield_percent ==
          Approx(rep.final_stats.yield_percent));
    CHECK(rep.initial_stats.yield_percent < 100.0);
    // the delta is bookkeeping, not a physical claim
    const double delta = rep.final_stats.yield_percent -
                         rep.initial_stats.yield_percent;
    CHECK(std::abs(delta) < 20.0);
  }
}

TEST_CASE("wafer spec json round trip") {
  WaferSpec spec = paper_scale_spec(31);
  spec.out_of_spec_fraction = 0.02;
  spec.wafer_id = "W-TEST";
  const WaferSpec back = wafer_spec_from_json(to_json(spec));
  CHECK(back.die_rows == 3);
  CHECK(back.die_cols == 23);
  CHECK(back.seed == 31);
  CHECK(back.wafer_id == "W-TEST");
  CHECK(back.group_sigma_percent == spec.group_sigma_percent);
  CHECK(back.out_of_spec_fraction == 0.02);
  CHECK(to_json(back).dump() == to_json(spec).dump());
}
