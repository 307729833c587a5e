#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "jjtune/simulate.hpp"
#include "jjtune/wafer_io.hpp"

namespace jjtune {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// White -> dark red linear scale, documented in the SVG itself.
inline std::string heat_color(std::size_t value, std::size_t max_value) {
  const double t =
      max_value == 0 ? 0.0
                     : static_cast<double>(value) / static_cast<double>(max_value);
  const int r = 255 - static_cast<int>(t * (255 - 178));
  const int g = 255 - static_cast<int>(t * (255 - 24));
  const int b = 255 - static_cast<int>(t * (255 - 43));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

} // namespace detail

/// Wafer collision map as a minimal SVG heat grid (one rect per die, count
/// annotated). All quantitative content is also emitted as JSON/CSV; the SVG
/// is a convenience rendering with a linear white->red color scale.
inline std::string collision_map_svg(const WaferCollisionMap& map) {
  int max_row = 0, max_col = 0;
  std::size_t max_count = 0;
  for (const auto& [die, rep] : map.per_die) {
    max_row = std::max(max_row, die.first);
    max_col = std::max(max_col, die.second);
    max_count = std::max(max_count, rep.total_excluding_s1);
  }
  const int cell = 44, gap = 4, margin = 8;
  const int width = margin * 2 + (max_col + 1) * (cell + gap);
  const int height = margin * 2 + (max_row + 1) * (cell + gap) + 18;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<!-- collisions excluding S1 per die; linear scale white=0 to #b2182b="
      << max_count << " -->\n";
  for (const auto& [die, rep] : map.per_die) {
    const int x = margin + die.second * (cell + gap);
    const int y = margin + die.first * (cell + gap);
    svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
        << "\" height=\"" << cell << "\" fill=\""
        << detail::heat_color(rep.total_excluding_s1, max_count)
        << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
        << "\" font-size=\"12\" text-anchor=\"middle\">"
        << rep.total_excluding_s1 << "</text>\n";
  }
  for (auto [row, col] : map.skipped_dies) {
    const int x = margin + col * (cell + gap);
    const int y = margin + row * (cell + gap);
    svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
        << "\" height=\"" << cell
        << "\" fill=\"none\" stroke=\"#444\" stroke-dasharray=\"3,2\"/>\n";
  }
  svg << "<text x=\"" << margin << "\" y=\"" << height - 6
      << "\" font-size=\"11\">max " << max_count << " (excl. S1)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

/// Resistance histogram of one group at one round, binned relative to an
/// anchor median so bins line up across rounds.
inline std::string histogram_csv(const std::vector<double>& values,
                                 double anchor_ohm) {
  constexpr int kBins = 60;
  constexpr double kLo = 0.70, kHi = 1.45;
  const double width = (kHi - kLo) / kBins;
  std::vector<std::size_t> counts(kBins, 0);
  for (double v : values) {
    const double rel = v / anchor_ohm;
    if (rel < kLo || rel >= kHi) continue;
    ++counts[static_cast<std::size_t>((rel - kLo) / width)];
  }
  std::ostringstream out;
  out << "bin_low_ohm,bin_high_ohm,count\n";
  for (int b = 0; b < kBins; ++b)
    out << detail::fmt(anchor_ohm * (kLo + b * width)) << ','
        << detail::fmt(anchor_ohm * (kLo + (b + 1) * width)) << ','
        << counts[static_cast<std::size_t>(b)] << '\n';
  return out.str();
}

/// Render a campaign into out_dir:
///   hist_r<round>_g<group>.csv     per-group resistance histograms
///   collision_map_r<round>.json    per-die collision grid
///   collision_map_r<round>.svg     heat-grid rendering of the same
///   collisions_hist_r<round>.csv   dies per collision count (excl. S1)
///   shift_scatter.csv              per-junction initial/final resistance
///   campaign.json                  the full machine-readable report
/// Returns the written paths. Re-running on the same report reproduces every
/// file byte for byte.
inline std::vector<std::string> emit_reports(const CampaignReport& report,
                                             const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw io_error("cannot create directory " + out_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& contents) {
    const std::string path = (fs::path(out_dir) / name).string();
    write_file(path, contents);
    written.push_back(path);
  };

  // anchor medians per group from the initial round
  std::map<int, double> anchors;
  for (const auto& [g, js] : group_by_design(report.final_wafer)) {
    std::vector<double> initial;
    initial.reserve(js.size());
    for (const auto& j : js) initial.push_back(j.initial_resistance());
    anchors[g] = median(initial);
  }

  for (const auto& round : report.per_round) {
    std::map<int, std::vector<double>> by_group;
    for (const auto& j : report.final_wafer.junctions)
      by_group[j.group].push_back(j.resistance_at(round.round));
    for (const auto& [g, values] : by_group)
      emit("hist_r" + std::to_string(round.round) + "_g" + std::to_string(g) +
               ".csv",
           histogram_csv(values, anchors.at(g)));

    nlohmann::json map_json;
    map_json["schema_version"] = 1;
    map_json["round"] = round.round;
    map_json["dies"] = to_json(round)["collision_map"];
    emit("collision_map_r" + std::to_string(round.round) + ".json",
         map_json.dump(2) + "\n");
    emit("collision_map_r" + std::to_string(round.round) + ".svg",
         collision_map_svg(round.collision_map));

    std::ostringstream hist;
    hist << "collisions_excl_s1,die_count\n";
    for (auto [count, dies] : round.collision_histogram)
      hist << count << ',' << dies << '\n';
    emit("collisions_hist_r" + std::to_string(round.round) + ".csv",
         hist.str());
  }

  std::set<std::string> tuned;
  for (const auto& p : report.plans)
    for (const auto& e : p.entries) tuned.insert(e.junction_id);
  std::ostringstream scatter;
  scatter << "junction_id,group,r_initial_ohm,r_final_ohm,shift_ohm,tuned\n";
  for (const auto& j : report.final_wafer.junctions)
    scatter << j.id << ',' << j.group << ','
            << detail::fmt(j.initial_resistance()) << ','
            << detail::fmt(j.latest_resistance()) << ','
            << detail::fmt(j.latest_resistance() - j.initial_resistance())
            << ',' << (tuned.count(j.id) ? 1 : 0) << '\n';
  emit("shift_scatter.csv", scatter.str());

  emit("campaign.json", to_json(report).dump(2) + "\n");
  return written;
}

} // namespace jjtune
