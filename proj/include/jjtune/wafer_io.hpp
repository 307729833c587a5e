#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "jjtune/junction.hpp"

namespace jjtune {

inline constexpr int kSchemaVersion = 1;

enum class WaferFormat { Csv, Json };

inline constexpr std::string_view kWaferCsvHeader =
    "wafer_id,die_row,die_col,qubit_index,group,x_um,y_um,round,resistance_ohm";

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw parse_error("line " + std::to_string(line_no) + ": bad " + what +
                      " '" + std::string(field) + "'");
  return value;
}

inline double finite_number(const nlohmann::json& v, const std::string& what) {
  if (!v.is_number())
    throw parse_error("wafer json: " + what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d))
    throw parse_error("wafer json: " + what + " must be finite");
  return d;
}

/// Junction id used when the source format (CSV) does not carry one.
inline std::string derived_junction_id(int row, int col, int qubit) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "d%02dc%02dq%d", row, col, qubit);
  return buf;
}

} // namespace detail

// --- CSV ---------------------------------------------------------------
// One row per (junction, round). CSV carries measurements only; status is a
// JSON-side field and defaults to as_fabricated on import.

inline Wafer parse_wafer_csv(std::string_view source) {
  Wafer wafer;
  std::map<std::tuple<int, int, int>, std::size_t> site_index;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t eol = source.find('\n', pos);
    if (eol == std::string_view::npos) eol = source.size();
    std::string_view line = source.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != kWaferCsvHeader)
        throw parse_error("line 1: expected header '" +
                          std::string(kWaferCsvHeader) + "'");
      continue;
    }
    if (line.empty()) continue;

    const auto f = detail::split_csv_line(line);
    if (f.size() != 9)
      throw parse_error("line " + std::to_string(line_no) + ": expected 9 fields, got " +
                        std::to_string(f.size()));
    const std::string row_wafer_id{f[0]};
    const int die_row = detail::parse_number<int>(f[1], line_no, "die_row");
    const int die_col = detail::parse_number<int>(f[2], line_no, "die_col");
    const int qubit = detail::parse_number<int>(f[3], line_no, "qubit_index");
    const int group = detail::parse_number<int>(f[4], line_no, "group");
    const double x = detail::parse_number<double>(f[5], line_no, "x_um");
    const double y = detail::parse_number<double>(f[6], line_no, "y_um");
    const int round = detail::parse_number<int>(f[7], line_no, "round");
    const double r =
        detail::parse_number<double>(f[8], line_no, "resistance_ohm");

    if (wafer.wafer_id.empty())
      wafer.wafer_id = row_wafer_id;
    else if (wafer.wafer_id != row_wafer_id)
      throw parse_error("line " + std::to_string(line_no) +
                        ": wafer_id changes mid-file");
    if (group < 1)
      throw validation_error("line " + std::to_string(line_no) +
                             ": unknown group label '" + std::string(f[4]) + "'");
    if (!(r > 0.0))
      throw parse_error("line " + std::to_string(line_no) +
                        ": resistance must be positive");

    const auto site = std::make_tuple(die_row, die_col, qubit);
    auto it = site_index.find(site);
    if (it == site_index.end()) {
      Junction j;
      j.id = detail::derived_junction_id(die_row, die_col, qubit);
      j.die_row = die_row;
      j.die_col = die_col;
      j.qubit_index = qubit;
      j.group = group;
      j.x_um = x;
      j.y_um = y;
      wafer.junctions.push_back(std::move(j));
      it = site_index.emplace(site, wafer.junctions.size() - 1).first;
    } else {
      const Junction& j = wafer.junctions[it->second];
      if (j.group != group || j.x_um != x || j.y_um != y)
        throw validation_error("line " + std::to_string(line_no) +
                               ": inconsistent group/position for junction " +
                               j.id);
    }
    Junction& j = wafer.junctions[it->second];
    for (const auto& m : j.history)
      if (m.round == round)
        throw validation_error("line " + std::to_string(line_no) +
                               ": duplicate round for junction " + j.id);
    j.history.push_back({round, r});
  }

  for (auto& j : wafer.junctions)
    std::sort(j.history.begin(), j.history.end(),
              [](const Measurement& a, const Measurement& b) {
                return a.round < b.round;
              });
  wafer.canonicalize();
  wafer.validate();
  return wafer;
}

inline std::string to_csv(const Wafer& wafer) {
  Wafer copy = wafer;
  copy.canonicalize();
  std::ostringstream out;
  out << kWaferCsvHeader << '\n';
  out.precision(17);
  for (const auto& j : copy.junctions)
    for (const auto& m : j.history)
      out << copy.wafer_id << ',' << j.die_row << ',' << j.die_col << ','
          << j.qubit_index << ',' << j.group << ',' << j.x_um << ',' << j.y_um
          << ',' << m.round << ',' << m.resistance_ohm << '\n';
  return out.str();
}

// --- JSON ---------------------------------------------------------------

inline nlohmann::json to_json(const Wafer& wafer) {
  Wafer copy = wafer;
  copy.canonicalize();
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["wafer_id"] = copy.wafer_id;
  j["layout_ref"] = copy.layout_ref;
  j["metadata"] = copy.metadata;
  auto& arr = j["junctions"] = nlohmann::json::array();
  for (const auto& junc : copy.junctions) {
    nlohmann::json e;
    e["junction_id"] = junc.id;
    e["die"] = {{"row", junc.die_row}, {"col", junc.die_col}};
    e["qubit_index"] = junc.qubit_index;
    e["group"] = junc.group;
    e["position_um"] = {{"x", junc.x_um}, {"y", junc.y_um}};
    auto& hist = e["history"] = nlohmann::json::array();
    for (const auto& m : junc.history)
      hist.push_back({{"round", m.round}, {"resistance_ohm", m.resistance_ohm}});
    e["status"] = to_string(junc.status);
    arr.push_back(std::move(e));
  }
  return j;
}

inline Wafer parse_wafer_json(const nlohmann::json& j) {
  if (!j.is_object()) throw parse_error("wafer json: top level must be an object");
  if (j.value("schema_version", 0) != kSchemaVersion)
    throw parse_error("wafer json: unsupported schema_version");
  Wafer wafer;
  wafer.wafer_id = j.value("wafer_id", std::string{});
  wafer.layout_ref = j.value("layout_ref", std::string{});
  if (j.contains("metadata"))
    wafer.metadata =
        j.at("metadata").get<std::map<std::string, std::string>>();
  if (!j.contains("junctions") || !j.at("junctions").is_array())
    throw parse_error("wafer json: missing junctions array");
  for (const auto& e : j.at("junctions")) {
    Junction junc;
    junc.id = e.at("junction_id").get<std::string>();
    junc.die_row = e.at("die").at("row").get<int>();
    junc.die_col = e.at("die").at("col").get<int>();
    junc.qubit_index = e.at("qubit_index").get<int>();
    junc.group = e.at("group").get<int>();
    junc.x_um = detail::finite_number(e.at("position_um").at("x"), "position x");
    junc.y_um = detail::finite_number(e.at("position_um").at("y"), "position y");
    for (const auto& m : e.at("history"))
      junc.history.push_back(
          {m.at("round").get<int>(),
           detail::finite_number(m.at("resistance_ohm"), "resistance")});
    if (e.contains("status"))
      junc.status = junction_status_from_string(e.at("status").get<std::string>());
    wafer.junctions.push_back(std::move(junc));
  }
  wafer.canonicalize();
  wafer.validate();
  return wafer;
}

inline Wafer parse_wafer(std::string_view source, WaferFormat format) {
  if (format == WaferFormat::Csv) return parse_wafer_csv(source);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(std::string("wafer json: ") + e.what());
  }
  return parse_wafer_json(j);
}

// --- file helpers --------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("failed reading " + path);
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out.write(contents.data(),
            static_cast<std::streamsize>(contents.size()));
  if (!out) throw io_error("failed writing " + path);
}

/// Format inferred from the extension (.csv vs anything else = JSON).
inline Wafer load_wafer(const std::string& path) {
  const bool csv = path.size() > 4 && path.ends_with(".csv");
  return parse_wafer(read_file(path), csv ? WaferFormat::Csv : WaferFormat::Json);
}

inline void save_wafer(const Wafer& wafer, const std::string& path) {
  if (path.ends_with(".csv"))
    write_file(path, to_csv(wafer));
  else
    write_file(path, to_json(wafer).dump(2) + "\n");
}

} // namespace jjtune
