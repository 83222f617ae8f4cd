#pragma once

// Files: experiment config, trial logs (CSV and JSON lines), motor parameter
// files, calibration targets, run manifests.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "vfvr/calibrate.hpp"
#include "vfvr/errors.hpp"
#include "vfvr/motorsim.hpp"
#include "vfvr/trial.hpp"

namespace vfvr {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Text plumbing

/// Shortest representation that parses back to the same double.
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string fmt_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return fmt_num(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline double parse_num(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw InputError("not a number: '" + std::string(s) + "'");
  return v;
}

inline int parse_int(std::string_view s) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw InputError("not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Headered CSV kept as strings; `line` numbers are 1-based file lines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InputError("missing column '" + std::string(name) + "'");
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string s;
  int n = 0;
  while (std::getline(in, s)) {
    ++n;
    if (s.empty() || s == "\r") continue;
    auto cells = split_csv_line(s);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw InputError("row " + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
                       " fields, got " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.line.push_back(n);
  }
  if (t.header.empty()) throw InputError("empty CSV input");
  return t;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& p, std::string_view content) {
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  const auto tmp = std::filesystem::path(p.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for " + p.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into " + p.string());
  }
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Experiment config

struct ExperimentConfig {
  int participants = 20;
  std::vector<TechniqueKind> techniques{kAllTechniques.begin(), kAllTechniques.end()};
  std::vector<double> sizes{kLargeWidth, kSmallWidth};
  std::vector<double> distances{kShortDistance, kLongDistance};
  double depth = kTargetDepth;
  int sequences = 3;
  int targets_per_sequence = kTargetsPerCircle;
  std::uint64_t master_seed = 20210901;
  std::string motor_params;  // file path, empty for built-in defaults
  double capture_h_fov = kDefaultCaptureHFov;

  void validate() const {
    if (participants < 1 || sequences < 1) throw InputError("config: counts must be >= 1");
    if (techniques.empty() || sizes.empty() || distances.empty())
      throw InputError("config: techniques, sizes and distances must be non-empty");
    for (double v : sizes)
      if (!(v > 0)) throw InputError("config: sizes must be positive");
    for (double v : distances)
      if (!(v > 0)) throw InputError("config: distances must be positive");
    if (!(depth > 0)) throw InputError("config: depth must be positive");
    if (targets_per_sequence < 5 || targets_per_sequence % 2 == 0)
      throw InputError("config: targets_per_sequence must be odd and >= 5");
    if (!(capture_h_fov > 0 && capture_h_fov < 180)) throw InputError("config: capture_h_fov_deg outside (0, 180)");
  }

  SimulationPlan plan() const {
    SimulationPlan p;
    p.participants = participants;
    p.design = {techniques, sizes, distances};
    p.sequences = sequences;
    p.settings = {targets_per_sequence, depth, capture_h_fov};
    return p;
  }
};

inline Json to_json(const ExperimentConfig& c) {
  Json techs = Json::array();
  for (auto k : c.techniques) techs.push_back(std::string(technique_name(k)));
  return Json{{"participants", c.participants},
              {"techniques", techs},
              {"sizes_m", c.sizes},
              {"distances_m", c.distances},
              {"depth_m", c.depth},
              {"sequences", c.sequences},
              {"targets_per_sequence", c.targets_per_sequence},
              {"master_seed", c.master_seed},
              {"motor_params", c.motor_params},
              {"capture_h_fov_deg", c.capture_h_fov}};
}

inline ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  static const std::vector<std::string> known{"participants", "techniques", "sizes_m", "distances_m",
                                              "depth_m", "sequences", "targets_per_sequence", "master_seed",
                                              "motor_params", "capture_h_fov_deg"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw InputError("config: unknown key '" + k + "'");
  ExperimentConfig c;
  try {
    c.participants = j.value("participants", c.participants);
    if (j.contains("techniques")) {
      c.techniques.clear();
      for (const auto& t : j.at("techniques")) c.techniques.push_back(parse_technique(t.get<std::string>()));
    }
    c.sizes = j.value("sizes_m", c.sizes);
    c.distances = j.value("distances_m", c.distances);
    c.depth = j.value("depth_m", c.depth);
    c.sequences = j.value("sequences", c.sequences);
    c.targets_per_sequence = j.value("targets_per_sequence", c.targets_per_sequence);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.motor_params = j.value("motor_params", c.motor_params);
    c.capture_h_fov = j.value("capture_h_fov_deg", c.capture_h_fov);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& p) {
  Json j;
  try {
    j = Json::parse(read_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config " + p.string() + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  // Relative parameter paths are resolved against the config's directory.
  if (!c.motor_params.empty() && std::filesystem::path(c.motor_params).is_relative())
    c.motor_params = (p.parent_path() / c.motor_params).lexically_normal().string();
  return c;
}

inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(to_json(c).dump())); }

// ---------------------------------------------------------------------------
// Motor parameters

inline Json to_json(const TechniqueParams& p) {
  Json zooms = Json::array();
  for (const auto& z : p.config_zoom)
    zooms.push_back({{"target_width_m", z.target_width}, {"layout_diameter_m", z.layout_diameter}, {"zoom", z.zoom}});
  return Json{{"fitts_a", p.fitts_a},
              {"fitts_b", p.fitts_b},
              {"angle_c", p.angle_c},
              {"mt_sigma", p.mt_sigma},
              {"aim_sigma_deg", p.aim_sigma_deg},
              {"amp_noise", p.amp_noise},
              {"heisenberg_deg", p.heisenberg_deg},
              {"heisenberg_prob", p.heisenberg_prob},
              {"touch_sigma_mm", p.touch_sigma_mm},
              {"hand_base", p.hand_base},
              {"hand_gain", p.hand_gain},
              {"hand_rate", p.hand_rate},
              {"hand_cross", p.hand_cross},
              {"head_base", p.head_base},
              {"head_gain", p.head_gain},
              {"head_rate", p.head_rate},
              {"head_cross", p.head_cross},
              {"path_sigma", p.path_sigma},
              {"config_panel_scale", p.config_panel_scale},
              {"config_zoom", zooms}};
}

inline Json to_json(const MotorParams& m) {
  Json j = Json::object();
  for (auto k : kAllTechniques) j[std::string(technique_name(k))] = to_json(m[k]);
  return j;
}

inline MotorParams motor_params_from_json(const Json& j) {
  MotorParams m = MotorParams::defaults();
  try {
    for (auto k : kAllTechniques) {
      const std::string name(technique_name(k));
      if (!j.contains(name)) continue;
      const Json& t = j.at(name);
      TechniqueParams& p = m[k];
      for (auto [key, field] : std::initializer_list<std::pair<const char*, double TechniqueParams::*>>{
               {"fitts_a", &TechniqueParams::fitts_a},
               {"fitts_b", &TechniqueParams::fitts_b},
               {"angle_c", &TechniqueParams::angle_c},
               {"mt_sigma", &TechniqueParams::mt_sigma},
               {"aim_sigma_deg", &TechniqueParams::aim_sigma_deg},
               {"amp_noise", &TechniqueParams::amp_noise},
               {"heisenberg_deg", &TechniqueParams::heisenberg_deg},
               {"heisenberg_prob", &TechniqueParams::heisenberg_prob},
               {"touch_sigma_mm", &TechniqueParams::touch_sigma_mm},
               {"hand_base", &TechniqueParams::hand_base},
               {"hand_gain", &TechniqueParams::hand_gain},
               {"hand_rate", &TechniqueParams::hand_rate},
               {"hand_cross", &TechniqueParams::hand_cross},
               {"head_base", &TechniqueParams::head_base},
               {"head_gain", &TechniqueParams::head_gain},
               {"head_rate", &TechniqueParams::head_rate},
               {"head_cross", &TechniqueParams::head_cross},
               {"path_sigma", &TechniqueParams::path_sigma},
               {"config_panel_scale", &TechniqueParams::config_panel_scale}})
        if (t.contains(key)) p.*field = t.at(key).get<double>();
      if (t.contains("config_zoom")) {
        p.config_zoom.clear();
        for (const auto& z : t.at("config_zoom"))
          p.config_zoom.push_back(
              {z.at("target_width_m").get<double>(), z.at("layout_diameter_m").get<double>(), z.at("zoom").get<double>()});
      }
      p.validate();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("motor params: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return m;
}

inline MotorParams load_motor_params(const std::string& path) {
  if (path.empty()) return MotorParams::defaults();
  try {
    return motor_params_from_json(Json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("motor params " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Trial log

inline constexpr std::array<const char*, 20> kTrialLogColumns{
    "participant_id", "technique",  "target_width_m", "layout_diameter_m", "depth_m",
    "sequence_idx",   "trial_idx",  "target_index",   "from_x",            "from_y",
    "target_x",       "target_y",   "select_x",       "select_y",          "mt_s",
    "hand_path_m",    "head_path_m", "actual_depth_m", "adj_visual_angle_deg", "outcome"};

/// One selection in target-plane coordinates (origin at the layout center).
struct TrialLogRow {
  int participant_id = 0;
  TechniqueKind technique = TechniqueKind::Raycasting;
  double target_width_m = 0, layout_diameter_m = 0, depth_m = 0;
  int sequence_idx = 0, trial_idx = 0, target_index = 0;
  double from_x = 0, from_y = 0, target_x = 0, target_y = 0, select_x = 0, select_y = 0;
  double mt_s = 0, hand_path_m = 0, head_path_m = 0, actual_depth_m = 0, adj_visual_angle_deg = 0;
  Outcome outcome = Outcome::Hit;

  bool operator==(const TrialLogRow&) const = default;
};

inline TrialLogRow to_log_row(const TrialRecord& r) {
  return {r.participant,     r.condition.technique, r.condition.target_width, r.condition.layout_diameter,
          r.depth,           r.sequence_idx,        r.trial_idx,              r.target_index,
          r.from_point.x,    r.from_point.y,        r.target_center.x,        r.target_center.y,
          r.selection_point.x, r.selection_point.y, r.mt,                     r.hand_path,
          r.head_path,       r.actual_depth,        r.adj_visual_angle,       r.outcome};
}

inline TrialRecord to_record(const TrialLogRow& r) {
  TrialRecord t;
  t.participant = r.participant_id;
  t.condition = {r.technique, r.target_width_m, r.layout_diameter_m,
                 index_of_difficulty(r.layout_diameter_m, r.target_width_m)};
  t.depth = r.depth_m;
  t.sequence_idx = r.sequence_idx;
  t.trial_idx = r.trial_idx;
  t.target_index = r.target_index;
  t.from_point = {r.from_x, r.from_y, r.depth_m};
  t.target_center = {r.target_x, r.target_y, r.depth_m};
  t.selection_point = {r.select_x, r.select_y, r.depth_m};
  t.mt = r.mt_s;
  t.hand_path = r.hand_path_m;
  t.head_path = r.head_path_m;
  t.outcome = r.outcome;
  t.actual_depth = r.actual_depth_m;
  t.adj_visual_angle = r.adj_visual_angle_deg;
  return t;
}

inline void write_trial_log_csv(std::ostream& out, const std::vector<TrialLogRow>& rows) {
  for (std::size_t i = 0; i < kTrialLogColumns.size(); ++i) out << (i ? "," : "") << kTrialLogColumns[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.participant_id << ',' << technique_name(r.technique) << ',' << fmt_num(r.target_width_m) << ','
        << fmt_num(r.layout_diameter_m) << ',' << fmt_num(r.depth_m) << ',' << r.sequence_idx << ',' << r.trial_idx
        << ',' << r.target_index;
    for (double v : {r.from_x, r.from_y, r.target_x, r.target_y, r.select_x, r.select_y, r.mt_s, r.hand_path_m,
                     r.head_path_m, r.actual_depth_m, r.adj_visual_angle_deg})
      out << ',' << fmt_num(v);
    out << ',' << outcome_name(r.outcome) << '\n';
  }
}

inline void write_trial_log_jsonl(std::ostream& out, const std::vector<TrialLogRow>& rows) {
  for (const auto& r : rows) {
    Json j{{"participant_id", r.participant_id},
           {"technique", std::string(technique_name(r.technique))},
           {"target_width_m", r.target_width_m},
           {"layout_diameter_m", r.layout_diameter_m},
           {"depth_m", r.depth_m},
           {"sequence_idx", r.sequence_idx},
           {"trial_idx", r.trial_idx},
           {"target_index", r.target_index},
           {"from_x", r.from_x},
           {"from_y", r.from_y},
           {"target_x", r.target_x},
           {"target_y", r.target_y},
           {"select_x", r.select_x},
           {"select_y", r.select_y},
           {"mt_s", r.mt_s},
           {"hand_path_m", r.hand_path_m},
           {"head_path_m", r.head_path_m},
           {"actual_depth_m", r.actual_depth_m},
           {"adj_visual_angle_deg", r.adj_visual_angle_deg},
           {"outcome", std::string(outcome_name(r.outcome))}};
    out << j.dump() << '\n';
  }
}

/// Parses a trial log. Errors name the offending file line.
inline std::vector<TrialLogRow> read_trial_log_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header.size() != kTrialLogColumns.size() ||
      !std::equal(t.header.begin(), t.header.end(), kTrialLogColumns.begin()))
    throw InputError("trial log header does not match the expected column list");
  std::vector<TrialLogRow> rows;
  rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    try {
      TrialLogRow r;
      r.participant_id = parse_int(c[0]);
      r.technique = parse_technique(c[1]);
      r.target_width_m = parse_num(c[2]);
      r.layout_diameter_m = parse_num(c[3]);
      r.depth_m = parse_num(c[4]);
      r.sequence_idx = parse_int(c[5]);
      r.trial_idx = parse_int(c[6]);
      r.target_index = parse_int(c[7]);
      double* nums[] = {&r.from_x,  &r.from_y,     &r.target_x,    &r.target_y,       &r.select_x,          &r.select_y,
                        &r.mt_s,    &r.hand_path_m, &r.head_path_m, &r.actual_depth_m, &r.adj_visual_angle_deg};
      for (std::size_t k = 0; k < std::size(nums); ++k) {
        *nums[k] = parse_num(c[8 + k]);
        if (!std::isfinite(*nums[k])) throw InputError(std::string(kTrialLogColumns[8 + k]) + " is not finite");
      }
      r.outcome = parse_outcome(c[19]);
      if (!(r.target_width_m > 0 && r.layout_diameter_m > 0 && r.depth_m > 0))
        throw InputError("width, diameter and depth must be positive");
      if (!(r.mt_s > 0)) throw InputError("mt_s must be positive");
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw InputError("trial log row " + std::to_string(t.line[i]) + ": " + e.what());
    }
  }
  return rows;
}

inline std::vector<TrialLogRow> load_trial_log(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  return read_trial_log_csv(in);
}

// ---------------------------------------------------------------------------
// Calibration targets and residual report

inline constexpr std::array<const char*, 8> kTargetColumns{
    "technique", "target_width_m", "layout_diameter_m", "mt_s", "error_rate_pct", "hand_m", "head_m",
    "adj_visual_angle_deg"};

inline std::vector<CalibrationTarget> read_calibration_targets(std::istream& in) {
  const CsvTable t = read_csv(in);
  std::array<std::size_t, 8> col{};
  for (std::size_t i = 0; i < col.size(); ++i) col[i] = t.column(kTargetColumns[i]);
  std::vector<CalibrationTarget> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    try {
      out.push_back({parse_technique(c[col[0]]), parse_num(c[col[1]]), parse_num(c[col[2]]), parse_num(c[col[3]]),
                     parse_num(c[col[4]]), parse_num(c[col[5]]), parse_num(c[col[6]]), parse_num(c[col[7]])});
    } catch (const std::exception& e) {
      throw InputError("targets row " + std::to_string(t.line[i]) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<CalibrationTarget> load_calibration_targets(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  return read_calibration_targets(in);
}

inline std::string residual_report_csv(const std::vector<ResidualRow>& rows) {
  std::ostringstream out;
  out << "technique,target_width_m,layout_diameter_m,metric,target,simulated,relative,difference\n";
  for (const auto& r : rows)
    out << technique_name(r.condition.technique) << ',' << fmt_num(r.condition.target_width) << ','
        << fmt_num(r.condition.layout_diameter) << ',' << r.metric << ',' << fmt_num(r.target) << ','
        << fmt_num(r.simulated) << ',' << fmt_num(r.relative) << ',' << fmt_num(r.difference) << '\n';
  return out.str();
}

}  // namespace vfvr
