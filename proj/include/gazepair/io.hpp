#pragma once

// File formats: gaze traces (CSV), event and result logs (JSON lines), and
// the versioned layout/config files (JSON key/value trees).

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazepair/arbiter.hpp"
#include "gazepair/interface_model.hpp"
#include "gazepair/metrics.hpp"
#include "gazepair/simulator.hpp"
#include "gazepair/types.hpp"

namespace gazepair {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline void check_format_version(const json& j, const std::string& what) {
  if (!j.contains("format_version"))
    throw ConfigError(what + ": missing format_version");
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw ConfigError(what + ": unsupported format_version " + j.at("format_version").dump());
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> opt_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

// ---- engine config ----

inline json to_json(const EngineConfig& c) {
  return {{"dwell_ms", c.dwell_ms},
          {"corr_window_samples", c.corr_window_samples},
          {"corr_threshold", c.corr_threshold},
          {"gesture_ms", c.gesture_ms},
          {"sample_rate_hz", c.sample_rate_hz},
          {"feedback_ms", c.feedback_ms},
          {"proximity_gate_pt", opt_json(c.proximity_gate_pt)}};
}

inline EngineConfig engine_config_from_json(const json& j) {
  EngineConfig c;
  read_opt(j, "dwell_ms", c.dwell_ms);
  read_opt(j, "corr_window_samples", c.corr_window_samples);
  read_opt(j, "corr_threshold", c.corr_threshold);
  read_opt(j, "gesture_ms", c.gesture_ms);
  read_opt(j, "sample_rate_hz", c.sample_rate_hz);
  read_opt(j, "feedback_ms", c.feedback_ms);
  c.proximity_gate_pt = opt_double(j, "proximity_gate_pt");
  validate(c);
  return c;
}

// ---- layout ----

inline json to_json(const TargetSpec& t) {
  json j = {{"id", t.id},
            {"center", {t.center.x, t.center.y}},
            {"diameter_pt", t.diameter_pt},
            {"role", to_string(t.role)}};
  if (t.orbit)
    j["orbit"] = {{"radius_pt", t.orbit->radius_pt},
                  {"angular_speed_deg_s", t.orbit->angular_speed_deg_s},
                  {"initial_phase_deg", t.orbit->initial_phase_deg},
                  {"direction", to_string(t.orbit->direction)}};
  return j;
}

inline TargetSpec target_from_json(const json& j) {
  TargetSpec t;
  t.id = j.at("id").get<std::string>();
  t.center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
  read_opt(j, "diameter_pt", t.diameter_pt);
  if (j.contains("role")) t.role = target_role_from_string(j.at("role").get<std::string>());
  if (j.contains("orbit") && !j.at("orbit").is_null()) {
    const json& o = j.at("orbit");
    OrbitSpec spec;
    read_opt(o, "radius_pt", spec.radius_pt);
    read_opt(o, "angular_speed_deg_s", spec.angular_speed_deg_s);
    read_opt(o, "initial_phase_deg", spec.initial_phase_deg);
    if (o.contains("direction"))
      spec.direction = orbit_direction_from_string(o.at("direction").get<std::string>());
    t.orbit = spec;
  }
  return t;
}

inline json to_json(const ScreenLayout& l) {
  json targets = json::array();
  for (const auto& t : l.targets) targets.push_back(to_json(t));
  return {{"screen_id", l.screen_id},       {"width_pt", l.width_pt},
          {"height_pt", l.height_pt},       {"edge_buffer_px", l.edge_buffer_px},
          {"scale_factor", l.scale_factor}, {"targets", targets}};
}

inline ScreenLayout layout_from_json(const json& j) {
  ScreenLayout l;
  read_opt(j, "screen_id", l.screen_id);
  read_opt(j, "width_pt", l.width_pt);
  read_opt(j, "height_pt", l.height_pt);
  read_opt(j, "edge_buffer_px", l.edge_buffer_px);
  read_opt(j, "scale_factor", l.scale_factor);
  if (j.contains("targets"))
    for (const auto& t : j.at("targets")) l.targets.push_back(target_from_json(t));
  validate(l);
  return l;
}

// Layout file: one screen plus the engine parameters it runs under.
struct LayoutFile {
  EngineConfig engine;
  ScreenLayout layout;
};

inline json to_json(const LayoutFile& f) {
  return {{"format_version", kFormatVersion}, {"engine", to_json(f.engine)}, {"layout", to_json(f.layout)}};
}

inline LayoutFile layout_file_from_json(const json& j) {
  check_format_version(j, "layout file");
  LayoutFile f;
  if (j.contains("engine")) f.engine = engine_config_from_json(j.at("engine"));
  f.layout = layout_from_json(j.at("layout"));
  return f;
}

// ---- noise profiles / harness config ----

inline json to_json(const NoiseProfile& p) {
  return {{"fixation_jitter_sd_pt", p.fixation_jitter_sd_pt},
          {"pursuit_lag_ms", p.pursuit_lag_ms},
          {"pursuit_noise_sd_pt", p.pursuit_noise_sd_pt},
          {"saccade_duration_ms", p.saccade_duration_ms},
          {"body_sway_amp_pt", p.body_sway_amp_pt},
          {"body_sway_hz", p.body_sway_hz},
          {"drift_sd_pt", p.drift_sd_pt},
          {"drift_tau_ms", p.drift_tau_ms},
          {"rng_seed", p.rng_seed}};
}

inline NoiseProfile noise_profile_from_json(const std::string& name, const json& j) {
  NoiseProfile p;
  p.name = name;
  read_opt(j, "fixation_jitter_sd_pt", p.fixation_jitter_sd_pt);
  read_opt(j, "pursuit_lag_ms", p.pursuit_lag_ms);
  read_opt(j, "pursuit_noise_sd_pt", p.pursuit_noise_sd_pt);
  read_opt(j, "saccade_duration_ms", p.saccade_duration_ms);
  read_opt(j, "body_sway_amp_pt", p.body_sway_amp_pt);
  read_opt(j, "body_sway_hz", p.body_sway_hz);
  read_opt(j, "drift_sd_pt", p.drift_sd_pt);
  read_opt(j, "drift_tau_ms", p.drift_tau_ms);
  read_opt(j, "rng_seed", p.rng_seed);
  validate(p);
  return p;
}

inline json to_json(const PrototypeGeometry& g) {
  return {{"width_pt", g.width_pt},
          {"height_pt", g.height_pt},
          {"edge_buffer_px", g.edge_buffer_px},
          {"scale_factor", g.scale_factor},
          {"target_diameter_pt", g.target_diameter_pt},
          {"orbit_radius_pt", g.orbit_radius_pt},
          {"orbit_speed_deg_s", g.orbit_speed_deg_s},
          {"column_spacing_pt", g.column_spacing_pt},
          {"app_rows_y", g.app_rows_y},
          {"nav_row_y", g.nav_row_y}};
}

inline PrototypeGeometry geometry_from_json(const json& j) {
  PrototypeGeometry g;
  read_opt(j, "width_pt", g.width_pt);
  read_opt(j, "height_pt", g.height_pt);
  read_opt(j, "edge_buffer_px", g.edge_buffer_px);
  read_opt(j, "scale_factor", g.scale_factor);
  read_opt(j, "target_diameter_pt", g.target_diameter_pt);
  read_opt(j, "orbit_radius_pt", g.orbit_radius_pt);
  read_opt(j, "orbit_speed_deg_s", g.orbit_speed_deg_s);
  read_opt(j, "column_spacing_pt", g.column_spacing_pt);
  read_opt(j, "app_rows_y", g.app_rows_y);
  read_opt(j, "nav_row_y", g.nav_row_y);
  return g;
}

// Everything a simulated experiment needs besides the grid and the seed.
struct HarnessConfig {
  EngineConfig engine;
  PrototypeGeometry geometry;
  AgentConfig agent;
  ArbitrationPolicy policy;
  std::map<std::string, NoiseProfile> motor_profiles{{"sitting", sitting_profile()},
                                                     {"walking", walking_profile()}};
  int target_app_slot = 2;

  const NoiseProfile& profile(const std::string& name) const {
    const auto it = motor_profiles.find(name);
    if (it == motor_profiles.end()) throw ConfigError("no motor profile named '" + name + "'");
    return it->second;
  }
};

inline json to_json(const HarnessConfig& c) {
  json profiles = json::object();
  for (const auto& [name, p] : c.motor_profiles) profiles[name] = to_json(p);
  return {{"format_version", kFormatVersion},
          {"engine", to_json(c.engine)},
          {"geometry", to_json(c.geometry)},
          {"agent",
           {{"settle_ms", c.agent.settle_ms},
            {"stroke_lead_ms", c.agent.stroke_lead_ms},
            {"stroke_hold_ms", c.agent.stroke_hold_ms}}},
          {"dwell_precedence",
           c.policy.dwell_precedence == DwellPrecedence::dwell_wins ? "dwell_wins" : "correlation_wins"},
          {"motor_profiles", profiles},
          {"target_app_slot", c.target_app_slot}};
}

inline HarnessConfig harness_config_from_json(const json& j) {
  check_format_version(j, "config file");
  HarnessConfig c;
  if (j.contains("engine")) c.engine = engine_config_from_json(j.at("engine"));
  if (j.contains("geometry")) c.geometry = geometry_from_json(j.at("geometry"));
  c.agent.geometry = c.geometry;
  if (j.contains("agent")) {
    read_opt(j.at("agent"), "settle_ms", c.agent.settle_ms);
    read_opt(j.at("agent"), "stroke_lead_ms", c.agent.stroke_lead_ms);
    read_opt(j.at("agent"), "stroke_hold_ms", c.agent.stroke_hold_ms);
  }
  if (j.contains("dwell_precedence")) {
    const auto s = j.at("dwell_precedence").get<std::string>();
    if (s == "dwell_wins") c.policy.dwell_precedence = DwellPrecedence::dwell_wins;
    else if (s == "correlation_wins") c.policy.dwell_precedence = DwellPrecedence::correlation_wins;
    else throw ConfigError("unknown dwell_precedence '" + s + "'");
  }
  if (j.contains("motor_profiles")) {
    c.motor_profiles.clear();
    for (const auto& [name, p] : j.at("motor_profiles").items())
      c.motor_profiles[name] = noise_profile_from_json(name, p);
  }
  read_opt(j, "target_app_slot", c.target_app_slot);
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

// ---- gaze traces ----

inline constexpr const char* kTraceHeader = "t_ms,x_pt,y_pt,valid";

inline void write_trace(std::ostream& out, std::span<const GazeSample> samples) {
  out << kTraceHeader << '\n';
  char buf[96];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%d\n", static_cast<long long>(s.t_ms), s.x, s.y,
                  s.valid ? 1 : 0);
    out << buf;
  }
}

inline std::vector<GazeSample> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t_ms", 0) != 0)
    throw ConfigError("gaze trace: missing header '" + std::string(kTraceHeader) + "'");
  std::vector<GazeSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    GazeSample s;
    long long t = 0;
    int valid = 1;
    if (std::sscanf(line.c_str(), "%lld,%lf,%lf,%d", &t, &s.x, &s.y, &valid) != 4)
      throw ConfigError("gaze trace line " + std::to_string(lineno) + ": malformed");
    s.t_ms = t;
    s.valid = valid != 0;
    if (!out.empty() && s.t_ms <= out.back().t_ms)
      throw ConfigError("gaze trace line " + std::to_string(lineno) + ": timestamps must increase");
    out.push_back(s);
  }
  return out;
}

// ---- events and trial records ----

inline json to_json(const RecognitionEvent& e) {
  return {{"t_ms", e.t_ms},
          {"technique", to_string(e.technique)},
          {"payload", e.payload},
          {"score", opt_json(e.score)},
          {"role", to_string(e.role)}};
}

inline RecognitionEvent event_from_json(const json& j) {
  RecognitionEvent e;
  e.t_ms = j.at("t_ms").get<TimeMs>();
  e.technique = technique_from_string(j.at("technique").get<std::string>());
  e.payload = j.at("payload").get<std::string>();
  e.score = opt_double(j, "score");
  if (j.contains("role")) e.role = input_role_from_string(j.at("role").get<std::string>());
  return e;
}

// One line of the event log.
inline json event_log_record(const LoggedEvent& e, const std::string& pairing) {
  json j = to_json(e.event);
  j["pairing"] = pairing;
  j["screen_id"] = e.screen_id;
  return j;
}

inline json to_json(const TaskSpec& t) {
  return {{"target_app_slot", t.target_app_slot},
          {"start_track_index", t.start_track_index},
          {"target_track_index", t.target_track_index}};
}

inline TaskSpec task_from_json(const json& j) {
  TaskSpec t;
  read_opt(j, "target_app_slot", t.target_app_slot);
  read_opt(j, "start_track_index", t.start_track_index);
  read_opt(j, "target_track_index", t.target_track_index);
  validate(t);
  return t;
}

inline json to_json(const ActionRecord& r) {
  return {{"t_ms", r.t_ms},
          {"action", to_string(r.action)},
          {"role", to_string(r.role)},
          {"technique", to_string(r.technique)},
          {"target", r.target},
          {"screen", to_string(r.screen)},
          {"correct", r.correct},
          {"event_index", r.event_index}};
}

inline ActionRecord action_record_from_json(const json& j) {
  ActionRecord r;
  r.t_ms = j.at("t_ms").get<TimeMs>();
  r.action = action_from_string(j.at("action").get<std::string>());
  r.role = input_role_from_string(j.at("role").get<std::string>());
  r.technique = technique_from_string(j.at("technique").get<std::string>());
  r.target = j.at("target").get<std::string>();
  r.screen = screen_from_string(j.at("screen").get<std::string>());
  r.correct = j.at("correct").get<bool>();
  r.event_index = j.at("event_index").get<std::size_t>();
  return r;
}

inline json to_json(const TrialResult& r) {
  json recs = json::array();
  for (const auto& a : r.records) recs.push_back(to_json(a));
  return {{"completed", r.completed},
          {"duration_ms", r.duration_ms},
          {"actions", r.actions},
          {"errors", r.errors},
          {"failure_cause", to_string(r.failure_cause)},
          {"step_times_ms", r.step_times_ms},
          {"records", recs}};
}

inline TrialResult trial_result_from_json(const json& j) {
  TrialResult r;
  r.completed = j.at("completed").get<bool>();
  r.duration_ms = j.at("duration_ms").get<TimeMs>();
  r.actions = j.at("actions").get<std::size_t>();
  r.errors = j.at("errors").get<std::size_t>();
  r.failure_cause = failure_cause_from_string(j.at("failure_cause").get<std::string>());
  r.step_times_ms = j.at("step_times_ms").get<std::vector<TimeMs>>();
  for (const auto& a : j.at("records")) r.records.push_back(action_record_from_json(a));
  return r;
}

// ---- report ----

inline json to_json(const Summary& s) {
  return {{"mean", opt_json(s.mean)}, {"sd", opt_json(s.sd)}, {"n", s.n}};
}

inline json to_json(const MetricsReport& r) {
  json rows = json::array();
  for (const auto& c : r.conditions)
    rows.push_back({{"pairing", c.pairing},
                    {"motor_profile", c.motor_profile},
                    {"trials", c.trials},
                    {"completion_rate_percent", c.completion_rate_percent},
                    {"mean_time_ms", opt_json(c.mean_time_ms)},
                    {"sd_time_ms", opt_json(c.sd_time_ms)},
                    {"error_rate_percent", to_json(c.error_rate)},
                    {"false_navigation_percent", to_json(c.false_navigation)},
                    {"false_selection_percent", to_json(c.false_selection)},
                    {"total_actions", c.total_actions},
                    {"total_errors", c.total_errors}});
  return {{"format_version", kFormatVersion}, {"conditions", rows}};
}

namespace detail {
inline std::string cell(const std::optional<double>& v, double scale, int precision) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v * scale);
  return buf;
}
}  // namespace detail

// Aligned plain-text table; undefined values print as "n/a".
inline std::string report_table(const MetricsReport& r) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %-8s %6s %8s %9s %8s %8s %8s %8s\n", "pairing", "profile",
                "trials", "compl%", "time_s", "sd_s", "err%", "fnav%", "fsel%");
  out << buf;
  for (const auto& c : r.conditions) {
    std::snprintf(buf, sizeof buf, "%-18s %-8s %6zu %8.1f %9s %8s %8s %8s %8s\n", c.pairing.c_str(),
                  c.motor_profile.c_str(), c.trials, c.completion_rate_percent,
                  detail::cell(c.mean_time_ms, 1e-3, 2).c_str(),
                  detail::cell(c.sd_time_ms, 1e-3, 2).c_str(),
                  detail::cell(c.error_rate.mean, 1.0, 1).c_str(),
                  detail::cell(c.false_navigation.mean, 1.0, 1).c_str(),
                  detail::cell(c.false_selection.mean, 1.0, 1).c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace gazepair
