#pragma once

// Domain types shared by every recognizer, the arbiter and the task model.
// Geometry is in screen points (pt), origin top-left, x right, y down.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gazepair {

using TimeMs = std::int64_t;
using TargetId = std::string;

inline constexpr double kPi = 3.14159265358979323846;

// Thrown when an operation is called outside its contract (bad arguments,
// missing orbit, stepping an unbuilt arbiter).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Layout / pairing / config combinations that cannot be run.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An event that does not make sense for the current interface state,
// i.e. the arbiter and the interface model disagree about the layout.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct GazeSample {
  TimeMs t_ms = 0;
  double x = 0.0;
  double y = 0.0;
  bool valid = true;

  Point point() const { return {x, y}; }
  friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

enum class OrbitDirection { clockwise, counterclockwise };

struct OrbitSpec {
  double radius_pt = 30.0;
  double angular_speed_deg_s = 120.0;
  double initial_phase_deg = 0.0;
  OrbitDirection direction = OrbitDirection::clockwise;

  friend bool operator==(const OrbitSpec&, const OrbitSpec&) = default;
};

enum class TargetRole { selection, navigation_left, navigation_right, control };

inline bool is_navigation(TargetRole r) {
  return r == TargetRole::navigation_left || r == TargetRole::navigation_right;
}

struct TargetSpec {
  TargetId id;
  Point center;
  double diameter_pt = 65.0;
  TargetRole role = TargetRole::selection;
  std::optional<OrbitSpec> orbit;

  double radius() const { return diameter_pt / 2.0; }
  bool contains(Point p) const { return distance(p, center) <= radius(); }

  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

struct ScreenLayout {
  std::string screen_id;
  double width_pt = 375.0;
  double height_pt = 812.0;
  double edge_buffer_px = 160.0;
  double scale_factor = 3.0;  // px per pt
  std::vector<TargetSpec> targets;

  double edge_buffer_pt() const { return edge_buffer_px / scale_factor; }
  // The strips are open towards the outside: a gaze estimate that overshoots
  // the physical edge still counts as having landed at that edge.
  bool in_left_strip(double x) const { return x <= edge_buffer_pt(); }
  bool in_right_strip(double x) const { return x >= width_pt - edge_buffer_pt(); }

  const TargetSpec* find(std::string_view id) const {
    for (const auto& t : targets)
      if (t.id == id) return &t;
    return nullptr;
  }

  friend bool operator==(const ScreenLayout&, const ScreenLayout&) = default;
};

// Throws ConfigError when ids collide, a diameter is non-positive or a
// target circle pokes out of the screen.
inline void validate(const ScreenLayout& layout) {
  if (layout.width_pt <= 0 || layout.height_pt <= 0 || layout.scale_factor <= 0)
    throw ConfigError("layout '" + layout.screen_id + "': non-positive screen geometry");
  for (std::size_t i = 0; i < layout.targets.size(); ++i) {
    const auto& t = layout.targets[i];
    if (!(t.diameter_pt > 0)) throw ConfigError("target '" + t.id + "': diameter must be > 0");
    const double r = t.radius();
    if (t.center.x - r < 0 || t.center.y - r < 0 || t.center.x + r > layout.width_pt ||
        t.center.y + r > layout.height_pt)
      throw ConfigError("target '" + t.id + "' lies outside the screen");
    for (std::size_t j = 0; j < i; ++j)
      if (layout.targets[j].id == t.id) throw ConfigError("duplicate target id '" + t.id + "'");
  }
}

struct EngineConfig {
  TimeMs dwell_ms = 800;
  std::size_t corr_window_samples = 30;
  double corr_threshold = 0.8;
  TimeMs gesture_ms = 1000;
  double sample_rate_hz = 30.0;
  TimeMs feedback_ms = 1000;
  std::optional<double> proximity_gate_pt;

  double nominal_interval_ms() const { return 1000.0 / sample_rate_hz; }

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

inline void validate(const EngineConfig& c) {
  if (c.dwell_ms <= 0) throw ConfigError("dwell_ms must be > 0");
  if (c.corr_window_samples < 2) throw ConfigError("corr_window_samples must be >= 2");
  if (!(c.corr_threshold > 0.0 && c.corr_threshold <= 1.0))
    throw ConfigError("corr_threshold must lie in (0, 1]");
  if (!(c.sample_rate_hz > 0)) throw ConfigError("sample_rate_hz must be > 0");
  if (c.proximity_gate_pt && !(*c.proximity_gate_pt > 0))
    throw ConfigError("proximity_gate_pt must be > 0 when set");
}

enum class Technique { dwell, pursuits, gestures };
enum class StrokeDirection { left, right };
enum class InputRole { selection, navigation };

struct RecognitionEvent {
  TimeMs t_ms = 0;
  Technique technique = Technique::dwell;
  // Target id for dwell/pursuits, "left"/"right" for gestures.
  std::string payload;
  std::optional<double> score;
  InputRole role = InputRole::selection;

  friend bool operator==(const RecognitionEvent&, const RecognitionEvent&) = default;
};

// ---- names used by the file formats and the wire protocol ----

inline std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::dwell: return "dwell";
    case Technique::pursuits: return "pursuits";
    case Technique::gestures: return "gesture";
  }
  return "?";
}

inline Technique technique_from_string(std::string_view s) {
  if (s == "dwell") return Technique::dwell;
  if (s == "pursuits") return Technique::pursuits;
  if (s == "gesture" || s == "gestures") return Technique::gestures;
  throw UsageError("unknown technique '" + std::string(s) + "'");
}

inline std::string_view to_string(StrokeDirection d) {
  return d == StrokeDirection::left ? "left" : "right";
}

inline std::string_view to_string(InputRole r) {
  return r == InputRole::selection ? "selection" : "navigation";
}

inline InputRole input_role_from_string(std::string_view s) {
  if (s == "selection") return InputRole::selection;
  if (s == "navigation") return InputRole::navigation;
  throw UsageError("unknown input role '" + std::string(s) + "'");
}

inline std::string_view to_string(TargetRole r) {
  switch (r) {
    case TargetRole::selection: return "selection";
    case TargetRole::navigation_left: return "navigation-left";
    case TargetRole::navigation_right: return "navigation-right";
    case TargetRole::control: return "control";
  }
  return "?";
}

inline TargetRole target_role_from_string(std::string_view s) {
  if (s == "selection") return TargetRole::selection;
  if (s == "navigation-left") return TargetRole::navigation_left;
  if (s == "navigation-right") return TargetRole::navigation_right;
  if (s == "control") return TargetRole::control;
  throw UsageError("unknown target role '" + std::string(s) + "'");
}

inline std::string_view to_string(OrbitDirection d) {
  return d == OrbitDirection::clockwise ? "clockwise" : "counterclockwise";
}

inline OrbitDirection orbit_direction_from_string(std::string_view s) {
  if (s == "clockwise" || s == "cw") return OrbitDirection::clockwise;
  if (s == "counterclockwise" || s == "ccw") return OrbitDirection::counterclockwise;
  throw UsageError("unknown orbit direction '" + std::string(s) + "'");
}

}  // namespace gazepair
