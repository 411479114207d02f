#pragma once

// The study prototype as a deterministic state machine: two home-screen
// pages with six apps each, and a music player over a linear list of tracks.
// Recognition events become actions; each action is labelled correct iff it
// is the unique next step of the optimal plan for the task.

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gazepair/arbiter.hpp"
#include "gazepair/types.hpp"

namespace gazepair {

inline constexpr int kTrackCount = 30;
inline constexpr int kAppsPerPage = 6;
inline constexpr TimeMs kTaskTimeoutMs = 60000;
inline constexpr TimeMs kStepTimeoutMs = 20000;
inline constexpr TimeMs kAlertMs = 1000;

enum class Screen { home1, home2, player };

inline std::string_view to_string(Screen s) {
  switch (s) {
    case Screen::home1: return "home1";
    case Screen::home2: return "home2";
    case Screen::player: return "player";
  }
  return "?";
}

inline Screen screen_from_string(std::string_view s) {
  if (s == "home1") return Screen::home1;
  if (s == "home2") return Screen::home2;
  if (s == "player") return Screen::player;
  throw UsageError("unknown screen '" + std::string(s) + "'");
}

// Geometry of the prototype screens (iPhone X portrait, pt).
struct PrototypeGeometry {
  double width_pt = 375.0;
  double height_pt = 812.0;
  double edge_buffer_px = 160.0;
  double scale_factor = 3.0;
  double target_diameter_pt = 65.0;
  double orbit_radius_pt = 30.0;
  double orbit_speed_deg_s = 120.0;
  double column_spacing_pt = 80.0;
  std::array<double, 2> app_rows_y{250.0, 350.0};
  double nav_row_y = 560.0;

  // Free of every target; the simulated user rests here between actions.
  Point neutral_point() const { return {width_pt / 2.0, (app_rows_y[1] + nav_row_y) / 2.0}; }
  friend bool operator==(const PrototypeGeometry&, const PrototypeGeometry&) = default;
};

inline std::string app_id(Screen page, int slot) {
  return std::string(page == Screen::home1 ? "p1_app" : "p2_app") + std::to_string(slot);
}
inline constexpr const char* kNavLeftId = "nav_left";
inline constexpr const char* kNavRightId = "nav_right";
inline constexpr const char* kPrevId = "prev";
inline constexpr const char* kPlayId = "play";
inline constexpr const char* kNextId = "next";

// One layout per screen, with orbits attached to exactly the targets bound
// to Pursuits under `pairing`. Orbiting targets start evenly spread in phase
// and alternate direction.
struct ScreenSet {
  ScreenLayout home1, home2, player;

  const ScreenLayout& get(Screen s) const {
    switch (s) {
      case Screen::home1: return home1;
      case Screen::home2: return home2;
      case Screen::player: return player;
    }
    return home1;
  }
};

namespace detail {

inline void attach_orbits(ScreenLayout& layout, const Pairing& pairing, const PrototypeGeometry& g) {
  std::vector<TargetSpec*> orbiting;
  for (auto& t : layout.targets) {
    const Technique tech = t.role == TargetRole::selection ? pairing.selection()
                           : is_navigation(t.role)         ? pairing.navigation()
                                                           : Technique::dwell;
    t.orbit.reset();
    if (tech == Technique::pursuits) orbiting.push_back(&t);
  }
  for (std::size_t k = 0; k < orbiting.size(); ++k) {
    OrbitSpec o;
    o.radius_pt = g.orbit_radius_pt;
    o.angular_speed_deg_s = g.orbit_speed_deg_s;
    o.initial_phase_deg = 360.0 * static_cast<double>(k) / static_cast<double>(orbiting.size());
    o.direction = k % 2 == 0 ? OrbitDirection::clockwise : OrbitDirection::counterclockwise;
    orbiting[k]->orbit = o;
  }
}

inline ScreenLayout blank_layout(Screen s, const PrototypeGeometry& g) {
  ScreenLayout l;
  l.screen_id = std::string(to_string(s));
  l.width_pt = g.width_pt;
  l.height_pt = g.height_pt;
  l.edge_buffer_px = g.edge_buffer_px;
  l.scale_factor = g.scale_factor;
  return l;
}

}  // namespace detail

inline ScreenSet prototype_screens(const Pairing& pairing, const PrototypeGeometry& g = {}) {
  const double cx = g.width_pt / 2.0;
  const std::array<double, 3> cols{cx - g.column_spacing_pt, cx, cx + g.column_spacing_pt};
  const auto target = [&](std::string id, double x, double y, TargetRole role) {
    return TargetSpec{std::move(id), {x, y}, g.target_diameter_pt, role, std::nullopt};
  };

  ScreenSet set;
  for (Screen page : {Screen::home1, Screen::home2}) {
    ScreenLayout l = detail::blank_layout(page, g);
    for (int slot = 0; slot < kAppsPerPage; ++slot)
      l.targets.push_back(target(app_id(page, slot), cols[slot % 3], g.app_rows_y[slot / 3],
                                 TargetRole::selection));
    l.targets.push_back(target(kNavLeftId, cols[0], g.nav_row_y, TargetRole::navigation_left));
    l.targets.push_back(target(kNavRightId, cols[2], g.nav_row_y, TargetRole::navigation_right));
    detail::attach_orbits(l, pairing, g);
    (page == Screen::home1 ? set.home1 : set.home2) = std::move(l);
  }
  ScreenLayout p = detail::blank_layout(Screen::player, g);
  p.targets.push_back(target(kPrevId, cols[0], g.nav_row_y, TargetRole::navigation_left));
  p.targets.push_back(target(kPlayId, cols[1], g.nav_row_y, TargetRole::selection));
  p.targets.push_back(target(kNextId, cols[2], g.nav_row_y, TargetRole::navigation_right));
  detail::attach_orbits(p, pairing, g);
  set.player = std::move(p);
  return set;
}

struct TaskSpec {
  int target_app_slot = 2;  // on the second home page
  int start_track_index = 0;
  int target_track_index = 4;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

inline constexpr int kTrackSteps = 4;

inline void validate(const TaskSpec& task) {
  if (task.target_app_slot < 0 || task.target_app_slot >= kAppsPerPage)
    throw ConfigError("task: app slot out of range");
  const auto in_range = [](int i) { return i >= 0 && i < kTrackCount; };
  if (!in_range(task.start_track_index) || !in_range(task.target_track_index))
    throw ConfigError("task: track index out of range");
  if (std::abs(task.target_track_index - task.start_track_index) != kTrackSteps)
    throw ConfigError("task: target must be exactly four tracks from the start");
}

struct Feedback {
  TargetId target;
  TimeMs expiry_ms = 0;
  friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct InterfaceState {
  Screen screen = Screen::home1;
  int track_index = 0;  // meaningful on the player only
  bool playing = false;
  bool completed = false;
  std::optional<Feedback> feedback;
  std::optional<TimeMs> alert_expiry_ms;

  // Drops feedback/alert whose time has passed.
  void expire(TimeMs now) {
    if (feedback && feedback->expiry_ms < now) feedback.reset();
    if (alert_expiry_ms && *alert_expiry_ms < now) alert_expiry_ms.reset();
  }

  friend bool operator==(const InterfaceState&, const InterfaceState&) = default;
};

enum class Action { navigate_left, navigate_right, select_app, play };

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::navigate_left: return "navigate_left";
    case Action::navigate_right: return "navigate_right";
    case Action::select_app: return "select_app";
    case Action::play: return "play";
  }
  return "?";
}

inline Action action_from_string(std::string_view s) {
  if (s == "navigate_left") return Action::navigate_left;
  if (s == "navigate_right") return Action::navigate_right;
  if (s == "select_app") return Action::select_app;
  if (s == "play") return Action::play;
  throw UsageError("unknown action '" + std::string(s) + "'");
}

inline InputRole role_of(Action a) {
  return a == Action::navigate_left || a == Action::navigate_right ? InputRole::navigation
                                                                   : InputRole::selection;
}

// A concrete user action: kind plus the app slot for select_app.
struct PlannedAction {
  Action action = Action::navigate_right;
  int app_slot = -1;
  friend bool operator==(const PlannedAction&, const PlannedAction&) = default;
};

struct ActionRecord {
  TimeMs t_ms = 0;
  Action action = Action::navigate_right;
  InputRole role = InputRole::navigation;
  Technique technique = Technique::dwell;
  TargetId target;         // activated target, or "left"/"right" for gestures
  Screen screen = Screen::home1;  // screen the action was taken on
  bool correct = false;
  std::size_t event_index = 0;  // position in the trial's event log

  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

// The unique correct next action, or nullopt once the task is complete.
inline std::optional<PlannedAction> optimal_next(const InterfaceState& s, const TaskSpec& task) {
  if (s.completed) return std::nullopt;
  switch (s.screen) {
    case Screen::home1: return PlannedAction{Action::navigate_right};
    case Screen::home2: return PlannedAction{Action::select_app, task.target_app_slot};
    case Screen::player:
      if (s.track_index < task.target_track_index) return PlannedAction{Action::navigate_right};
      if (s.track_index > task.target_track_index) return PlannedAction{Action::navigate_left};
      return PlannedAction{Action::play};
  }
  return std::nullopt;
}

// State transition for an action, without bookkeeping.
inline InterfaceState transition(InterfaceState s, const PlannedAction& a, const TaskSpec& task) {
  switch (s.screen) {
    case Screen::home1:
      if (a.action == Action::navigate_right) s.screen = Screen::home2;
      break;
    case Screen::home2:
      if (a.action == Action::navigate_left) {
        s.screen = Screen::home1;
      } else if (a.action == Action::select_app && a.app_slot == task.target_app_slot) {
        s.screen = Screen::player;
        s.track_index = task.start_track_index;
        s.playing = false;
      }
      break;
    case Screen::player:
      if (a.action == Action::navigate_right || a.action == Action::navigate_left) {
        const int d = a.action == Action::navigate_right ? 1 : -1;
        s.track_index = std::clamp(s.track_index + d, 0, kTrackCount - 1);
        s.playing = false;
      } else if (a.action == Action::play) {
        if (s.track_index == task.target_track_index) {
          s.playing = true;
          s.completed = true;
        } else {
          s.playing = !s.playing;
        }
      }
      break;
  }
  return s;
}

// Maps an event onto the action it performs on the current screen.
// Throws ProtocolError when the event names a target the screen lacks or
// one that is not interactive.
inline std::pair<PlannedAction, TargetId> resolve_event(const InterfaceState& s,
                                                        const RecognitionEvent& ev,
                                                        const ScreenSet& screens) {
  const ScreenLayout& layout = screens.get(s.screen);
  if (ev.technique == Technique::gestures) {
    const bool right = ev.payload == "right";
    if (!right && ev.payload != "left")
      throw ProtocolError("gesture event with payload '" + ev.payload + "'");
    const TargetRole role = right ? TargetRole::navigation_right : TargetRole::navigation_left;
    TargetId button;
    for (const auto& t : layout.targets)
      if (t.role == role) button = t.id;
    return {{right ? Action::navigate_right : Action::navigate_left}, button};
  }
  const TargetSpec* t = layout.find(ev.payload);
  if (!t)
    throw ProtocolError("event target '" + ev.payload + "' is not on screen '" +
                        layout.screen_id + "'");
  switch (t->role) {
    case TargetRole::navigation_left: return {{Action::navigate_left}, t->id};
    case TargetRole::navigation_right: return {{Action::navigate_right}, t->id};
    case TargetRole::selection:
      if (s.screen == Screen::player) return {{Action::play}, t->id};
      for (int slot = 0; slot < kAppsPerPage; ++slot)
        if (app_id(s.screen, slot) == t->id) return {{Action::select_app, slot}, t->id};
      throw ProtocolError("selection target '" + t->id + "' is not an app slot");
    case TargetRole::control: break;
  }
  throw ProtocolError("target '" + t->id + "' is not interactive");
}

inline std::pair<InterfaceState, ActionRecord> apply_event(const InterfaceState& state,
                                                           const RecognitionEvent& ev,
                                                           const TaskSpec& task, TimeMs now,
                                                           const ScreenSet& screens,
                                                           TimeMs feedback_ms = 1000) {
  const auto [action, target] = resolve_event(state, ev, screens);
  const auto expected = optimal_next(state, task);

  ActionRecord rec;
  rec.t_ms = now;
  rec.action = action.action;
  rec.role = role_of(action.action);
  rec.technique = ev.technique;
  rec.target = ev.technique == Technique::gestures ? ev.payload : target;
  rec.screen = state.screen;
  rec.correct = expected && *expected == action;

  InterfaceState next = transition(state, action, task);
  next.expire(now);
  if (!target.empty()) next.feedback = Feedback{target, now + feedback_ms};
  if (action.action == Action::select_app && !rec.correct) next.alert_expiry_ms = now + kAlertMs;
  return {next, rec};
}

enum class FailureCause { none, task_timeout_60s, step_timeout_20s };

inline std::string_view to_string(FailureCause c) {
  switch (c) {
    case FailureCause::none: return "none";
    case FailureCause::task_timeout_60s: return "task_timeout_60s";
    case FailureCause::step_timeout_20s: return "step_timeout_20s";
  }
  return "?";
}

inline FailureCause failure_cause_from_string(std::string_view s) {
  if (s == "none") return FailureCause::none;
  if (s == "task_timeout_60s") return FailureCause::task_timeout_60s;
  if (s == "step_timeout_20s") return FailureCause::step_timeout_20s;
  throw UsageError("unknown failure cause '" + std::string(s) + "'");
}

inline std::optional<FailureCause> check_timeouts(const InterfaceState& state, TimeMs trial_start,
                                                  TimeMs last_correct_action, TimeMs now) {
  if (now < trial_start) throw UsageError("check_timeouts: now precedes the trial start");
  if (state.completed) return std::nullopt;
  if (now - trial_start > kTaskTimeoutMs) return FailureCause::task_timeout_60s;
  if (now - last_correct_action > kStepTimeoutMs) return FailureCause::step_timeout_20s;
  return std::nullopt;
}

struct TrialResult {
  bool completed = false;
  TimeMs duration_ms = 0;  // to correct playback, or to the failure
  std::size_t actions = 0;
  std::size_t errors = 0;
  FailureCause failure_cause = FailureCause::none;
  std::vector<TimeMs> step_times_ms;  // timestamps of the correct actions
  std::vector<ActionRecord> records;

  std::size_t correct_actions() const { return actions - errors; }
  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

// Drives the state machine through one trial: feeds events, tracks the
// action ledger and checks timeouts. The clock is always passed in.
class TrialSession {
 public:
  TrialSession(TaskSpec task, ScreenSet screens, TimeMs trial_start, TimeMs feedback_ms = 1000)
      : task_(task),
        screens_(std::move(screens)),
        start_(trial_start),
        last_correct_(trial_start),
        feedback_ms_(feedback_ms) {
    validate(task_);
  }

  const ActionRecord& on_event(const RecognitionEvent& ev, std::size_t event_index) {
    if (finished()) throw UsageError("trial already finished");
    auto [next, rec] = apply_event(state_, ev, task_, ev.t_ms, screens_, feedback_ms_);
    rec.event_index = event_index;
    state_ = next;
    result_.records.push_back(rec);
    ++result_.actions;
    if (rec.correct) {
      last_correct_ = ev.t_ms;
      result_.step_times_ms.push_back(ev.t_ms);
    } else {
      ++result_.errors;
    }
    if (state_.completed) {
      result_.completed = true;
      result_.duration_ms = ev.t_ms - start_;
      result_.failure_cause = FailureCause::none;
    }
    return result_.records.back();
  }

  // Returns true when the trial has just failed on a timeout.
  bool tick(TimeMs now) {
    state_.expire(now);
    if (finished()) return false;
    if (const auto cause = check_timeouts(state_, start_, last_correct_, now)) {
      failed_ = true;
      result_.failure_cause = *cause;
      result_.duration_ms = now - start_;
      return true;
    }
    return false;
  }

  bool finished() const { return result_.completed || failed_; }
  const InterfaceState& state() const { return state_; }
  const TaskSpec& task() const { return task_; }
  const ScreenSet& screens() const { return screens_; }
  const ScreenLayout& current_layout() const { return screens_.get(state_.screen); }
  const TrialResult& result() const { return result_; }
  TimeMs start() const { return start_; }

 private:
  TaskSpec task_;
  ScreenSet screens_;
  TimeMs start_;
  TimeMs last_correct_;
  TimeMs feedback_ms_;
  InterfaceState state_;
  TrialResult result_;
  bool failed_ = false;
};

}  // namespace gazepair
