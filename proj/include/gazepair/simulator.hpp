#pragma once

// Synthetic 30 Hz gaze streams from a scripted user.
//
// The oculomotor model is deliberately simple: Gaussian jitter around a
// fixated point, a lagged and noisy copy of an orbit while pursuing, a
// minimum-jerk horizontal sweep for strokes. On top of every intent sits a
// slow tracker drift (Ornstein-Uhlenbeck, per axis) and, while walking, an
// additive sinusoidal body sway. Every knob lives in NoiseProfile /
// AgentConfig.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gazepair/arbiter.hpp"
#include "gazepair/interface_model.hpp"
#include "gazepair/orbit.hpp"
#include "gazepair/types.hpp"

namespace gazepair {

struct NoiseProfile {
  std::string name = "sitting";
  double fixation_jitter_sd_pt = 0.0;
  double pursuit_lag_ms = 0.0;
  double pursuit_noise_sd_pt = 0.0;
  double saccade_duration_ms = 600.0;
  double body_sway_amp_pt = 0.0;
  double body_sway_hz = 0.0;
  double drift_sd_pt = 0.0;      // stationary sd of the slow drift, per axis
  double drift_tau_ms = 500.0;   // drift correlation time
  std::uint64_t rng_seed = 0;

  friend bool operator==(const NoiseProfile&, const NoiseProfile&) = default;
};

// Screen points per degree of visual angle for the prototype: a 65 pt target
// subtends 2.09 deg at the 29.6 cm viewing distance.
inline constexpr double kPtPerDegree = 65.0 / 2.09;
// Tracker accuracy the sitting profile is calibrated against.
inline constexpr double kTrackerAccuracyDeg = 1.6;

inline NoiseProfile zero_noise_profile() {
  NoiseProfile p;
  p.name = "zero";
  return p;
}

// Isotropic per-axis sd whose mean radial error is 1.6 deg: for a 2-D
// Gaussian, E|e| = sd * sqrt(pi/2).
inline double calibrated_error_sd_pt() {
  return kTrackerAccuracyDeg * kPtPerDegree / std::sqrt(kPi / 2.0);
}

inline constexpr double kSittingDriftSdPt = 15.0;

// White jitter that, together with the drift, gives the calibrated total.
inline double calibrated_jitter_sd_pt() {
  const double total = calibrated_error_sd_pt();
  return std::sqrt(total * total - kSittingDriftSdPt * kSittingDriftSdPt);
}

inline NoiseProfile sitting_profile() {
  NoiseProfile p;
  p.name = "sitting";
  p.fixation_jitter_sd_pt = calibrated_jitter_sd_pt();
  p.drift_sd_pt = kSittingDriftSdPt;
  p.drift_tau_ms = 500.0;
  p.pursuit_lag_ms = 30.0;
  p.pursuit_noise_sd_pt = 3.0;
  p.saccade_duration_ms = 600.0;
  return p;
}

inline NoiseProfile walking_profile() {
  NoiseProfile p = sitting_profile();
  p.name = "walking";
  p.fixation_jitter_sd_pt *= 1.5;
  p.drift_sd_pt *= 1.5;
  p.pursuit_noise_sd_pt *= 1.5;
  p.pursuit_lag_ms = 60.0;
  p.body_sway_amp_pt = 12.0;
  p.body_sway_hz = 1.8;
  return p;
}

inline NoiseProfile profile_by_name(std::string_view name) {
  if (name == "sitting") return sitting_profile();
  if (name == "walking") return walking_profile();
  if (name == "zero") return zero_noise_profile();
  throw ConfigError("unknown motor profile '" + std::string(name) + "'");
}

inline void validate(const NoiseProfile& p) {
  if (p.fixation_jitter_sd_pt < 0 || p.pursuit_noise_sd_pt < 0 || p.body_sway_amp_pt < 0 ||
      p.body_sway_hz < 0 || p.pursuit_lag_ms < 0)
    throw ConfigError("noise profile '" + p.name + "': negative parameter");
  if (p.drift_sd_pt < 0 || !(p.drift_tau_ms > 0))
    throw ConfigError("noise profile '" + p.name + "': bad drift parameters");
  if (!(p.saccade_duration_ms > 0))
    throw ConfigError("noise profile '" + p.name + "': saccade_duration_ms must be > 0");
}

// Sample timestamps at the nominal rate: sample k is at round(k * 1000 / rate).
class SampleClock {
 public:
  explicit SampleClock(double rate_hz = 30.0, std::int64_t first_index = 0)
      : rate_hz_(rate_hz), index_(first_index) {}

  TimeMs at(std::int64_t k) const { return std::llround(static_cast<double>(k) * 1000.0 / rate_hz_); }
  TimeMs now() const { return at(index_); }
  std::int64_t index() const { return index_; }
  void advance() { ++index_; }
  double rate_hz() const { return rate_hz_; }

 private:
  double rate_hz_;
  std::int64_t index_;
};

// Noise source for one simulated eye. Deterministic given the seed.
class GazeNoise {
 public:
  explicit GazeNoise(const NoiseProfile& profile) : profile_(profile), rng_(profile.rng_seed) {}

  Point sway(TimeMs t) const {
    if (profile_.body_sway_amp_pt == 0.0) return {};
    const double w = 2.0 * kPi * profile_.body_sway_hz * static_cast<double>(t) / 1000.0;
    // Lateral sway at stride frequency, vertical bob at twice that.
    return {profile_.body_sway_amp_pt * std::sin(w), profile_.body_sway_amp_pt * std::sin(2.0 * w)};
  }

  Point gaussian(double sd) {
    if (sd == 0.0) return {};
    std::normal_distribution<double> n(0.0, sd);
    const double dx = n(rng_);
    const double dy = n(rng_);
    return {dx, dy};
  }

  // Drift at time t; advances the process from the previous call.
  Point drift(TimeMs t) {
    if (profile_.drift_sd_pt == 0.0) return {};
    if (!drift_t_) {
      drift_ = gaussian(profile_.drift_sd_pt);
    } else if (t > *drift_t_) {
      const double a = std::exp(-static_cast<double>(t - *drift_t_) / profile_.drift_tau_ms);
      const Point e = gaussian(profile_.drift_sd_pt * std::sqrt(1.0 - a * a));
      drift_ = {a * drift_.x + e.x, a * drift_.y + e.y};
    }
    drift_t_ = t;
    return drift_;
  }

  GazeSample observe(Point intended, double sd, TimeMs t) {
    const Point j = gaussian(sd);
    const Point d = drift(t);
    const Point s = sway(t);
    return {t, intended.x + j.x + d.x + s.x, intended.y + j.y + d.y + s.y, true};
  }

  const NoiseProfile& profile() const { return profile_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  NoiseProfile profile_;
  std::mt19937_64 rng_;
  Point drift_;
  std::optional<TimeMs> drift_t_;
};

// Normalised minimum-jerk position profile, 0 at tau=0 and 1 at tau=1.
inline double minimum_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

// Horizontal extent of a stroke: from inside the opposite third of the
// screen to the middle of the destination edge strip.
struct StrokePath {
  double from_x = 0.0;
  double to_x = 0.0;
  double y = 0.0;
};

inline StrokePath stroke_path(StrokeDirection dir, const ScreenLayout& layout, double y) {
  const double third_inset = layout.width_pt / 4.0;
  const double strip_mid = layout.edge_buffer_pt() / 2.0;
  if (dir == StrokeDirection::right) return {third_inset, layout.width_pt - strip_mid, y};
  return {layout.width_pt - third_inset, strip_mid, y};
}

// ---- standalone trace generators ----

inline std::vector<GazeSample> gen_fixation(Point point, TimeMs duration_ms, GazeNoise& noise,
                                            SampleClock& clock) {
  if (duration_ms <= 0) throw UsageError("gen_fixation: duration must be > 0");
  std::vector<GazeSample> out;
  const TimeMs end = clock.now() + duration_ms;
  for (; clock.now() < end; clock.advance())
    out.push_back(noise.observe(point, noise.profile().fixation_jitter_sd_pt, clock.now()));
  return out;
}

inline std::vector<GazeSample> gen_fixation(Point point, TimeMs duration_ms,
                                            const NoiseProfile& profile) {
  GazeNoise noise(profile);
  SampleClock clock;
  return gen_fixation(point, duration_ms, noise, clock);
}

inline Point pursuit_intent(const TargetSpec& target, TimeMs t, double lag_ms) {
  return orbit_position(target, t - std::llround(lag_ms));
}

inline std::vector<GazeSample> gen_pursuit(const TargetSpec& target, TimeMs duration_ms,
                                           GazeNoise& noise, SampleClock& clock) {
  if (!target.orbit) throw UsageError("gen_pursuit: target '" + target.id + "' has no orbit");
  if (duration_ms <= 0) throw UsageError("gen_pursuit: duration must be > 0");
  std::vector<GazeSample> out;
  const TimeMs end = clock.now() + duration_ms;
  for (; clock.now() < end; clock.advance()) {
    const TimeMs t = clock.now();
    out.push_back(noise.observe(pursuit_intent(target, t, noise.profile().pursuit_lag_ms),
                                noise.profile().pursuit_noise_sd_pt, t));
  }
  return out;
}

inline std::vector<GazeSample> gen_pursuit(const TargetSpec& target, TimeMs duration_ms,
                                           const NoiseProfile& profile) {
  GazeNoise noise(profile);
  SampleClock clock;
  return gen_pursuit(target, duration_ms, noise, clock);
}

// The sweep alone: `samples` samples whose first sits on path.from_x and last
// on path.to_x, minimum-jerk in between.
inline std::vector<GazeSample> gen_sweep(const StrokePath& path, std::size_t samples,
                                         GazeNoise& noise, SampleClock& clock) {
  if (samples < 2) throw UsageError("gen_sweep: need at least two samples");
  std::vector<GazeSample> out;
  for (std::size_t k = 0; k < samples; ++k, clock.advance()) {
    const double tau = static_cast<double>(k) / static_cast<double>(samples - 1);
    const Point p{std::lerp(path.from_x, path.to_x, minimum_jerk(tau)), path.y};
    out.push_back(noise.observe(p, noise.profile().fixation_jitter_sd_pt, clock.now()));
  }
  return out;
}

// A stroke that fills one gesture window: the sweep spans exactly
// gesture_ms worth of samples (the recognizer's window length).
inline std::vector<GazeSample> gen_stroke(StrokeDirection dir, const ScreenLayout& layout,
                                          const EngineConfig& config, GazeNoise& noise,
                                          SampleClock& clock) {
  const auto samples = static_cast<std::size_t>(
      std::llround(static_cast<double>(config.gesture_ms) * config.sample_rate_hz / 1000.0));
  return gen_sweep(stroke_path(dir, layout, layout.height_pt / 2.0), samples, noise, clock);
}

inline std::vector<GazeSample> gen_stroke(StrokeDirection dir, const ScreenLayout& layout,
                                          const NoiseProfile& profile,
                                          const EngineConfig& config = {}) {
  GazeNoise noise(profile);
  SampleClock clock(config.sample_rate_hz);
  return gen_stroke(dir, layout, config, noise, clock);
}

// ---- closed-loop agent ----

struct AgentConfig {
  TimeMs settle_ms = 200;       // rest at the neutral point after every event
  TimeMs stroke_lead_ms = 300;  // fixation on the stroke's start before sweeping
  TimeMs stroke_hold_ms = 700;  // hold in the strip before trying again
  PrototypeGeometry geometry;

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

// What the simulated user is trying to do right now.
struct Intent {
  enum class Kind { settle, fixate, pursue, stroke };
  Kind kind = Kind::settle;
  Point point;          // settle / fixate
  TargetId target;      // fixate / pursue
  StrokeDirection direction = StrokeDirection::right;
  TimeMs started_ms = 0;
};

// Executes the unique optimal action sequence of a task, re-planning from the
// observed interface state after every event.
class Agent {
 public:
  Agent(Pairing pairing, const NoiseProfile& profile, AgentConfig config, EngineConfig engine)
      : pairing_(pairing), noise_(profile), config_(config), engine_(engine) {}

  // Start (or restart) planning at time t from the observed state.
  void plan(const InterfaceState& state, const TaskSpec& task, const ScreenLayout& layout, TimeMs t,
            bool settle_first) {
    layout_ = layout;
    next_ = intent_for(state, task, t);
    if (settle_first && config_.settle_ms > 0) {
      current_ = Intent{Intent::Kind::settle, config_.geometry.neutral_point(), {}, {}, t};
      settle_until_ = t + config_.settle_ms;
    } else {
      current_ = next_;
    }
  }

  GazeSample sample(TimeMs t) {
    if (current_.kind == Intent::Kind::settle && t >= settle_until_) {
      current_ = next_;
      current_.started_ms = t;
    }
    const NoiseProfile& p = noise_.profile();
    switch (current_.kind) {
      case Intent::Kind::settle:
      case Intent::Kind::fixate:
        return noise_.observe(current_.point, p.fixation_jitter_sd_pt, t);
      case Intent::Kind::pursue:
        return noise_.observe(pursuit_intent(*layout_.find(current_.target), t, p.pursuit_lag_ms),
                              p.pursuit_noise_sd_pt, t);
      case Intent::Kind::stroke:
        return noise_.observe(stroke_point(t), p.fixation_jitter_sd_pt, t);
    }
    return {};
  }

  const Intent& current() const { return current_; }

 private:
  Intent intent_for(const InterfaceState& state, const TaskSpec& task, TimeMs t) const {
    const auto step = optimal_next(state, task);
    if (!step) return Intent{Intent::Kind::settle, config_.geometry.neutral_point(), {}, {}, t};
    const InputRole role = role_of(step->action);
    const Technique tech = role == InputRole::selection ? pairing_.selection() : pairing_.navigation();
    const bool right = step->action == Action::navigate_right;

    if (tech == Technique::gestures) {
      Intent i{Intent::Kind::stroke, {}, {}, right ? StrokeDirection::right : StrokeDirection::left, t};
      return i;
    }
    TargetId id;
    switch (step->action) {
      case Action::select_app: id = app_id(state.screen, step->app_slot); break;
      case Action::play: id = kPlayId; break;
      case Action::navigate_right: id = state.screen == Screen::player ? kNextId : kNavRightId; break;
      case Action::navigate_left: id = state.screen == Screen::player ? kPrevId : kNavLeftId; break;
    }
    const TargetSpec* target = layout_.find(id);
    if (!target) throw ConfigError("agent: target '" + id + "' missing from screen");
    if (tech == Technique::pursuits) return Intent{Intent::Kind::pursue, {}, id, {}, t};
    return Intent{Intent::Kind::fixate, target->center, id, {}, t};
  }

  // Lead fixation on the start, sweep, hold in the strip; repeats.
  Point stroke_point(TimeMs t) const {
    const StrokePath path = stroke_path(current_.direction, layout_, config_.geometry.neutral_point().y);
    const double sweep = noise_.profile().saccade_duration_ms;
    const double cycle = static_cast<double>(config_.stroke_lead_ms) + sweep +
                         static_cast<double>(config_.stroke_hold_ms);
    const double phase = std::fmod(static_cast<double>(t - current_.started_ms), cycle);
    const double into_sweep = phase - static_cast<double>(config_.stroke_lead_ms);
    const double frac = into_sweep <= 0 ? 0.0 : minimum_jerk(into_sweep / sweep);
    return {path.from_x + (path.to_x - path.from_x) * frac, path.y};
  }

  Pairing pairing_;
  GazeNoise noise_;
  AgentConfig config_;
  EngineConfig engine_;
  ScreenLayout layout_;
  Intent current_;
  Intent next_;
  TimeMs settle_until_ = 0;
};

struct LoggedEvent {
  RecognitionEvent event;
  std::string screen_id;
  friend bool operator==(const LoggedEvent&, const LoggedEvent&) = default;
};

struct TrialLogs {
  std::vector<GazeSample> samples;
  std::vector<LoggedEvent> events;
  TrialResult result;
  friend bool operator==(const TrialLogs&, const TrialLogs&) = default;
};

// One closed-loop trial: the agent looks, the arbiter recognises, the
// interface model advances, until completion or a timeout.
inline TrialLogs run_trial(const Pairing& pairing, const TaskSpec& task, const NoiseProfile& profile,
                           const EngineConfig& config, const ScreenSet& screens,
                           const AgentConfig& agent_config = {},
                           const ArbitrationPolicy& policy = {}) {
  validate(config);
  validate(profile);
  TrialSession session(task, screens, 0, config.feedback_ms);
  Arbiter arbiter = build_arbiter(pairing, config, session.current_layout(), policy);
  Agent agent(pairing, profile, agent_config, config);
  agent.plan(session.state(), task, session.current_layout(), 0, false);

  TrialLogs logs;
  SampleClock clock(config.sample_rate_hz);
  for (;; clock.advance()) {
    const TimeMs t = clock.now();
    if (session.tick(t)) break;
    const GazeSample s = agent.sample(t);
    logs.samples.push_back(s);
    const auto ev = arbiter.step(s);
    if (!ev) continue;

    logs.events.push_back({*ev, session.current_layout().screen_id});
    const Screen before = session.state().screen;
    session.on_event(*ev, logs.events.size() - 1);
    if (session.finished()) break;
    if (session.state().screen != before) arbiter.rebind(session.current_layout());
    agent.plan(session.state(), task, session.current_layout(), t, true);
  }
  logs.result = session.result();
  return logs;
}

}  // namespace gazepair
