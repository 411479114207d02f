#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gazepair/correlation.hpp"
#include "gazepair/orbit.hpp"
#include "gazepair/types.hpp"

namespace gazepair {

// Per-target score of one Pursuits step. nullopt = no correlation.
struct PursuitScore {
  TargetId id;
  std::optional<double> score;
  bool gated = false;  // excluded by the proximity gate this step
};

// True when `a` should win over `b`. No-correlation ranks below any real
// score; equal scores go to the lexicographically smaller id.
inline bool better_pursuit(const PursuitScore& a, const PursuitScore& b) {
  if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
  if (a.score && *a.score != *b.score) return *a.score > *b.score;
  return a.id < b.id;
}

// Pursuits selection: each target's orbit trajectory is correlated with the
// gaze over a rolling window, per axis; the target score is the lower of the
// two axis correlations.
class PursuitsRecognizer {
 public:
  explicit PursuitsRecognizer(EngineConfig config = {}) : config_(config) {}

  std::optional<RecognitionEvent> step(const GazeSample& s, std::span<const TargetSpec> targets) {
    for (const auto& t : targets)
      if (!t.orbit) throw UsageError("pursuits: target '" + t.id + "' has no orbit");
    if (!s.valid) return std::nullopt;
    sync_tracks(targets);

    for (std::size_t i = 0; i < targets.size(); ++i) {
      const Point o = orbit_position(targets[i], s.t_ms);
      tracks_[i].x.push(s.x, o.x);
      tracks_[i].y.push(s.y, o.y);
    }
    ++filled_;
    last_scores_.clear();
    if (filled_ < config_.corr_window_samples) return std::nullopt;

    std::optional<PursuitScore> best;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      PursuitScore ps{targets[i].id, std::nullopt, false};
      if (config_.proximity_gate_pt &&
          distance(s.point(), orbit_position(targets[i], s.t_ms)) > *config_.proximity_gate_pt) {
        ps.gated = true;
      } else {
        const auto rx = tracks_[i].x.value();
        const auto ry = tracks_[i].y.value();
        if (rx && ry) ps.score = std::min(*rx, *ry);
      }
      last_scores_.push_back(ps);
      if (!ps.gated && (!best || better_pursuit(ps, *best))) best = ps;
    }

    if (best && best->score && *best->score >= config_.corr_threshold) {
      RecognitionEvent ev{s.t_ms, Technique::pursuits, best->id, best->score, InputRole::selection};
      reset();
      return ev;
    }
    return std::nullopt;
  }

  void reset() {
    for (auto& t : tracks_) {
      t.x.clear();
      t.y.clear();
    }
    filled_ = 0;
  }

  // Samples held in the gaze window (saturates at the window length).
  std::size_t buffered() const { return std::min(filled_, config_.corr_window_samples); }
  // Scores from the most recent full-window step, in target order.
  const std::vector<PursuitScore>& last_scores() const { return last_scores_; }
  const EngineConfig& config() const { return config_; }

 private:
  struct Track {
    TargetId id;
    SlidingPearson x, y;
  };

  void sync_tracks(std::span<const TargetSpec> targets) {
    bool same = tracks_.size() == targets.size();
    for (std::size_t i = 0; same && i < targets.size(); ++i) same = tracks_[i].id == targets[i].id;
    if (same) return;
    tracks_.clear();
    for (const auto& t : targets)
      tracks_.push_back({t.id, SlidingPearson(config_.corr_window_samples),
                         SlidingPearson(config_.corr_window_samples)});
    filled_ = 0;
  }

  EngineConfig config_;
  std::vector<Track> tracks_;
  std::size_t filled_ = 0;
  std::vector<PursuitScore> last_scores_;
};

}  // namespace gazepair
