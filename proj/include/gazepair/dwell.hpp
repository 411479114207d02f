#pragma once

#include <optional>
#include <span>

#include "gazepair/types.hpp"

namespace gazepair {

// Dwell-time selection on the running mean fixation point.
//
// A timer is anchored at the first sample that lands inside a target. Every
// later sample is folded into a cumulative mean since that anchor; if the
// mean leaves the target's circle the timer is cancelled (and may restart on
// the same sample), and once dwell_ms has elapsed with the mean still inside
// the target is selected. Invalid samples are ignored.
class DwellRecognizer {
 public:
  explicit DwellRecognizer(EngineConfig config = {}) : config_(config) {}

  std::optional<RecognitionEvent> step(const GazeSample& s, std::span<const TargetSpec> targets) {
    if (!s.valid) return std::nullopt;

    if (active_) {
      const TargetSpec* t = lookup(targets, active_id_);
      sum_x_ += s.x;
      sum_y_ += s.y;
      ++count_;
      const Point mean{sum_x_ / count_, sum_y_ / count_};
      if (t && t->contains(mean)) {
        if (s.t_ms - entry_ms_ >= config_.dwell_ms) {
          RecognitionEvent ev{s.t_ms, Technique::dwell, active_id_, std::nullopt,
                              InputRole::selection};
          reset();
          return ev;
        }
        return std::nullopt;
      }
      reset();
    }

    if (const TargetSpec* hit = first_hit(targets, s.point())) {
      active_ = true;
      active_id_ = hit->id;
      entry_ms_ = s.t_ms;
      sum_x_ = s.x;
      sum_y_ = s.y;
      count_ = 1;
    }
    return std::nullopt;
  }

  void reset() {
    active_ = false;
    active_id_.clear();
    entry_ms_ = 0;
    sum_x_ = sum_y_ = 0.0;
    count_ = 0;
  }

  // Introspection.
  bool timing() const { return active_; }
  const TargetId& timed_target() const { return active_id_; }
  TimeMs entry_ms() const { return entry_ms_; }
  std::size_t buffered() const { return count_; }
  const EngineConfig& config() const { return config_; }

 private:
  static const TargetSpec* lookup(std::span<const TargetSpec> targets, const TargetId& id) {
    for (const auto& t : targets)
      if (t.id == id) return &t;
    return nullptr;
  }

  // Closest containing target; list order breaks exact ties.
  static const TargetSpec* first_hit(std::span<const TargetSpec> targets, Point p) {
    const TargetSpec* best = nullptr;
    double best_d = 0;
    for (const auto& t : targets) {
      if (!t.contains(p)) continue;
      const double d = distance(p, t.center);
      if (!best || d < best_d) {
        best = &t;
        best_d = d;
      }
    }
    return best;
  }

  EngineConfig config_;
  bool active_ = false;
  TargetId active_id_;
  TimeMs entry_ms_ = 0;
  double sum_x_ = 0.0, sum_y_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace gazepair
