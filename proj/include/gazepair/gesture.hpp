#pragma once

#include <optional>

#include "gazepair/correlation.hpp"
#include "gazepair/types.hpp"

namespace gazepair {

// Single-stroke horizontal gaze gestures.
//
// The horizontal gaze path over the last window is correlated with an
// increasing ramp (right stroke) and its reverse (left stroke). Matching is
// only attempted when the newest sample lies in one of the edge strips, and
// the winning template must point towards that strip.
class GestureRecognizer {
 public:
  explicit GestureRecognizer(EngineConfig config = {})
      : config_(config), window_(config.corr_window_samples) {}

  std::optional<RecognitionEvent> step(const GazeSample& s, const ScreenLayout& layout) {
    if (!s.valid) return std::nullopt;
    window_.push(s.x);
    last_score_.reset();
    if (!window_.full()) return std::nullopt;

    const bool in_right = layout.in_right_strip(s.x);
    const bool in_left = layout.in_left_strip(s.x);
    if (!in_right && !in_left) return std::nullopt;

    const auto r_right = window_.value();
    if (!r_right) return std::nullopt;
    const double r_left = -*r_right;
    const StrokeDirection dir = *r_right >= r_left ? StrokeDirection::right : StrokeDirection::left;
    const double score = std::max(*r_right, r_left);
    last_score_ = score;

    const bool lands_ok = dir == StrokeDirection::right ? in_right : in_left;
    if (score < config_.corr_threshold || !lands_ok) return std::nullopt;

    RecognitionEvent ev{s.t_ms, Technique::gestures, std::string(to_string(dir)), score,
                        InputRole::navigation};
    reset();
    return ev;
  }

  void reset() { window_.clear(); }

  std::size_t buffered() const { return window_.size(); }
  // Best template score of the last evaluated window (strip reached).
  std::optional<double> last_score() const { return last_score_; }
  const EngineConfig& config() const { return config_; }

 private:
  EngineConfig config_;
  SlidingRampPearson window_;
  std::optional<double> last_score_;
};

}  // namespace gazepair
