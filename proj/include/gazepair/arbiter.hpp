#pragma once

// Pairing of two gaze techniques in one interface: one bound to selection
// targets, one to navigation. Both recognizers observe every sample; their
// candidate events are merged into at most one event per step, after which
// every recognizer starts over.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gazepair/dwell.hpp"
#include "gazepair/gesture.hpp"
#include "gazepair/pursuits.hpp"
#include "gazepair/types.hpp"

namespace gazepair {

class Pairing {
 public:
  // Throws ConfigError for combinations outside the six supported pairs
  // (gestures can only navigate).
  Pairing(Technique selection, Technique navigation)
      : selection_(selection), navigation_(navigation) {
    if (selection == Technique::gestures)
      throw ConfigError("gestures cannot be bound to selection");
  }

  Technique selection() const { return selection_; }
  Technique navigation() const { return navigation_; }

  // "DwellGestures", "PursuitsDwell", ...
  std::string name() const { return std::string(word(selection_)) + std::string(word(navigation_)); }

  static Pairing parse(std::string_view name) {
    for (const auto& p : all())
      if (p.name() == name) return p;
    throw ConfigError("unknown pairing '" + std::string(name) + "'");
  }

  // The six conditions, selection-major.
  static std::array<Pairing, 6> all() {
    using T = Technique;
    return {Pairing(T::dwell, T::dwell),       Pairing(T::dwell, T::pursuits),
            Pairing(T::dwell, T::gestures),    Pairing(T::pursuits, T::pursuits),
            Pairing(T::pursuits, T::dwell),    Pairing(T::pursuits, T::gestures)};
  }

  friend bool operator==(const Pairing&, const Pairing&) = default;

 private:
  static std::string_view word(Technique t) {
    switch (t) {
      case Technique::dwell: return "Dwell";
      case Technique::pursuits: return "Pursuits";
      case Technique::gestures: return "Gestures";
    }
    return "?";
  }

  Technique selection_;
  Technique navigation_;
};

// How a dwell event (no score) competes with a correlation event raised on
// the same step.
enum class DwellPrecedence { dwell_wins, correlation_wins };

struct ArbitrationPolicy {
  DwellPrecedence dwell_precedence = DwellPrecedence::dwell_wins;
};

// Strict ordering used by the merge. Depends only on the two candidates'
// contents, never on which recognizer ran first.
inline bool outranks(const RecognitionEvent& a, const RecognitionEvent& b,
                     const ArbitrationPolicy& policy = {}) {
  const auto tier = [&](const RecognitionEvent& e) {
    if (e.score) return 1;
    return policy.dwell_precedence == DwellPrecedence::dwell_wins ? 2 : 0;
  };
  if (tier(a) != tier(b)) return tier(a) > tier(b);
  if (a.score && b.score && *a.score != *b.score) return *a.score > *b.score;
  if (a.role != b.role) return a.role < b.role;  // selection before navigation
  if (a.technique != b.technique) return a.technique < b.technique;
  return a.payload < b.payload;
}

inline const RecognitionEvent& arbitrate(const RecognitionEvent& a, const RecognitionEvent& b,
                                         const ArbitrationPolicy& policy = {}) {
  return outranks(b, a, policy) ? b : a;
}

enum class EvaluationOrder { selection_first, navigation_first };

class Arbiter {
 public:
  // An unbuilt arbiter; step() throws UsageError.
  Arbiter() = default;

  Arbiter(Pairing pairing, EngineConfig config, ScreenLayout layout, ArbitrationPolicy policy = {})
      : pairing_(pairing), config_(config), policy_(policy) {
    validate(config_);
    rebind(std::move(layout));
  }

  // Switch to another screen's layout. Validates role/technique
  // compatibility (ConfigError naming the target) and resets every recognizer.
  void rebind(ScreenLayout layout) {
    if (!pairing_) throw UsageError("arbiter has not been built");
    validate(layout);
    auto sel = make_channel(pairing_->selection(), InputRole::selection, layout);
    auto nav = make_channel(pairing_->navigation(), InputRole::navigation, layout);
    channels_ = {std::move(sel), std::move(nav)};
    layout_ = std::move(layout);
  }

  std::optional<RecognitionEvent> step(const GazeSample& s,
                                       EvaluationOrder order = EvaluationOrder::selection_first) {
    if (!pairing_) throw UsageError("arbiter_step called before the arbiter was built");
    std::array<std::optional<RecognitionEvent>, 2> candidates;
    if (order == EvaluationOrder::selection_first) {
      candidates[0] = step_channel(channels_[0], s);
      candidates[1] = step_channel(channels_[1], s);
    } else {
      candidates[1] = step_channel(channels_[1], s);
      candidates[0] = step_channel(channels_[0], s);
    }

    std::optional<RecognitionEvent> out;
    if (candidates[0] && candidates[1])
      out = arbitrate(*candidates[0], *candidates[1], policy_);
    else if (candidates[0])
      out = candidates[0];
    else if (candidates[1])
      out = candidates[1];
    last_candidates_ = candidates;
    if (out) reset();
    return out;
  }

  void reset() {
    for (auto& c : channels_)
      std::visit([](auto& r) { r.reset(); }, c.recognizer);
  }

  bool built() const { return pairing_.has_value(); }
  const Pairing& pairing() const { return pairing_.value(); }
  const EngineConfig& config() const { return config_; }
  const ScreenLayout& layout() const { return layout_; }

  // Introspection: samples held by the channel's recognizer.
  std::size_t buffered(InputRole role) const {
    return std::visit([](const auto& r) { return r.buffered(); }, channel(role).recognizer);
  }
  const std::vector<TargetSpec>& bound_targets(InputRole role) const {
    return channel(role).targets;
  }
  Technique technique(InputRole role) const { return channel(role).technique; }
  // Both channels' raw outputs from the last step, selection first.
  const std::array<std::optional<RecognitionEvent>, 2>& last_candidates() const {
    return last_candidates_;
  }

 private:
  using AnyRecognizer = std::variant<DwellRecognizer, PursuitsRecognizer, GestureRecognizer>;

  struct Channel {
    Technique technique = Technique::dwell;
    InputRole role = InputRole::selection;
    std::vector<TargetSpec> targets;
    AnyRecognizer recognizer;
  };

  const Channel& channel(InputRole role) const {
    return channels_[role == InputRole::selection ? 0 : 1];
  }

  Channel make_channel(Technique technique, InputRole role, const ScreenLayout& layout) const {
    Channel c;
    c.technique = technique;
    c.role = role;
    if (technique != Technique::gestures) {
      for (const auto& t : layout.targets) {
        const bool bound = role == InputRole::selection ? t.role == TargetRole::selection
                                                        : is_navigation(t.role);
        if (!bound) continue;
        if (technique == Technique::pursuits && !t.orbit)
          throw ConfigError("target '" + t.id + "' on screen '" + layout.screen_id +
                            "' is bound to Pursuits " + std::string(to_string(role)) +
                            " but has no orbit");
        c.targets.push_back(t);
      }
    }
    switch (technique) {
      case Technique::dwell: c.recognizer = DwellRecognizer(config_); break;
      case Technique::pursuits: c.recognizer = PursuitsRecognizer(config_); break;
      case Technique::gestures: c.recognizer = GestureRecognizer(config_); break;
    }
    return c;
  }

  std::optional<RecognitionEvent> step_channel(Channel& c, const GazeSample& s) {
    auto ev = std::visit(
        [&](auto& r) -> std::optional<RecognitionEvent> {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, GestureRecognizer>)
            return r.step(s, layout_);
          else
            return r.step(s, c.targets);
        },
        c.recognizer);
    if (ev) ev->role = c.role;
    return ev;
  }

  std::optional<Pairing> pairing_;
  EngineConfig config_;
  ArbitrationPolicy policy_;
  ScreenLayout layout_;
  std::array<Channel, 2> channels_;
  std::array<std::optional<RecognitionEvent>, 2> last_candidates_;
};

inline Arbiter build_arbiter(Pairing pairing, const EngineConfig& config, const ScreenLayout& layout,
                             ArbitrationPolicy policy = {}) {
  return Arbiter(pairing, config, layout, policy);
}

}  // namespace gazepair
