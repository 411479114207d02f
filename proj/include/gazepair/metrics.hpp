#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazepair/interface_model.hpp"
#include "gazepair/types.hpp"

namespace gazepair {

struct ErrorRate {
  double percent = 0.0;
  bool empty = false;  // no actions at all; percent is 0 by convention
};

// Proportion of incorrect actions to total actions, in percent.
inline ErrorRate compute_error_rate(std::span<const ActionRecord> records) {
  if (records.empty()) return {0.0, true};
  std::size_t bad = 0;
  for (const auto& r : records) bad += r.correct ? 0 : 1;
  return {100.0 * static_cast<double>(bad) / static_cast<double>(records.size()), false};
}

struct CompletionStats {
  double rate_percent = 0.0;
  std::optional<double> mean_ms;  // nullopt when nothing completed
  std::optional<double> sd_ms;    // sample sd; nullopt with fewer than two values
  std::vector<double> imputed_ms;  // per-trial times after imputation (empty if undefined)
};

// Completion rate and time. Incomplete trials take the mean time of the
// completed ones, which leaves the mean itself unchanged and shrinks the sd.
inline CompletionStats compute_completion_stats(std::span<const TrialResult> results) {
  if (results.empty()) throw UsageError("compute_completion_stats: no trials");
  CompletionStats out;
  double sum = 0.0;
  std::size_t done = 0;
  for (const auto& r : results)
    if (r.completed && r.duration_ms <= kTaskTimeoutMs) {
      sum += static_cast<double>(r.duration_ms);
      ++done;
    }
  out.rate_percent = 100.0 * static_cast<double>(done) / static_cast<double>(results.size());
  if (done == 0) return out;

  const double fill = sum / static_cast<double>(done);
  for (const auto& r : results)
    out.imputed_ms.push_back(r.completed && r.duration_ms <= kTaskTimeoutMs
                                 ? static_cast<double>(r.duration_ms)
                                 : fill);
  double total = 0.0;
  for (double v : out.imputed_ms) total += v;
  const double mean = total / static_cast<double>(out.imputed_ms.size());
  out.mean_ms = mean;
  if (out.imputed_ms.size() > 1) {
    double ss = 0.0;
    for (double v : out.imputed_ms) ss += (v - mean) * (v - mean);
    out.sd_ms = std::sqrt(ss / static_cast<double>(out.imputed_ms.size() - 1));
  }
  return out;
}

struct RoleErrorRates {
  std::optional<double> false_navigation_percent;
  std::optional<double> false_selection_percent;
  std::size_t navigations = 0;
  std::size_t selections = 0;
};

// Incorrect navigations over all navigations and likewise for selections.
// The role of each action is taken from the event that produced it.
inline RoleErrorRates compute_role_error_rates(std::span<const RecognitionEvent> events,
                                               std::span<const ActionRecord> records) {
  RoleErrorRates out;
  std::size_t bad_nav = 0, bad_sel = 0;
  for (const auto& r : records) {
    if (r.event_index >= events.size())
      throw UsageError("action record refers to event " + std::to_string(r.event_index) +
                       " but only " + std::to_string(events.size()) + " were logged");
    if (events[r.event_index].role == InputRole::navigation) {
      ++out.navigations;
      bad_nav += r.correct ? 0 : 1;
    } else {
      ++out.selections;
      bad_sel += r.correct ? 0 : 1;
    }
  }
  if (out.navigations)
    out.false_navigation_percent = 100.0 * static_cast<double>(bad_nav) / static_cast<double>(out.navigations);
  if (out.selections)
    out.false_selection_percent = 100.0 * static_cast<double>(bad_sel) / static_cast<double>(out.selections);
  return out;
}

// Mean and sample sd over the defined values; nullopt when none are.
struct Summary {
  std::optional<double> mean;
  std::optional<double> sd;
  std::size_t n = 0;
  friend bool operator==(const Summary&, const Summary&) = default;
};

inline Summary summarize(std::span<const std::optional<double>> values) {
  Summary s;
  double sum = 0.0;
  for (const auto& v : values)
    if (v) {
      sum += *v;
      ++s.n;
    }
  if (s.n == 0) return s;
  const double mean = sum / static_cast<double>(s.n);
  s.mean = mean;
  if (s.n > 1) {
    double ss = 0.0;
    for (const auto& v : values)
      if (v) ss += (*v - mean) * (*v - mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

struct ConditionMetrics {
  std::string pairing;
  std::string motor_profile;
  std::size_t trials = 0;
  double completion_rate_percent = 0.0;
  std::optional<double> mean_time_ms;
  std::optional<double> sd_time_ms;
  Summary error_rate;        // mean of per-trial error rates (trials with actions)
  Summary false_navigation;  // mean of per-trial false navigation rates
  Summary false_selection;   // mean of per-trial false selection rates
  std::size_t total_actions = 0;
  std::size_t total_errors = 0;

  friend bool operator==(const ConditionMetrics&, const ConditionMetrics&) = default;
};

struct MetricsReport {
  std::vector<ConditionMetrics> conditions;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// One trial's inputs to the report.
struct TrialOutcome {
  std::vector<RecognitionEvent> events;
  TrialResult result;
};

inline ConditionMetrics condition_metrics(std::string pairing, std::string motor_profile,
                                          std::span<const TrialOutcome> trials) {
  ConditionMetrics m;
  m.pairing = std::move(pairing);
  m.motor_profile = std::move(motor_profile);
  m.trials = trials.size();
  if (trials.empty()) return m;

  std::vector<TrialResult> results;
  std::vector<std::optional<double>> err, nav, sel;
  for (const auto& t : trials) {
    results.push_back(t.result);
    const auto e = compute_error_rate(t.result.records);
    err.push_back(e.empty ? std::nullopt : std::optional<double>(e.percent));
    const auto roles = compute_role_error_rates(t.events, t.result.records);
    nav.push_back(roles.false_navigation_percent);
    sel.push_back(roles.false_selection_percent);
    m.total_actions += t.result.actions;
    m.total_errors += t.result.errors;
  }
  const auto c = compute_completion_stats(results);
  m.completion_rate_percent = c.rate_percent;
  m.mean_time_ms = c.mean_ms;
  m.sd_time_ms = c.sd_ms;
  m.error_rate = summarize(err);
  m.false_navigation = summarize(nav);
  m.false_selection = summarize(sel);
  return m;
}

}  // namespace gazepair
