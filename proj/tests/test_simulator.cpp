#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gazepair/arbiter.hpp"
#include "gazepair/metrics.hpp"
#include "gazepair/simulator.hpp"
#include "oracle.hpp"

using namespace gazepair;

namespace {

TargetSpec orbiting(std::string id, Point c, double phase, OrbitDirection dir) {
  OrbitSpec o;
  o.initial_phase_deg = phase;
  o.direction = dir;
  return {std::move(id), c, 65, TargetRole::selection, o};
}

double mean_error_rate(const Pairing& p, const NoiseProfile& base, int seeds) {
  double sum = 0;
  int n = 0;
  for (int s = 0; s < seeds; ++s) {
    NoiseProfile prof = base;
    prof.rng_seed = 5000 + static_cast<std::uint64_t>(s);
    const TaskSpec task{2, s % 26, s % 26 + 4};
    const auto logs = run_trial(p, task, prof, EngineConfig{}, prototype_screens(p));
    const auto e = compute_error_rate(logs.result.records);
    if (!e.empty) {
      sum += e.percent;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

}  // namespace

TEST(SampleClockTest, NominalThirtyHertz) {
  const SampleClock c;
  EXPECT_EQ(c.at(0), 0);
  EXPECT_EQ(c.at(1), 33);
  EXPECT_EQ(c.at(2), 67);
  EXPECT_EQ(c.at(3), 100);
  EXPECT_EQ(c.at(24), 800);
}

TEST(Fixation, NoiselessIsExact) {
  const auto trace = gen_fixation({120, 340}, 800, zero_noise_profile());
  ASSERT_EQ(trace.size(), 24u);
  for (const auto& s : trace) {
    EXPECT_EQ(s.x, 120);
    EXPECT_EQ(s.y, 340);
  }
}

TEST(Fixation, SameSeedSameTrace) {
  NoiseProfile p = sitting_profile();
  p.rng_seed = 99;
  EXPECT_EQ(gen_fixation({100, 100}, 2000, p), gen_fixation({100, 100}, 2000, p));
  NoiseProfile q = p;
  q.rng_seed = 100;
  EXPECT_NE(gen_fixation({100, 100}, 2000, p), gen_fixation({100, 100}, 2000, q));
}

TEST(Fixation, JitterSdMatchesProfile) {
  NoiseProfile p = zero_noise_profile();
  p.fixation_jitter_sd_pt = 2.0;
  p.rng_seed = 1;
  const auto trace = gen_fixation({0, 0}, 10000 * 1000 / 30 + 1, p);
  ASSERT_GE(trace.size(), 10000u);
  double sx = 0, sxx = 0;
  for (const auto& s : trace) {
    sx += s.x;
    sxx += s.x * s.x;
  }
  const double n = static_cast<double>(trace.size());
  const double sd = std::sqrt((sxx - sx * sx / n) / (n - 1));
  EXPECT_NEAR(sd, 2.0, 0.1);
}

TEST(Fixation, SittingCalibratedToTrackerAccuracy) {
  // Mean radial error of long fixations matches 1.6 deg at 65 pt / 2.09 deg.
  const double expected = 1.6 * 65.0 / 2.09;
  double total = 0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    NoiseProfile p = sitting_profile();
    p.rng_seed = seed;
    for (const auto& s : gen_fixation({187.5, 400}, 60000, p)) {
      total += std::hypot(s.x - 187.5, s.y - 400);
      ++n;
    }
  }
  EXPECT_NEAR(total / n, expected, 0.03 * expected);
  EXPECT_NEAR(expected, 49.76, 0.01);
}

TEST(Pursuit, NoiselessWithoutLagTracksExactly) {
  const auto t = orbiting("a", {100, 300}, 0, OrbitDirection::clockwise);
  const auto trace = gen_pursuit(t, 3000, zero_noise_profile());
  for (const auto& s : trace) {
    const Point o = orbit_position(t, s.t_ms);
    EXPECT_DOUBLE_EQ(s.x, o.x);
    EXPECT_DOUBLE_EQ(s.y, o.y);
  }
}

TEST(Pursuit, ClosesTheLoopWithRecognizer) {
  const auto target = orbiting("a", {100, 300}, 0, OrbitDirection::clockwise);
  const std::vector<TargetSpec> targets{target, orbiting("b", {250, 300}, 180, OrbitDirection::counterclockwise)};
  NoiseProfile p = sitting_profile();
  p.drift_sd_pt = 0;
  p.rng_seed = 4;
  PursuitsRecognizer rec;
  std::optional<RecognitionEvent> ev;
  for (const auto& s : gen_pursuit(target, 3000, p))
    if (!ev) ev = rec.step(s, targets);
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->payload, "a");
}

TEST(Pursuit, LaggedPursuitScoreMatchesOracle) {
  const auto t = orbiting("a", {100, 300}, 0, OrbitDirection::clockwise);
  NoiseProfile p = zero_noise_profile();
  p.pursuit_lag_ms = 200;
  const auto trace = gen_pursuit(t, 1000, p);
  ASSERT_EQ(trace.size(), 30u);
  std::vector<double> gx, gy, ox, oy;
  for (const auto& s : trace) {
    const Point o = orbit_position(t, s.t_ms);
    gx.push_back(s.x);
    gy.push_back(s.y);
    ox.push_back(o.x);
    oy.push_back(o.y);
  }
  const double expected = std::min(*oracle::pearson(gx, ox), *oracle::pearson(gy, oy));
  EngineConfig cfg;
  cfg.corr_threshold = 1.0;
  PursuitsRecognizer probe(cfg);
  const std::vector<TargetSpec> targets{t};
  for (const auto& s : trace) probe.step(s, targets);
  ASSERT_EQ(probe.last_scores().size(), 1u);
  EXPECT_NEAR(*probe.last_scores()[0].score, expected, 1e-9);
  EXPECT_LT(expected, 1.0);

  PursuitsRecognizer rec;
  std::optional<RecognitionEvent> ev;
  for (const auto& s : trace) ev = rec.step(s, targets);
  EXPECT_EQ(ev.has_value(), expected >= 0.8);
}

TEST(Pursuit, AxisAlignedMirrorTwinIsNeverSelected) {
  const auto a = orbiting("a", {100, 300}, 90, OrbitDirection::clockwise);
  const auto b = orbiting("b", {250, 300}, 90, OrbitDirection::counterclockwise);
  const std::vector<TargetSpec> targets{a, b};
  NoiseProfile p = zero_noise_profile();
  p.pursuit_noise_sd_pt = 1.0;
  p.pursuit_lag_ms = 30;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    p.rng_seed = seed;
    PursuitsRecognizer rec;
    for (const auto& s : gen_pursuit(a, 6000, p))
      if (auto ev = rec.step(s, targets)) ASSERT_EQ(ev->payload, "a");
  }
}

TEST(Stroke, NoiselessMinimumJerkScore) {
  ScreenLayout l;
  const auto trace = gen_stroke(StrokeDirection::right, l, zero_noise_profile());
  ASSERT_EQ(trace.size(), 30u);
  EXPECT_TRUE(l.in_right_strip(trace.back().x));
  EXPECT_FALSE(l.in_right_strip(trace.front().x));
  GestureRecognizer g;
  std::optional<RecognitionEvent> ev;
  for (const auto& s : trace)
    if (auto e = g.step(s, l)) ev = e;
  ASSERT_TRUE(ev);
  EXPECT_GE(*ev->score, 0.8);
  EXPECT_NEAR(*ev->score, 0.98418, 1e-5);
}

TEST(Stroke, TruncatedStrokeDoesNotFire) {
  ScreenLayout l;
  auto trace = gen_stroke(StrokeDirection::right, l, zero_noise_profile());
  trace.resize(25);
  GestureRecognizer g;
  for (const auto& s : trace) EXPECT_FALSE(g.step(s, l));
}

TEST(Stroke, LeftMirrorsRight) {
  ScreenLayout l;
  const auto r = gen_stroke(StrokeDirection::right, l, zero_noise_profile());
  const auto left = gen_stroke(StrokeDirection::left, l, zero_noise_profile());
  ASSERT_EQ(r.size(), left.size());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i].x, l.width_pt - left[i].x, 1e-9);
}

TEST(Agent, ZeroNoiseCompletesEveryPairingOptimally) {
  for (const auto& p : Pairing::all()) {
    const auto logs = run_trial(p, TaskSpec{2, 7, 11}, zero_noise_profile(), EngineConfig{}, prototype_screens(p));
    EXPECT_TRUE(logs.result.completed) << p.name();
    EXPECT_EQ(logs.result.actions, 7u) << p.name();
    EXPECT_EQ(logs.result.errors, 0u) << p.name();
    EXPECT_EQ(logs.events.size(), 7u) << p.name();
  }
}

TEST(Agent, BackwardTaskUsesLeftNavigation) {
  const Pairing p(Technique::dwell, Technique::gestures);
  const auto logs = run_trial(p, TaskSpec{2, 20, 16}, zero_noise_profile(), EngineConfig{}, prototype_screens(p));
  EXPECT_TRUE(logs.result.completed);
  EXPECT_EQ(logs.result.errors, 0u);
  std::size_t lefts = 0;
  for (const auto& r : logs.result.records) lefts += r.action == Action::navigate_left;
  EXPECT_EQ(lefts, 4u);
}

TEST(Agent, AbsurdNoiseTimesOutCleanly) {
  NoiseProfile p = sitting_profile();
  p.fixation_jitter_sd_pt = 5000;
  p.pursuit_noise_sd_pt = 5000;
  p.rng_seed = 3;
  for (const auto& pairing : Pairing::all()) {
    const auto logs = run_trial(pairing, TaskSpec{}, p, EngineConfig{}, prototype_screens(pairing));
    if (!logs.result.completed) EXPECT_NE(logs.result.failure_cause, FailureCause::none);
    EXPECT_LE(logs.result.duration_ms, kTaskTimeoutMs + 34);
  }
}

TEST(Agent, DeterministicPerSeed) {
  const Pairing p(Technique::pursuits, Technique::gestures);
  NoiseProfile prof = walking_profile();
  prof.rng_seed = 77;
  const auto a = run_trial(p, TaskSpec{}, prof, EngineConfig{}, prototype_screens(p));
  const auto b = run_trial(p, TaskSpec{}, prof, EngineConfig{}, prototype_screens(p));
  EXPECT_EQ(a, b);
}

TEST(NoiseModel, MoreNoiseNeverHelpsOnAverage) {
  // Scaling every noise term up does not reduce the mean error rate.
  const Pairing p(Technique::pursuits, Technique::pursuits);
  NoiseProfile low = sitting_profile();
  NoiseProfile high = low;
  high.fixation_jitter_sd_pt *= 1.5;
  high.drift_sd_pt *= 2.0;
  high.pursuit_noise_sd_pt *= 2.0;
  EXPECT_GE(mean_error_rate(p, high, 200), mean_error_rate(p, low, 200));
}

TEST(NoiseModel, ProfileLookup) {
  EXPECT_EQ(profile_by_name("walking").name, "walking");
  EXPECT_THROW(profile_by_name("running"), ConfigError);
  NoiseProfile bad = sitting_profile();
  bad.drift_tau_ms = 0;
  EXPECT_THROW(validate(bad), ConfigError);
}
