#pragma once

// Simulated experiment: runs the pairing x motor-profile grid, persists every
// log and derives the report from those logs.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gazepair/io.hpp"
#include "gazepair/metrics.hpp"
#include "gazepair/simulator.hpp"

namespace gazepair {

struct ConditionGrid {
  std::vector<Pairing> pairings = [] {
    const auto all = Pairing::all();
    return std::vector<Pairing>(all.begin(), all.end());
  }();
  std::vector<std::string> motor_profiles{"sitting", "walking"};
  std::size_t trials_per_condition = 3;
  std::size_t participants = 24;

  std::size_t conditions() const { return pairings.size() * motor_profiles.size(); }
  std::size_t size() const { return participants * conditions() * trials_per_condition; }
};

inline void validate(const ConditionGrid& g) {
  if (g.pairings.empty() || g.motor_profiles.empty() || g.trials_per_condition == 0 ||
      g.participants == 0)
    throw ConfigError("condition grid is empty");
}

inline json to_json(const ConditionGrid& g) {
  json pairings = json::array();
  for (const auto& p : g.pairings) pairings.push_back(p.name());
  return {{"format_version", kFormatVersion},
          {"pairings", pairings},
          {"motor_profiles", g.motor_profiles},
          {"trials_per_condition", g.trials_per_condition},
          {"participants", g.participants}};
}

inline ConditionGrid grid_from_json(const json& j) {
  check_format_version(j, "grid file");
  ConditionGrid g;
  if (j.contains("pairings")) {
    g.pairings.clear();
    for (const auto& p : j.at("pairings")) g.pairings.push_back(Pairing::parse(p.get<std::string>()));
  }
  read_opt(j, "motor_profiles", g.motor_profiles);
  read_opt(j, "trials_per_condition", g.trials_per_condition);
  read_opt(j, "participants", g.participants);
  validate(g);
  return g;
}

// SplitMix64 finaliser.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// seed = mix(mix(mix(mix(base) ^ participant) ^ condition) ^ trial)
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t participant,
                                std::uint64_t condition, std::uint64_t trial) {
  return mix64(mix64(mix64(mix64(base) ^ participant) ^ condition) ^ trial);
}

// Start track drawn from the seed so that start + 4 stays in range.
inline TaskSpec task_for_seed(std::uint64_t seed, int app_slot) {
  TaskSpec t;
  t.target_app_slot = app_slot;
  t.start_track_index = static_cast<int>(mix64(seed ^ 0x7461736bULL) % (kTrackCount - kTrackSteps));
  t.target_track_index = t.start_track_index + kTrackSteps;
  return t;
}

struct TrialPlan {
  std::size_t participant = 0;
  std::size_t condition = 0;  // pairing-major, then motor profile
  std::size_t trial = 0;
  Pairing pairing{Technique::dwell, Technique::dwell};
  std::string motor_profile;
  std::uint64_t seed = 0;
  TaskSpec task;

  std::string key() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "p%02zu_%s_%s_t%zu", participant + 1, pairing.name().c_str(),
                  motor_profile.c_str(), trial + 1);
    return buf;
  }
};

inline json to_json(const TrialPlan& p) {
  return {{"trial", p.key()},
          {"participant", p.participant},
          {"condition", p.condition},
          {"trial_index", p.trial},
          {"pairing", p.pairing.name()},
          {"motor_profile", p.motor_profile},
          {"seed", p.seed},
          {"task", to_json(p.task)}};
}

inline TrialPlan trial_plan_from_json(const json& j) {
  TrialPlan p;
  p.participant = j.at("participant").get<std::size_t>();
  p.condition = j.at("condition").get<std::size_t>();
  p.trial = j.at("trial_index").get<std::size_t>();
  p.pairing = Pairing::parse(j.at("pairing").get<std::string>());
  p.motor_profile = j.at("motor_profile").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.task = task_from_json(j.at("task"));
  return p;
}

// Canonical order: participant, condition, trial.
inline std::vector<TrialPlan> plan_grid(const ConditionGrid& grid, const HarnessConfig& config,
                                        std::uint64_t base_seed) {
  validate(grid);
  std::vector<TrialPlan> plans;
  plans.reserve(grid.size());
  for (std::size_t p = 0; p < grid.participants; ++p)
    for (std::size_t pi = 0; pi < grid.pairings.size(); ++pi)
      for (std::size_t mi = 0; mi < grid.motor_profiles.size(); ++mi)
        for (std::size_t t = 0; t < grid.trials_per_condition; ++t) {
          TrialPlan plan;
          plan.participant = p;
          plan.condition = pi * grid.motor_profiles.size() + mi;
          plan.trial = t;
          plan.pairing = grid.pairings[pi];
          plan.motor_profile = grid.motor_profiles[mi];
          plan.seed = trial_seed(base_seed, p, plan.condition, t);
          plan.task = task_for_seed(plan.seed, config.target_app_slot);
          plans.push_back(plan);
        }
  return plans;
}

struct TrialRun {
  TrialPlan plan;
  TrialLogs logs;
};

inline TrialRun execute(const TrialPlan& plan, const HarnessConfig& config) {
  NoiseProfile profile = config.profile(plan.motor_profile);
  profile.rng_seed = plan.seed;
  AgentConfig agent = config.agent;
  agent.geometry = config.geometry;
  const ScreenSet screens = prototype_screens(plan.pairing, config.geometry);
  return {plan, run_trial(plan.pairing, plan.task, profile, config.engine, screens, agent, config.policy)};
}

// Runs every planned trial; results keep the plan order whatever `workers` is.
inline std::vector<TrialRun> run_plans(const std::vector<TrialPlan>& plans, const HarnessConfig& config,
                                       std::size_t workers = 1) {
  for (const auto& p : plans) (void)config.profile(p.motor_profile);

  std::vector<TrialRun> runs(plans.size());
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, plans.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < plans.size(); ++i) runs[i] = execute(plans[i], config);
    return runs;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < plans.size();) {
        try {
          runs[i] = execute(plans[i], config);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return runs;
}

// Groups trials by condition (first-seen order, which is canonical for
// plan_grid output) and computes each condition's metrics.
inline MetricsReport build_report(const std::vector<TrialRun>& runs) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<TrialOutcome>> groups;
  std::vector<std::pair<std::size_t, std::pair<std::string, std::string>>> keyed;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.plan.pairing.name(), r.plan.motor_profile);
    keyed.push_back({r.plan.condition, key});
    TrialOutcome o;
    for (const auto& e : r.logs.events) o.events.push_back(e.event);
    o.result = r.logs.result;
    groups[key].push_back(std::move(o));
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [_, key] : keyed)
    if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);

  MetricsReport report;
  for (const auto& key : order)
    report.conditions.push_back(condition_metrics(key.first, key.second, groups[key]));
  return report;
}

// ---- persistence ----

struct RunFiles {
  static constexpr const char* trials = "trials.jsonl";    // trial script
  static constexpr const char* results = "results.jsonl";  // TrialResult log
  static constexpr const char* events = "events.jsonl";    // event log
  static constexpr const char* report_json = "report.json";
  static constexpr const char* report_txt = "report.txt";
  static constexpr const char* traces_dir = "traces";
};

inline std::string report_json_text(const MetricsReport& r) { return to_json(r).dump(2) + "\n"; }

inline void write_run(const std::filesystem::path& dir, const std::vector<TrialRun>& runs,
                      const MetricsReport& report, bool write_traces = true) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ostringstream script, results, events;
  for (const auto& r : runs) {
    script << to_json(r.plan).dump() << '\n';
    json res = to_json(r.logs.result);
    res["trial"] = r.plan.key();
    results << res.dump() << '\n';
    for (const auto& e : r.logs.events) {
      json ev = event_log_record(e, r.plan.pairing.name());
      ev["trial"] = r.plan.key();
      events << ev.dump() << '\n';
    }
  }
  write_text_file((dir / RunFiles::trials).string(), script.str());
  write_text_file((dir / RunFiles::results).string(), results.str());
  write_text_file((dir / RunFiles::events).string(), events.str());
  write_text_file((dir / RunFiles::report_json).string(), report_json_text(report));
  write_text_file((dir / RunFiles::report_txt).string(), report_table(report));
  if (write_traces) {
    fs::create_directories(dir / RunFiles::traces_dir);
    for (const auto& r : runs) {
      std::ofstream out(dir / RunFiles::traces_dir / (r.plan.key() + ".csv"), std::ios::binary);
      write_trace(out, r.logs.samples);
    }
  }
}

namespace detail {
inline std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}
}  // namespace detail

// Reloads the persisted script, results and events of a run (no traces).
inline std::vector<TrialRun> load_run(const std::filesystem::path& dir) {
  const auto script = detail::read_jsonl(dir / RunFiles::trials);
  const auto results = detail::read_jsonl(dir / RunFiles::results);
  const auto events = detail::read_jsonl(dir / RunFiles::events);
  if (script.size() != results.size())
    throw ConfigError("run directory: script and result logs disagree in length");

  std::vector<TrialRun> runs;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < script.size(); ++i) {
    TrialRun r;
    r.plan = trial_plan_from_json(script[i]);
    if (results[i].at("trial").get<std::string>() != r.plan.key())
      throw ConfigError("run directory: result " + std::to_string(i) + " does not match the script");
    r.logs.result = trial_result_from_json(results[i]);
    index[r.plan.key()] = runs.size();
    runs.push_back(std::move(r));
  }
  for (const auto& e : events) {
    const auto it = index.find(e.at("trial").get<std::string>());
    if (it == index.end()) throw ConfigError("event for unknown trial " + e.at("trial").dump());
    runs[it->second].logs.events.push_back({event_from_json(e), e.at("screen_id").get<std::string>()});
  }
  return runs;
}

inline MetricsReport replay(const std::filesystem::path& dir) { return build_report(load_run(dir)); }

struct GridOutcome {
  std::vector<TrialRun> runs;
  MetricsReport report;
};

inline GridOutcome run_grid(const ConditionGrid& grid, const HarnessConfig& config,
                            std::uint64_t base_seed, std::size_t workers = 1) {
  GridOutcome out;
  out.runs = run_plans(plan_grid(grid, config, base_seed), config, workers);
  out.report = build_report(out.runs);
  return out;
}

}  // namespace gazepair
