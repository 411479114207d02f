// gazepair: run simulated experiments, replay run directories, generate gaze
// traces and serve the UI wire protocol.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "gazepair/gazepair.hpp"
#include "gazepair/serve.hpp"

using namespace gazepair;

namespace {

int cmd_run(const std::string& grid_path, const std::string& config_path, std::uint64_t seed,
            const std::string& out_dir, std::size_t parallel, bool traces) {
  const ConditionGrid grid = grid_path.empty() ? ConditionGrid{} : grid_from_json(read_json_file(grid_path));
  const HarnessConfig config =
      config_path.empty() ? HarnessConfig{} : harness_config_from_json(read_json_file(config_path));
  const auto out = run_grid(grid, config, seed, parallel);
  write_run(out_dir, out.runs, out.report, traces);
  std::cout << report_table(out.report);
  return 0;
}

int cmd_replay(const std::string& dir, const std::string& out_path) {
  const auto report = replay(dir);
  if (!out_path.empty()) write_text_file(out_path, report_json_text(report));
  std::cout << report_table(report);
  return 0;
}

int cmd_gen_traces(const std::string& kind, const std::string& profile_name, std::uint64_t seed,
                   TimeMs duration_ms, const std::string& out_path) {
  NoiseProfile profile = profile_name == "zero" ? zero_noise_profile() : profile_by_name(profile_name);
  profile.rng_seed = seed;
  const ScreenLayout layout;
  std::vector<GazeSample> trace;
  if (kind == "fixation") {
    trace = gen_fixation({layout.width_pt / 2, layout.height_pt / 2}, duration_ms, profile);
  } else if (kind == "pursuit") {
    const auto screens = prototype_screens(Pairing(Technique::pursuits, Technique::pursuits));
    trace = gen_pursuit(screens.home1.targets.front(), duration_ms, profile);
  } else if (kind == "stroke-right") {
    trace = gen_stroke(StrokeDirection::right, layout, profile);
  } else if (kind == "stroke-left") {
    trace = gen_stroke(StrokeDirection::left, layout, profile);
  } else {
    throw UsageError("unknown trace kind '" + kind + "'");
  }
  if (out_path.empty()) {
    write_trace(std::cout, trace);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    write_trace(out, trace);
  }
  return 0;
}

int cmd_serve(int port, bool any_interface, const std::string& pairing) {
  const Pairing p = Pairing::parse(pairing);
  UiServer server([p] { return ServeSession({}, p); });
  const int bound = server.start(port, any_interface);
  std::cerr << "serving gazepair-ui on " << (any_interface ? "0.0.0.0" : "127.0.0.1") << ":" << bound << "\n";
  server.wait();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze input pairing engine: simulated experiments and UI server"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Simulate a condition grid and write a run directory");
  std::string grid_path, config_path, out_dir = "run";
  std::uint64_t seed = 2019;
  std::size_t parallel = std::max(1u, std::thread::hardware_concurrency());
  bool no_traces = false;
  run->add_option("--grid", grid_path, "Condition grid JSON (default: full grid)")->check(CLI::ExistingFile);
  run->add_option("--config", config_path, "Harness config JSON")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--no-traces", no_traces, "Skip per-trial gaze traces");

  auto* rep = app.add_subcommand("replay", "Recompute the report from a run directory's logs");
  std::string replay_dir, replay_out;
  rep->add_option("dir", replay_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  rep->add_option("--out", replay_out, "Write report JSON here");

  auto* gen = app.add_subcommand("gen-traces", "Write a synthetic gaze trace as CSV");
  std::string kind = "fixation", profile = "sitting", trace_out;
  std::uint64_t trace_seed = 1;
  TimeMs duration_ms = 3000;
  gen->add_option("--kind", kind, "fixation | pursuit | stroke-right | stroke-left")
      ->check(CLI::IsMember({"fixation", "pursuit", "stroke-right", "stroke-left"}));
  gen->add_option("--profile", profile, "sitting | walking | zero")
      ->check(CLI::IsMember({"sitting", "walking", "zero"}));
  gen->add_option("--seed", trace_seed, "Noise seed");
  gen->add_option("--duration-ms", duration_ms, "Fixation and pursuit length")->check(CLI::PositiveNumber);
  gen->add_option("--out", trace_out, "Output CSV (default: stdout)");

  auto* serve = app.add_subcommand("serve", "Serve the UI wire protocol over TCP and WebSocket");
  int port = 8765;
  bool any = false;
  std::string pairing = "DwellGestures";
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_flag("--any", any, "Listen on all interfaces");
  serve->add_option("--pairing", pairing, "Initial pairing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(grid_path, config_path, seed, out_dir, parallel, !no_traces);
    if (*rep) return cmd_replay(replay_dir, replay_out);
    if (*gen) return cmd_gen_traces(kind, profile, trace_seed, duration_ms, trace_out);
    if (*serve) return cmd_serve(port, any, pairing);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
