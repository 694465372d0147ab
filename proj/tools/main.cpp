#include <iostream>

#include <CLI11.hpp>

#include "stationkeep/cli_harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Approximate-optimal station keeping: run, verify or sweep"};
  app.require_subcommand(1);

  stationkeep::RunManifest manifest;
  double dt = 0.0, duration = 0.0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Simulate one scenario JSON file");
  run->add_option("scenario", manifest.scenario_path, "scenario JSON path")->required();
  run->add_option("--out", manifest.out_dir, "output directory");
  auto* run_dt = run->add_option("--dt", dt, "override time step [s]");
  auto* run_dur = run->add_option("--duration", duration, "override duration [s]");
  auto* run_seed = run->add_option("--seed", seed, "override RNG seed");
  run->add_flag("--oracle", manifest.attach_oracle,
                "attach the LQ oracle (linear plants only)");

  bool corrupt_hook = false;
  auto* verify = app.add_subcommand("verify", "Run the embedded benchmark suite");
  verify->add_flag("--corrupt-tolerance-hook", corrupt_hook)->group("");  // hidden

  std::string manifest_path;
  auto* sweep = app.add_subcommand("sweep", "Run a grid of scenarios from a manifest");
  sweep->add_option("manifest", manifest_path, "sweep manifest JSON path")->required();
  auto* sweep_out = sweep->add_option("--out", manifest.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (*run_dt) manifest.dt = dt;
    if (*run_dur) manifest.duration = duration;
    if (*run_seed) manifest.seed = seed;
    return stationkeep::cmd_run(manifest, std::cout);
  }
  if (verify->parsed()) return stationkeep::cmd_verify(std::cout, corrupt_hook);
  if (sweep->parsed()) {
    stationkeep::RunManifest m;
    try {
      m = stationkeep::load_sweep_manifest(manifest_path);
    } catch (const std::exception& e) {
      std::cout << "config error: " << e.what() << '\n';
      return stationkeep::kExitConfigError;
    }
    if (*sweep_out) m.out_dir = manifest.out_dir;
    return stationkeep::cmd_sweep(m, std::cout);
  }
  return stationkeep::kExitConfigError;
}
