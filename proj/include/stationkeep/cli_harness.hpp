#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stationkeep {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitVerifyFailure = 3;

/// What to execute: scenario, output directory, sweep grid and overrides.
struct RunManifest {
  std::string scenario_path;
  std::string out_dir = "out";
  bool attach_oracle = false;

  // flag overrides, applied after the scenario file is loaded
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;

  // sweep axes: eta_c | eta_a1 | eta_a2 | gamma -> grid values
  std::map<std::string, std::vector<double>> sweep_axes;
};

/// Loads a sweep manifest JSON ({"scenario", "out", "axes", "attach_oracle"}).
RunManifest load_sweep_manifest(const std::string& path);

/// Runs one scenario; writes trajectory.csv, summary.json and conditions.json
/// into the output directory. Returns 0, 1 (config error) or 2 (divergence).
int cmd_run(const RunManifest& manifest, std::ostream& out);

/// Runs the embedded benchmark suite and prints one line per check with the
/// measured value and its tolerance. Returns 0 iff all pass, else 3. The
/// corrupt-tolerance hook exists to exercise the failure path in tests.
int cmd_verify(std::ostream& out, bool corrupt_tolerance_hook = false);

/// One run per grid point (concurrent), each in its own subdirectory, plus an
/// index.csv of summary metrics. Returns 2 if any run diverged.
int cmd_sweep(const RunManifest& manifest, std::ostream& out);

}  // namespace stationkeep
