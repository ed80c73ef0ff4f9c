#pragma once

#include <iosfwd>
#include <string>

#include "monoped/run_config.hpp"

namespace monoped {

// Pipeline commands. Each writes its artifacts under config.out_dir, prints a
// short human summary to `out`, and returns 0; failures are reported by
// throwing (std::invalid_argument for bad configs or inputs, std::runtime_error
// and friends for runtime trouble). run_cli maps those onto exit codes.

// Sweep gear trains, write catalog.json + catalog.csv.
int cmd_stage1(const RunConfig& config, KindFilter kind, std::ostream& out);

// Optimize the configured study case; write best_point.json, history.csv,
// best_trajectory.csv. The nominal case just evaluates and prints (h, E).
int cmd_codesign(const RunConfig& config, std::ostream& out);

// Roll out one design (from a best-point file, or the study's pinned point
// when `point_path` is empty) and write trajectory.csv.
int cmd_simulate(const RunConfig& config, const std::string& point_path,
                 std::ostream& out);

// Turn a best-point file into a CAD-ready design manifest (manifest.json).
int cmd_export(const RunConfig& config, const std::string& point_path,
               std::ostream& out);

// stage1 -> codesign -> export -> run_summary.json. Skips the stage-1 sweep
// when an existing catalog.json was built from identical stage-1 inputs.
int cmd_pipeline(const RunConfig& config, std::ostream& out);

// argv-level entry point: flag parsing, config loading, dispatch, and error
// mapping (0 success, 1 config/input error, 2 runtime failure).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace monoped
