#pragma once

#include "mcf/estimates.hpp"
#include "mcf/scenario.hpp"
#include "mcf/trajectory_io.hpp"

#include <set>
#include <string>
#include <vector>

namespace mcf {

enum class Stage { Simulate, Analyze, Verify, Rescale };

Stage stage_from_string(const std::string& name);

/// Exit codes shared by the pipeline and the CLI.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitRuntimeError = 2;

/// Every check id verify can emit, sorted.
const std::vector<std::string>& known_check_ids();

/// Runs the verification battery on a stored trajectory. An empty filter runs every
/// applicable check. Records come back sorted by check id.
std::vector<CheckRecord> run_checks(const StoredTrajectory& stored, const Tolerances& tol,
                                    const std::set<std::string>& filter = {});

/// True when no gating record failed.
bool all_pass(const std::vector<CheckRecord>& records);

struct PipelineOptions {
  /// Output directory; defaults to the scenario's output or out/<name>.
  std::string out_dir;
  ToleranceProfile profile = ToleranceProfile::Default;
  std::set<std::string> checks;
  /// Rescale levels; 0 uses the scenario's analysis.rescale_levels.
  int rescale_levels = 0;
};

/// Stage drivers. Each returns kExitPass or kExitCheckFailure and throws on runtime errors.
int simulate_stage(const ScenarioSpec& spec, const std::string& out_dir);
int analyze_stage(const std::string& traj_dir, const std::string& out_dir);
int verify_stage(const std::string& traj_dir, const std::string& out_dir, ToleranceProfile profile,
                 const std::set<std::string>& checks);
int rescale_stage(const std::string& traj_dir, const std::string& out_dir, int levels);
/// Writes <dir>/summary.txt and returns its text.
std::string report_stage(const std::string& dir);

/// Runs the requested stages in order simulate, analyze, verify, rescale; the worst exit code wins.
/// The rescale stage is skipped for trajectories without a singular stop.
int run_pipeline(const ScenarioSpec& spec, const std::set<Stage>& stages, const PipelineOptions& options = {});

std::string default_out_dir(const ScenarioSpec& spec);

}  // namespace mcf
