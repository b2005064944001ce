#pragma once

#include "mcf/estimates.hpp"
#include "mcf/singularity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mcf {

/// Everything `analyze` derives from a stored trajectory.
struct Analysis {
  std::string scenario_id;
  StopReason stop_reason = StopReason::NonSingularStop;
  long steps = 0;
  double final_time = 0.0;
  double Q0 = 0.0;
  /// Fit of max|II|; empty for non-singular runs or when the fit failed (see fit_note).
  std::optional<BlowupFit> fit;
  std::optional<BlowupType> classification;
  std::string fit_note;
  std::vector<GrowthRow> growth;
  /// Rescale levels 1..J with J the smaller of the requested and the reached levels.
  std::vector<RescaleEntry> rescale;
  std::string rescale_note;
};

/// Fits, monitor verdicts and rescale residuals. Fit failures are recorded, not thrown.
Analysis analyze_trajectory(const Trajectory& traj, int rescale_levels);

/// Number of consecutive crossing levels 1, 2, ... present among the snapshots.
int reached_levels(const Trajectory& traj);

std::string analysis_json(const Analysis& analysis);
std::string verification_json(const std::vector<CheckRecord>& records);
std::string rescale_json(const RescaleSequence& seq);

/// Plain-text digest of analysis.json, verification.json and rescale.json found in dir.
std::string summary_text(const std::string& dir);

}  // namespace mcf
