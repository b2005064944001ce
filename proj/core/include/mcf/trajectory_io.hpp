#pragma once

#include "mcf/flow.hpp"
#include "mcf/scenario.hpp"

#include <iosfwd>
#include <string>

namespace mcf {

/// A trajectory as stored on disk together with the scenario that produced it.
struct StoredTrajectory {
  Trajectory traj;
  ScenarioSpec spec;
};

/// Writes <dir>/index.json, <dir>/diagnostics.csv and <dir>/snapshots/snap_NNNNN.csv.
/// Numbers use %.17g so reloading reproduces every double exactly.
void write_trajectory(const Trajectory& traj, const ScenarioSpec& spec, const std::string& dir);

/// Reloads positions from the snapshot CSVs and recomputes the geometry.
/// Throws IoError when the index is missing, unparsable or inconsistent.
StoredTrajectory read_trajectory(const std::string& dir);

/// Columns: parameter coordinates, position components, II2, H2, A2, R.
void write_snapshot_csv(const Snapshot& snap, std::ostream& out);

/// Diagnostics time series, one row per logged step.
void write_diagnostics_csv(const Trajectory& traj, std::ostream& out);

/// printf("%.17g"); the shared number format of every CSV and report.
std::string format_double(double v);

/// Writes text to path, creating parent directories. Throws IoError.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace mcf
