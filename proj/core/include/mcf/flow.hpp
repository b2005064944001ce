#pragma once

#include "mcf/geometry.hpp"

#include <string>
#include <vector>

namespace mcf {

enum class ReparamMode { Off, ArcLengthEveryK };

struct Reparametrization {
  ReparamMode mode = ReparamMode::Off;
  int every = 0;
  /// 0 gives plain arc-length spacing; w > 0 concentrates samples where |II| is
  /// large via the monitor density 1 + w |II| / mean|II|_0.
  double curvature_weight = 0.0;
};

struct FlowConfig {
  std::string scenario_id;
  SampledImmersion initial;
  /// c in dt = c * min(1 / max|II|^2, ds_min^2), c in (0, 0.5].
  double dt_safety = 0.25;
  /// Absolute stop threshold on max|II|; when <= 0, stop_factor * initial max|II| is used.
  double stop_Q = 0.0;
  double stop_factor = 200.0;
  long max_steps = 2'000'000;
  long snapshot_stride = 5000;
  Reparametrization reparametrize;
  /// Snapshots are also taken when the running max|II| first reaches 2^j * Q0, j = 1..levels.
  int crossing_levels = 10;
  /// Record the state one step after every stride snapshot (same parametrization epoch).
  bool record_partners = true;
  /// When > 0 every step uses this dt instead of the adaptive law (consistency experiments).
  double fixed_dt = 0.0;

  void validate() const;
};

enum class StopReason { SingularStop, NonSingularStop };

const char* to_string(StopReason reason);
StopReason stop_reason_from_string(const std::string& name);

struct DiagnosticRow {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  double max_II = 0.0;
  double max_H = 0.0;
  double max_A = 0.0;
  double volume = 0.0;
  /// max over all samples of |dg/dt|_g = 2 |A|_g.
  double max_dtg = 0.0;
  /// Left Riemann sum of max|dg/dt|_g dt up to t.
  double int_dtg = 0.0;
  double running_max_II = 0.0;
  int epoch = 0;
};

struct Snapshot {
  long step = 0;
  double t = 0.0;
  /// Parametrization epoch; snapshots from different epochs are not comparable sample-wise.
  int epoch = 0;
  /// Index of the stride snapshot this state follows by one step, or -1.
  int partner_of = -1;
  /// j for the snapshot taken when running max|II| first reached 2^j Q0, or -1.
  int crossing_level = -1;
  /// Running max|II| over t' <= t at the time of the snapshot.
  double running_max_II = 0.0;
  SampledImmersion imm;
  GeometryField geom;
};

struct Trajectory {
  std::string scenario_id;
  StopReason stop_reason = StopReason::NonSingularStop;
  double Q0 = 0.0;
  double stop_Q = 0.0;
  long steps = 0;
  /// Steps where the total volume rose within one parametrization epoch.
  long volume_increase_events = 0;
  /// Rows at step 0, at snapshots, whenever log max|II| moved by 2e-3, every 500 steps and at the last step.
  std::vector<DiagnosticRow> diagnostics;
  std::vector<Snapshot> snapshots;

  double final_time() const { return diagnostics.empty() ? 0.0 : diagnostics.back().t; }
};

/// One explicit Euler step F <- F + dt H. Fixed boundary samples for DiscGraph.
/// Throws StepRejected when the new state is degenerate.
SampledImmersion step(const SampledImmersion& imm, const GeometryField& geom, double dt);

struct StepResult {
  SampledImmersion imm;
  GeometryField geom;
  double dt = 0.0;
};

/// step() with retries at dt/2, at most 20 halvings; throws FlowStalled when exhausted.
StepResult advance(const SampledImmersion& imm, const GeometryField& geom, double dt);

/// Redistributes samples along the curve or profile by the monitor density.
/// mean_II_ref normalizes the curvature weight.
SampledImmersion redistribute(const SampledImmersion& imm, const GeometryField& geom, double curvature_weight,
                              double mean_II_ref);

/// Adaptive step dt = c * min(1 / max|II|^2, ds_min^2).
double adaptive_dt(const SampledImmersion& imm, const GeometryField& geom, double dt_safety);

Trajectory run(const FlowConfig& config);

/// Mean of |II| over the surface, used to normalize redistribution weights.
double mean_curvature_scale(const SampledImmersion& imm, const GeometryField& geom);

}  // namespace mcf
