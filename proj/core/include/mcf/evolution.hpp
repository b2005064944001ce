#pragma once

#include "mcf/flow.hpp"

namespace mcf {

/// Finite-difference consistency residual between two states of the same parametrization.
struct EvolutionResidual {
  double residual = 0.0;
  int worst_sample = -1;
  double dt = 0.0;
  /// Largest physical grid step of the earlier state.
  double spacing = 0.0;
  /// Only meaningful for the volume check.
  bool volume_nonincreasing = true;
};

/// max_s |(g(t+dt) - g(t))/dt + 2A(t)|_{g(t)}; throws IncomparableSnapshots across epochs.
EvolutionResidual check_metric_evolution(const Snapshot& a, const Snapshot& b);
EvolutionResidual check_metric_evolution(const Trajectory& traj, int snapshot_index);

/// max_s |(dvol(t+dt) - dvol(t))/(dt dvol(t)) + |H|^2(t)|, plus total volume monotonicity.
EvolutionResidual check_volume_evolution(const Snapshot& a, const Snapshot& b);
EvolutionResidual check_volume_evolution(const Trajectory& traj, int snapshot_index);

/// Plane-curve reduction d kappa/dt = kappa_ss + kappa^3 with signed curvature.
/// Supports closed plane curves and 1-D graphs over an interval (interior samples).
EvolutionResidual check_curvature_evolution_curve(const Snapshot& a, const Snapshot& b);
EvolutionResidual check_curvature_evolution_curve(const Trajectory& traj, int snapshot_index);

/// Signed curvature kappa = (x'y'' - y'x'')/|gamma'|^3 of a plane curve, per sample.
std::vector<double> signed_curvature(const SampledImmersion& curve);

/// Index of the snapshot comparable to snapshot_index (its partner or the next one
/// in the same epoch), or -1.
int comparable_successor(const Trajectory& traj, int snapshot_index);

/// Parabolic curvature scale: max over samples and k <= 4 of |D^k |II||^(1/(k+1)),
/// D the central difference along physical arc length. Has units 1/length.
double parabolic_curvature_scale(const SampledImmersion& imm, const GeometryField& geom);

/// Bound used by verification: residual <= factor * (dt + spacing^2) * scale.
double consistency_bound(const EvolutionResidual& r, double scale, double factor = 10.0);

}  // namespace mcf
