#pragma once

#include "mcf/flow.hpp"

#include <string>
#include <vector>

namespace mcf {

enum class Quantity { II, H, A };

const char* to_string(Quantity q);

/// Fit of log q = -(1/p) log(T - t) + c near the singular time.
struct BlowupFit {
  Quantity quantity = Quantity::II;
  double T_est = 0.0;
  double p_est = 0.0;
  /// sup over the window of q^p (T_est - t).
  double C_est = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual_rms = 0.0;
  int points = 0;
};

struct FitOptions {
  /// Window: rows with q >= window_factor * q(0).
  double window_factor = 10.0;
  /// Minimum rows with q >= q_last / 10.
  int min_points = 20;
  double max_rms = 0.1;
  /// Rows are thinned to about this many, evenly spaced in log q.
  int max_points = 400;
};

/// Fits a raw series (t strictly increasing, q > 0). Throws InsufficientData / FitDiverged.
BlowupFit fit_blowup(const std::vector<double>& t, const std::vector<double>& q, Quantity quantity,
                     const FitOptions& options = {});

/// Fit on the trajectory diagnostics. Requires a SingularStop trajectory.
BlowupFit estimate_singular_time(const Trajectory& traj, Quantity quantity, const FitOptions& options = {});

std::vector<double> diagnostic_series(const Trajectory& traj, Quantity quantity);

enum class BlowupType { TypeI, GeneralizedRate, SuperTypeI, BelowRange };

const char* to_string(BlowupType type);

/// TypeI for |p - 2| <= tau, GeneralizedRate for 1 < p < 2 - tau, SuperTypeI above 2 + tau,
/// BelowRange for p <= 1.
BlowupType classify_type(const BlowupFit& fit, double tau = 0.15);

enum class Verdict { Blowup, NoBlowup, NoVerdict };

const char* to_string(Verdict v);

struct GrowthRow {
  Quantity quantity = Quantity::II;
  Verdict verdict = Verdict::NoVerdict;
  /// q(t_last) / q(t_start) with t_start = T_est - (T_est - t_0) / 10.
  double growth = 0.0;
  /// Exponent e in q ~ (T - t)^e, that is -1 / p_est.
  double exponent = 0.0;
  BlowupFit fit;
  std::string note;
};

/// Blowup verdicts for max|II|, max|H| and max|A|.
std::vector<GrowthRow> blowup_monitor(const Trajectory& traj, const FitOptions& options = {});

struct RescaleEntry {
  int level = 0;
  int snapshot = -1;
  long step = 0;
  double t = 0.0;
  /// |II(p_j, t_j)|, the scale factor.
  double Q = 0.0;
  /// Running max of |II| over t <= t_j as logged by the flow.
  double running_max = 0.0;
  int anchor = -1;
  /// Rescaled snapshot: positions (F - F(p_j)) * Q, time origin at t_j, time unit 1/Q^2.
  SampledImmersion imm;
  GeometryField geom;
  /// |II_j(p_j, 0)|.
  double anchor_II = 0.0;
  /// running_max / Q: rescaled max over t <= 0.
  double history_max = 0.0;
  /// Largest relative deviation of |H| from |H|/Q over samples.
  double H_residual = 0.0;
  /// Largest relative deviation among |II|, |H|, |A|, R and dvol scaling laws.
  double scaling_residual = 0.0;
};

struct RescaleSequence {
  std::string scenario_id;
  std::vector<RescaleEntry> entries;
};

/// Ambient scaling about `centre` by `factor`; profiles are recentred along the axis only.
SampledImmersion scale_about(const SampledImmersion& imm, const AmbientVec& centre, double factor);

/// Rescales the crossing snapshots for levels 1..levels. Throws InsufficientData when a level
/// was not reached and BadAnchor when |II(p_j)| < 0.99 of the running max.
RescaleSequence parabolic_rescale(const Trajectory& traj, int levels);

struct DisplacementResult {
  /// min over snapshots with t > 0 of (B - d) / B, B = t sup max|H| and d the distance
  /// of a sample from the initial immersion.
  double worst_margin = 0.0;
  int worst_snapshot = -1;
  int worst_sample = -1;
};

/// Distance of each snapshot sample from the initial polyline compared with t * sup max|H|.
DisplacementResult displacement_bound(const Trajectory& traj);

}  // namespace mcf
