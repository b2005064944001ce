#include "mcf/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcf {

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::II: return "II";
    case Quantity::H: return "H";
    case Quantity::A: return "A";
  }
  return "?";
}

const char* to_string(BlowupType type) {
  switch (type) {
    case BlowupType::TypeI: return "TypeI";
    case BlowupType::GeneralizedRate: return "GeneralizedRate";
    case BlowupType::SuperTypeI: return "SuperTypeI";
    case BlowupType::BelowRange: return "BelowRange";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Blowup: return "Blowup";
    case Verdict::NoBlowup: return "NoBlowup";
    case Verdict::NoVerdict: return "NoVerdict";
  }
  return "?";
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = std::numeric_limits<double>::infinity();
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

LineFit fit_for_T(const std::vector<double>& t, const std::vector<double>& logq, double T) {
  std::vector<double> x(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) x[i] = std::log(T - t[i]);
  return fit_line(x, logq);
}

double interpolate(const std::vector<double>& t, const std::vector<double>& q, double at) {
  if (at <= t.front()) return q.front();
  if (at >= t.back()) return q.back();
  const auto it = std::upper_bound(t.begin(), t.end(), at);
  const std::size_t k = static_cast<std::size_t>(it - t.begin());
  const double w = (at - t[k - 1]) / (t[k] - t[k - 1]);
  return (1.0 - w) * q[k - 1] + w * q[k];
}

}  // namespace

BlowupFit fit_blowup(const std::vector<double>& t, const std::vector<double>& q, Quantity quantity,
                     const FitOptions& options) {
  if (t.size() != q.size() || t.size() < 2) throw Error(ErrorKind::InsufficientData, "series too short");
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0.0) || !std::isfinite(q[i])) throw Error(ErrorKind::InvalidArgument, "series values must be positive");
    if (i > 0 && !(t[i] > t[i - 1])) throw Error(ErrorKind::InvalidArgument, "series times must increase");
  }
  const double q_last = q.back();
  const long last_decade = std::count_if(q.begin(), q.end(), [&](double v) { return v >= q_last / 10.0; });
  if (last_decade < options.min_points) {
    throw Error(ErrorKind::InsufficientData, std::to_string(last_decade) + " rows in the last decade of growth, need " +
                                                 std::to_string(options.min_points));
  }

  // Trailing window where q stays above window_factor * q(0).
  const double threshold = options.window_factor * q.front();
  std::size_t lo = q.size();
  while (lo > 0 && q[lo - 1] >= threshold) --lo;
  if (q.size() - lo < static_cast<std::size_t>(options.min_points)) {
    throw Error(ErrorKind::InsufficientData, "fewer than " + std::to_string(options.min_points) +
                                                 " rows with q >= " + std::to_string(options.window_factor) + " q(0)");
  }

  // Thin to points evenly spaced in log q so dense late rows do not dominate.
  std::vector<double> ft, flogq;
  const double llo = std::log(q[lo]);
  const double lhi = std::log(q_last);
  const int want = std::max(options.max_points, 2);
  double next_target = llo;
  const double step = (lhi - llo) / (want - 1);
  for (std::size_t i = lo; i < q.size(); ++i) {
    const double lq = std::log(q[i]);
    if (lq >= next_target || i + 1 == q.size()) {
      ft.push_back(t[i]);
      flogq.push_back(lq);
      while (next_target <= lq) next_target += step > 0.0 ? step : 1.0;
    }
  }
  if (ft.size() < 3) throw Error(ErrorKind::InsufficientData, "fit window has no growth");

  const double t_last = t.back();
  const double width = t_last - t[lo];
  if (!(width > 0.0)) throw Error(ErrorKind::InsufficientData, "fit window has zero length");

  // Search z = log(T - t_last): coarse scan, then golden section around the best cell.
  const double z_lo = std::log(1e-9 * width);
  const double z_hi = std::log(10.0 * width);
  auto objective = [&](double z) { return fit_for_T(ft, flogq, t_last + std::exp(z)).rms; };
  const int scan = 200;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= scan; ++k) {
    const double v = objective(z_lo + (z_hi - z_lo) * k / scan);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double a = z_lo + (z_hi - z_lo) * std::max(best - 1, 0) / scan;
  double b = z_lo + (z_hi - z_lo) * std::min(best + 1, scan) / scan;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = objective(d);
    }
  }
  const double T = t_last + std::exp(0.5 * (a + b));
  const LineFit line = fit_for_T(ft, flogq, T);

  BlowupFit fit;
  fit.quantity = quantity;
  fit.T_est = T;
  fit.t_lo = t[lo];
  fit.t_hi = t_last;
  fit.residual_rms = line.rms;
  fit.points = static_cast<int>(ft.size());
  if (!(line.slope < 0.0) || !std::isfinite(line.rms)) {
    throw Error(ErrorKind::FitDiverged, std::string("no blow-up law fits ") + to_string(quantity));
  }
  fit.p_est = -1.0 / line.slope;
  if (line.rms > options.max_rms) {
    throw Error(ErrorKind::FitDiverged, std::string("fit residual ") + std::to_string(line.rms) + " for " +
                                            to_string(quantity) + " exceeds " + std::to_string(options.max_rms));
  }
  for (std::size_t i = lo; i < q.size(); ++i) {
    fit.C_est = std::max(fit.C_est, std::pow(q[i], fit.p_est) * (T - t[i]));
  }
  return fit;
}

std::vector<double> diagnostic_series(const Trajectory& traj, Quantity quantity) {
  std::vector<double> out;
  out.reserve(traj.diagnostics.size());
  for (const DiagnosticRow& row : traj.diagnostics) {
    out.push_back(quantity == Quantity::II ? row.max_II : quantity == Quantity::H ? row.max_H : row.max_A);
  }
  return out;
}

namespace {

std::vector<double> diagnostic_times(const Trajectory& traj) {
  std::vector<double> t;
  t.reserve(traj.diagnostics.size());
  for (const DiagnosticRow& row : traj.diagnostics) t.push_back(row.t);
  return t;
}

}  // namespace

BlowupFit estimate_singular_time(const Trajectory& traj, Quantity quantity, const FitOptions& options) {
  if (traj.stop_reason != StopReason::SingularStop) {
    throw Error(ErrorKind::InsufficientData, "trajectory did not reach the singular stop threshold");
  }
  return fit_blowup(diagnostic_times(traj), diagnostic_series(traj, quantity), quantity, options);
}

BlowupType classify_type(const BlowupFit& fit, double tau) {
  const double p = fit.p_est;
  if (p <= 1.0) return BlowupType::BelowRange;
  if (std::abs(p - 2.0) <= tau) return BlowupType::TypeI;
  if (p > 2.0 + tau) return BlowupType::SuperTypeI;
  return BlowupType::GeneralizedRate;
}

std::vector<GrowthRow> blowup_monitor(const Trajectory& traj, const FitOptions& options) {
  std::vector<GrowthRow> rows;
  for (Quantity quantity : {Quantity::II, Quantity::H, Quantity::A}) {
    GrowthRow row;
    row.quantity = quantity;
    if (traj.stop_reason != StopReason::SingularStop) {
      row.note = "non-singular trajectory";
      rows.push_back(row);
      continue;
    }
    const std::vector<double> t = diagnostic_times(traj);
    const std::vector<double> q = diagnostic_series(traj, quantity);
    try {
      row.fit = fit_blowup(t, q, quantity, options);
    } catch (const Error& e) {
      row.note = e.what();
      rows.push_back(row);
      continue;
    }
    const double T = row.fit.T_est;
    const double t_start = T - (T - t.front()) / 10.0;
    row.growth = q.back() / interpolate(t, q, t_start);
    row.exponent = -1.0 / row.fit.p_est;
    row.verdict = row.growth >= 10.0 && row.fit.residual_rms < 0.1 ? Verdict::Blowup : Verdict::NoBlowup;
    rows.push_back(row);
  }
  return rows;
}

SampledImmersion scale_about(const SampledImmersion& imm, const AmbientVec& centre, double factor) {
  SampledImmersion out = imm;
  AmbientVec c = centre;
  if (imm.kind == ImmersionKind::RotationalProfile) c(1) = 0.0;
  for (int s = 0; s < imm.sample_count(); ++s) {
    out.positions.row(s) = ((imm.position(s) - c) * factor).transpose();
  }
  return out;
}

namespace {

double relative(double scaled, double expected, double scale) {
  const double denom = std::max(std::abs(expected), scale);
  return denom > 0.0 ? std::abs(scaled - expected) / denom : std::abs(scaled - expected);
}

}  // namespace

RescaleSequence parabolic_rescale(const Trajectory& traj, int levels) {
  if (levels < 1) throw Error(ErrorKind::InvalidArgument, "levels must be >= 1");
  RescaleSequence seq;
  seq.scenario_id = traj.scenario_id;
  for (int level = 1; level <= levels; ++level) {
    int idx = -1;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      if (traj.snapshots[k].crossing_level == level) {
        idx = static_cast<int>(k);
        break;
      }
    }
    if (idx < 0) {
      throw Error(ErrorKind::InsufficientData, "max|II| never reached 2^" + std::to_string(level) + " Q0");
    }
    const Snapshot& snap = traj.snapshots[static_cast<std::size_t>(idx)];
    const GeometrySummary summary = summarize(snap.imm, snap.geom);

    RescaleEntry e;
    e.level = level;
    e.snapshot = idx;
    e.step = snap.step;
    e.t = snap.t;
    e.anchor = summary.II.sample;
    e.Q = summary.II.value;
    e.running_max = snap.running_max_II;
    if (e.Q < 0.99 * e.running_max) {
      throw Error(ErrorKind::BadAnchor, "|II(p_j)| = " + std::to_string(e.Q) + " is below 0.99 Q_j = " +
                                            std::to_string(0.99 * e.running_max) + " at level " + std::to_string(level));
    }
    e.imm = scale_about(snap.imm, snap.imm.position(e.anchor), e.Q);
    e.geom = compute_geometry(e.imm);
    e.anchor_II = std::sqrt(e.geom.norm_II_sq[static_cast<std::size_t>(e.anchor)]);
    e.history_max = e.running_max / e.Q;

    const double Q = e.Q;
    const double Qm = std::pow(Q, snap.geom.m);
    double max_II = 0.0;
    double max_H = 0.0;
    double max_A = 0.0;
    for (int s = 0; s < snap.geom.sample_count(); ++s) {
      const auto us = static_cast<std::size_t>(s);
      max_II = std::max(max_II, std::sqrt(snap.geom.norm_II_sq[us]));
      max_H = std::max(max_H, std::sqrt(snap.geom.norm_H_sq[us]));
      max_A = std::max(max_A, std::sqrt(snap.geom.norm_A_sq[us]));
    }
    // Values far below the field maximum carry only rounding noise; compare them to it.
    const double floor = 1e-6;
    for (int s = 0; s < snap.geom.sample_count(); ++s) {
      const auto us = static_cast<std::size_t>(s);
      const double ii = std::sqrt(snap.geom.norm_II_sq[us]);
      const double h = std::sqrt(snap.geom.norm_H_sq[us]);
      const double a = std::sqrt(snap.geom.norm_A_sq[us]);
      const double r_ii = relative(std::sqrt(e.geom.norm_II_sq[us]) * Q, ii, floor * max_II);
      const double r_h = relative(std::sqrt(e.geom.norm_H_sq[us]) * Q, h, floor * max_H);
      const double r_a = relative(std::sqrt(e.geom.norm_A_sq[us]) * Q * Q, a, floor * max_A);
      const double r_r = relative(e.geom.scalar_R[us] * Q * Q, snap.geom.scalar_R[us], snap.geom.norm_II_sq[us] + snap.geom.norm_H_sq[us]);
      const double r_v = relative(e.geom.vol_density[us], Qm * snap.geom.vol_density[us], 0.0);
      e.H_residual = std::max(e.H_residual, r_h);
      e.scaling_residual = std::max({e.scaling_residual, r_ii, r_h, r_a, r_r, r_v});
    }
    seq.entries.push_back(std::move(e));
  }
  return seq;
}

namespace {

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double w = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + w * ab)).norm();
}

double segment_distance(const AmbientVec& p, const AmbientVec& a, const AmbientVec& b) {
  const AmbientVec ab = b - a;
  const double len2 = ab.squaredNorm();
  const double w = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + w * ab)).norm();
}

// Distance from F_t(s) to the initial surface.
double distance_to_initial(const SampledImmersion& initial, const SampledImmersion& now, int s) {
  const int n = initial.sample_count();
  if (initial.kind == ImmersionKind::ClosedCurve) {
    const AmbientVec p = now.position(s);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) best = std::min(best, segment_distance(p, initial.position(k), initial.position((k + 1) % n)));
    return best;
  }
  if (initial.kind == ImmersionKind::RotationalProfile) {
    // Distance to a surface of revolution is the meridian-plane distance to the profile,
    // closed across the axis by the mirrored end samples.
    const Eigen::Vector2d p(now.positions(s, 0), now.positions(s, 1));
    auto pt = [&](int k) { return Eigen::Vector2d(initial.positions(k, 0), initial.positions(k, 1)); };
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < n; ++k) best = std::min(best, segment_distance(p, pt(k), pt(k + 1)));
    const Eigen::Vector2d first = pt(0);
    const Eigen::Vector2d last = pt(n - 1);
    best = std::min(best, segment_distance(p, first, Eigen::Vector2d(first(0), -first(1))));
    best = std::min(best, segment_distance(p, last, Eigen::Vector2d(last(0), -last(1))));
    return best;
  }
  return (now.position(s) - initial.position(s)).norm();
}

}  // namespace

DisplacementResult displacement_bound(const Trajectory& traj) {
  if (traj.snapshots.empty()) throw Error(ErrorKind::InsufficientData, "trajectory has no snapshots");
  const SampledImmersion& initial = traj.snapshots.front().imm;
  DisplacementResult out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  if (traj.snapshots.size() < 2) throw Error(ErrorKind::InsufficientData, "need a snapshot with t > 0");
  std::size_t row = 0;
  double sup_H = 0.0;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const Snapshot& snap = traj.snapshots[k];
    while (row < traj.diagnostics.size() && traj.diagnostics[row].t <= snap.t) {
      sup_H = std::max(sup_H, traj.diagnostics[row].max_H);
      ++row;
    }
    // Pole-band samples are excluded from logged maxima, so include the snapshot's own field.
    for (double h2 : snap.geom.norm_H_sq) sup_H = std::max(sup_H, std::sqrt(h2));
    const double bound = sup_H * snap.t;
    if (!(bound > 0.0)) continue;
    for (int s = 0; s < snap.imm.sample_count(); ++s) {
      const double margin = (bound - distance_to_initial(initial, snap.imm, s)) / bound;
      if (margin < out.worst_margin) {
        out.worst_margin = margin;
        out.worst_snapshot = static_cast<int>(k);
        out.worst_sample = s;
      }
    }
  }
  return out;
}

}  // namespace mcf
