#include "mcf/flow.hpp"

#include "mcf/profile_spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcf {

const char* to_string(StopReason reason) {
  return reason == StopReason::SingularStop ? "SingularStop" : "NonSingularStop";
}

StopReason stop_reason_from_string(const std::string& name) {
  if (name == "SingularStop") return StopReason::SingularStop;
  if (name == "NonSingularStop") return StopReason::NonSingularStop;
  throw Error(ErrorKind::ParseError, "unknown stop reason '" + name + "'");
}

void FlowConfig::validate() const {
  if (!(dt_safety > 0.0 && dt_safety <= 0.5)) throw Error(ErrorKind::ValidationError, "dt_safety must lie in (0, 0.5]");
  if (max_steps < 0) throw Error(ErrorKind::ValidationError, "max_steps must be non-negative");
  if (snapshot_stride < 1) throw Error(ErrorKind::ValidationError, "snapshot_stride must be >= 1");
  if (stop_Q <= 0.0 && !(stop_factor > 1.0)) throw Error(ErrorKind::ValidationError, "stop_factor must exceed 1");
  if (reparametrize.mode == ReparamMode::ArcLengthEveryK && reparametrize.every < 1) {
    throw Error(ErrorKind::ValidationError, "reparametrization interval must be >= 1");
  }
  if (reparametrize.curvature_weight < 0.0) throw Error(ErrorKind::ValidationError, "curvature weight must be >= 0");
  if (fixed_dt < 0.0) throw Error(ErrorKind::ValidationError, "fixed_dt must be >= 0");
  initial.validate();
}

SampledImmersion step(const SampledImmersion& imm, const GeometryField& geom, double dt) {
  SampledImmersion next = imm;
  for (int i = 0; i < imm.dims[0]; ++i) {
    for (int j = 0; j < imm.dims[1]; ++j) {
      if (imm.kind == ImmersionKind::DiscGraph) {
        const bool edge0 = i == 0 || i == imm.dims[0] - 1;
        const bool edge1 = imm.m == 2 && (j == 0 || j == imm.dims[1] - 1);
        if (edge0 || edge1) continue;
      }
      const int s = imm.index(i, j);
      next.positions.row(s) += dt * geom.H_vector[static_cast<std::size_t>(s)].transpose();
    }
  }
  if (!next.positions.allFinite()) throw Error(ErrorKind::StepRejected, "non-finite positions after step");
  if (next.kind == ImmersionKind::RotationalProfile) {
    for (int s = 0; s < next.sample_count(); ++s) {
      if (!(next.positions(s, 1) > 0.0)) {
        throw Error(ErrorKind::StepRejected, "profile crossed the axis at sample " + std::to_string(s));
      }
    }
  }
  return next;
}

StepResult advance(const SampledImmersion& imm, const GeometryField& geom, double dt) {
  double trial = dt;
  for (int halvings = 0; halvings <= 20; ++halvings) {
    try {
      StepResult out;
      out.imm = step(imm, geom, trial);
      out.geom = compute_geometry(out.imm);
      out.dt = trial;
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StepRejected && e.kind() != ErrorKind::DegenerateMetric &&
          e.kind() != ErrorKind::FrameFailure) {
        throw;
      }
      trial *= 0.5;
    }
  }
  throw Error(ErrorKind::FlowStalled, "step rejected after 20 halvings of dt = " + std::to_string(dt));
}

double adaptive_dt(const SampledImmersion& imm, const GeometryField& geom, double dt_safety) {
  double max_ii_sq = 0.0;
  for (double v : geom.norm_II_sq) max_ii_sq = std::max(max_ii_sq, v);
  double ds = std::numeric_limits<double>::infinity();
  for (const SmallMat& g : geom.g) {
    for (int d = 0; d < imm.grid_dimension(); ++d) {
      ds = std::min(ds, std::sqrt(g(d, d)) * imm.spacing[static_cast<std::size_t>(d)]);
    }
  }
  const double curvature_scale = max_ii_sq > 0.0 ? 1.0 / max_ii_sq : std::numeric_limits<double>::infinity();
  return dt_safety * std::min(curvature_scale, ds * ds);
}

double mean_curvature_scale(const SampledImmersion& imm, const GeometryField& geom) {
  const GridDerivatives deriv = differentiate(imm);
  double num = 0.0;
  double den = 0.0;
  for (int s = 0; s < imm.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    const double ds = deriv.first[0][us].norm();
    num += std::sqrt(std::max(0.0, geom.norm_II_sq[us])) * ds;
    den += ds;
  }
  return den > 0.0 ? num / den : 0.0;
}

namespace {

// Piecewise-linear monitor density over spline knots and its running integral.
class Monitor {
 public:
  Monitor(const ChordSpline& spline, std::vector<double> weights) : spline_(spline), w_(std::move(weights)) {
    cum_.resize(w_.size());
    cum_[0] = 0.0;
    for (std::size_t k = 1; k < w_.size(); ++k) {
      const double h = spline_.knot(static_cast<int>(k)) - spline_.knot(static_cast<int>(k) - 1);
      cum_[k] = cum_[k - 1] + 0.5 * (w_[k - 1] + w_[k]) * h;
    }
  }

  double measure(double sigma) const {
    const int k = seg(sigma);
    const auto uk = static_cast<std::size_t>(k);
    const double h = spline_.knot(k + 1) - spline_.knot(k);
    const double tau = sigma - spline_.knot(k);
    return cum_[uk] + w_[uk] * tau + (w_[uk + 1] - w_[uk]) * tau * tau / (2.0 * h);
  }

  double inverse(double target) const {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    int k = std::clamp(static_cast<int>(it - cum_.begin()) - 1, 0, static_cast<int>(cum_.size()) - 2);
    const auto uk = static_cast<std::size_t>(k);
    const double h = spline_.knot(k + 1) - spline_.knot(k);
    const double a = (w_[uk + 1] - w_[uk]) / (2.0 * h);
    const double b = w_[uk];
    const double c = cum_[uk] - target;
    double tau;
    if (std::abs(a) * h < 1e-14 * b) {
      tau = -c / b;
    } else {
      const double disc = std::max(0.0, b * b - 4.0 * a * c);
      tau = (2.0 * -c) / (b + std::sqrt(disc));
    }
    return spline_.knot(k) + std::clamp(tau, 0.0, h);
  }

 private:
  int seg(double sigma) const {
    int lo = 0;
    int hi = spline_.size() - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (spline_.knot(mid) <= sigma) lo = mid; else hi = mid;
    }
    return lo;
  }

  const ChordSpline& spline_;
  std::vector<double> w_;
  std::vector<double> cum_;
};

std::vector<double> smoothed_weights(const SampledImmersion& imm, const GeometryField& geom, double curvature_weight,
                                     double mean_II_ref) {
  const int n = imm.sample_count();
  std::vector<double> kappa(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) kappa[static_cast<std::size_t>(s)] = std::sqrt(std::max(0.0, geom.norm_II_sq[static_cast<std::size_t>(s)]));
  const bool periodic = imm.kind == ImmersionKind::ClosedCurve;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> next(kappa.size());
    for (int s = 0; s < n; ++s) {
      const int l = periodic ? (s + n - 1) % n : std::max(s - 1, 0);
      const int r = periodic ? (s + 1) % n : std::min(s + 1, n - 1);
      next[static_cast<std::size_t>(s)] = 0.25 * kappa[static_cast<std::size_t>(l)] + 0.5 * kappa[static_cast<std::size_t>(s)] +
                                          0.25 * kappa[static_cast<std::size_t>(r)];
    }
    kappa = std::move(next);
  }
  std::vector<double> w(kappa.size());
  const double ref = mean_II_ref > 0.0 ? mean_II_ref : 1.0;
  for (std::size_t s = 0; s < w.size(); ++s) w[s] = 1.0 + curvature_weight * kappa[s] / ref;
  return w;
}

}  // namespace

SampledImmersion redistribute(const SampledImmersion& imm, const GeometryField& geom, double curvature_weight,
                              double mean_II_ref) {
  const int n = imm.sample_count();
  const std::vector<double> w = smoothed_weights(imm, geom, curvature_weight, mean_II_ref);
  SampledImmersion out = imm;

  if (imm.kind == ImmersionKind::ClosedCurve) {
    const int ghosts = 3;
    const ChordSpline spline = ChordSpline::closed(imm, ghosts);
    std::vector<double> knot_w(static_cast<std::size_t>(spline.size()));
    for (int k = 0; k < spline.size(); ++k) knot_w[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>((((k - ghosts) % n) + n) % n)];
    const Monitor monitor(spline, knot_w);
    const double m0 = monitor.measure(spline.knot(ghosts));
    const double total = monitor.measure(spline.knot(ghosts + n)) - m0;
    for (int k = 0; k < n; ++k) {
      const double sigma = monitor.inverse(m0 + total * k / n);
      out.positions.row(k) = spline.value(sigma).transpose();
    }
  } else if (imm.kind == ImmersionKind::RotationalProfile) {
    const int ghosts = 3;
    const ChordSpline spline = ChordSpline::profile(imm, ghosts);
    std::vector<double> knot_w(static_cast<std::size_t>(spline.size()));
    for (int k = 0; k < spline.size(); ++k) {
      int q = k - ghosts;
      if (q < 0) q = -1 - q;
      if (q >= n) q = 2 * n - 1 - q;
      knot_w[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(q)];
    }
    const Monitor monitor(spline, knot_w);
    const double m0 = monitor.measure(spline.axis_start());
    const double total = monitor.measure(spline.axis_end()) - m0;
    for (int k = 0; k < n; ++k) {
      const double sigma = monitor.inverse(m0 + total * (k + 0.5) / n);
      out.positions.row(k) = spline.value(sigma).transpose();
    }
  } else {
    return out;
  }
  out.validate();
  return out;
}

Trajectory run(const FlowConfig& config) {
  config.validate();
  Trajectory traj;
  traj.scenario_id = config.scenario_id;

  SampledImmersion imm = config.initial;
  GeometryField geom = compute_geometry(imm);
  const bool reparam = config.reparametrize.mode == ReparamMode::ArcLengthEveryK &&
                       imm.kind != ImmersionKind::DiscGraph;
  const double mean_ii_ref = mean_curvature_scale(imm, geom);
  if (reparam) {
    imm = redistribute(imm, geom, config.reparametrize.curvature_weight, mean_ii_ref);
    geom = compute_geometry(imm);
  }

  GeometrySummary summary = summarize(imm, geom);
  traj.Q0 = summary.II.value;
  traj.stop_Q = config.stop_Q > 0.0 ? config.stop_Q : config.stop_factor * traj.Q0;
  if (!(traj.stop_Q > traj.Q0)) throw Error(ErrorKind::ValidationError, "stop_Q must exceed the initial max|II|");

  double t = 0.0;
  double integral = 0.0;
  int epoch = 0;
  double running_max = summary.II.value;
  int next_level = 1;
  double last_logged = std::log(std::max(summary.II.value, 1e-300));
  long last_logged_step = 0;
  bool partner_pending = false;
  int partner_source = -1;

  auto max_dtg = [](const GeometryField& g) {
    double best = 0.0;
    for (double a : g.norm_A_sq) best = std::max(best, 2.0 * std::sqrt(std::max(0.0, a)));
    return best;
  };

  auto make_row = [&](long step_index, double dt) {
    DiagnosticRow row;
    row.step = step_index;
    row.t = t;
    row.dt = dt;
    row.max_II = summary.II.value;
    row.max_H = summary.H.value;
    row.max_A = summary.A.value;
    row.volume = summary.volume;
    row.max_dtg = max_dtg(geom);
    row.int_dtg = integral;
    row.running_max_II = running_max;
    row.epoch = epoch;
    return row;
  };

  auto snapshot = [&](long step_index) {
    Snapshot snap;
    snap.step = step_index;
    snap.t = t;
    snap.epoch = epoch;
    snap.running_max_II = running_max;
    snap.imm = imm;
    snap.geom = geom;
    traj.snapshots.push_back(std::move(snap));
    return static_cast<int>(traj.snapshots.size()) - 1;
  };

  traj.diagnostics.push_back(make_row(0, 0.0));
  snapshot(0);
  partner_pending = config.record_partners;
  partner_source = 0;

  traj.stop_reason = StopReason::NonSingularStop;
  long step_index = 0;
  while (step_index < config.max_steps) {
    const double dt_target = config.fixed_dt > 0.0 ? config.fixed_dt : adaptive_dt(imm, geom, config.dt_safety);
    const double dtg_before = max_dtg(geom);
    const double volume_before = summary.volume;
    StepResult next = advance(imm, geom, dt_target);
    ++step_index;
    t += next.dt;
    integral += dtg_before * next.dt;
    imm = std::move(next.imm);
    geom = std::move(next.geom);
    summary = summarize(imm, geom);
    if (summary.volume > volume_before * (1.0 + 1e-12)) ++traj.volume_increase_events;
    running_max = std::max(running_max, summary.II.value);

    bool recorded_row = false;
    auto log_row = [&]() {
      if (recorded_row) return;
      traj.diagnostics.push_back(make_row(step_index, next.dt));
      last_logged = std::log(std::max(summary.II.value, 1e-300));
      last_logged_step = step_index;
      recorded_row = true;
    };

    if (partner_pending) {
      const int idx = snapshot(step_index);
      traj.snapshots[static_cast<std::size_t>(idx)].partner_of = partner_source;
      partner_pending = false;
      log_row();
    }

    // Crossing snapshots see the same state that raised the running max.
    while (next_level <= config.crossing_levels && running_max >= traj.Q0 * std::ldexp(1.0, next_level)) {
      log_row();
      const int idx = snapshot(step_index);
      traj.snapshots[static_cast<std::size_t>(idx)].crossing_level = next_level;
      ++next_level;
    }

    if (reparam && step_index % config.reparametrize.every == 0) {
      imm = redistribute(imm, geom, config.reparametrize.curvature_weight, mean_ii_ref);
      geom = compute_geometry(imm);
      summary = summarize(imm, geom);
      ++epoch;
    }

    const bool singular = summary.II.value >= traj.stop_Q;

    const double log_ii = std::log(std::max(summary.II.value, 1e-300));
    if (std::abs(log_ii - last_logged) >= 2e-3 || step_index - last_logged_step >= 500 || singular ||
        step_index == config.max_steps) {
      log_row();
    }

    if (singular) {
      traj.stop_reason = StopReason::SingularStop;
      snapshot(step_index);
      break;
    }
    if (step_index % config.snapshot_stride == 0) {
      log_row();
      partner_source = snapshot(step_index);
      partner_pending = config.record_partners;
    }
  }
  traj.steps = step_index;
  if (traj.stop_reason == StopReason::NonSingularStop && traj.snapshots.back().step != step_index) snapshot(step_index);
  return traj;
}

}  // namespace mcf
