#include "mcf/estimates.hpp"

#include "mcf/grid_distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcf {

CheckRecord make_record(std::string check_id, std::string scenario_id, double worst_margin, std::string location,
                        double tolerance) {
  CheckRecord r;
  r.check_id = std::move(check_id);
  r.scenario_id = std::move(scenario_id);
  r.worst_margin = worst_margin;
  r.worst_location = std::move(location);
  r.tolerance = tolerance;
  r.pass = worst_margin >= -tolerance;
  return r;
}

ToleranceProfile tolerance_profile_from_string(const std::string& name) {
  if (name == "default") return ToleranceProfile::Default;
  if (name == "strict") return ToleranceProfile::Strict;
  throw Error(ErrorKind::InvalidArgument, "unknown tolerance profile '" + name + "'");
}

const char* to_string(ToleranceProfile profile) {
  return profile == ToleranceProfile::Strict ? "strict" : "default";
}

Tolerances tolerances(ToleranceProfile profile) {
  Tolerances t;
  if (profile == ToleranceProfile::Strict) {
    t.identity = 1e-13;
    t.inequality = 1e-11;
    t.discrete = 0.02;
    t.consistency_factor = 5.0;
  }
  return t;
}

namespace {

std::string at_sample(const std::string& where, int s) {
  return (where.empty() ? "" : where + " ") + "sample " + std::to_string(s);
}

// Tracks the smallest margin and where it occurred.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  std::string location;

  void offer(double m, const std::string& loc) {
    if (m < margin) {
      margin = m;
      location = loc;
    }
  }
  double value() const { return std::isfinite(margin) ? margin : 0.0; }
};

double frobenius_sq(const Eigen::MatrixXd& M) { return M.squaredNorm(); }

}  // namespace

std::vector<CheckRecord> identity_checks(const GeometryField& geom, const std::string& scenario, const Tolerances& tol,
                                         const std::string& where) {
  Worst trace, cs_m, cs_n, a_le, sym;
  long zero_mismatch = 0;
  std::string zero_loc;
  const double tiny = std::numeric_limits<double>::min();
  for (int s = 0; s < geom.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    const SmallMat& gi = geom.g_inv[us];
    const SmallMat& A = geom.A[us];
    const double trA = (gi * A).trace();
    const double H2 = geom.norm_H_sq[us];
    const double II2 = geom.norm_II_sq[us];
    const double A2 = geom.norm_A_sq[us];
    const std::string loc = at_sample(where, s);

    trace.offer(-std::abs(trA - H2) / std::max({H2, II2, tiny}), loc);
    cs_m.offer((geom.m * A2 - trA * trA) / std::max(geom.m * A2, tiny), loc);
    cs_n.offer((geom.n * A2 - trA * trA) / std::max(geom.n * A2, tiny), loc);
    const double hii = std::sqrt(H2 * II2);
    a_le.offer((hii - std::sqrt(A2)) / std::max(hii, tiny), loc);
    for (int alpha = 0; alpha < geom.n; ++alpha) {
      const SmallMat& h = geom.h_at(s, alpha);
      const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
      sym.offer(-asym, loc);
    }
    if ((A2 == 0.0) != (H2 == 0.0)) {
      if (zero_mismatch == 0) zero_loc = loc;
      ++zero_mismatch;
    }
  }
  std::vector<CheckRecord> out;
  out.push_back(make_record("trace_A", scenario, trace.value(), trace.location, tol.identity));
  out.push_back(make_record("A_cauchy_schwarz", scenario, cs_m.value(), cs_m.location, tol.inequality));
  out.push_back(make_record("A_le_H_II", scenario, a_le.value(), a_le.location, tol.inequality));
  out.push_back(make_record("h_symmetry", scenario, sym.value(), sym.location, 0.0));
  out.push_back(make_record("A_zero_iff_H_zero", scenario, -static_cast<double>(zero_mismatch), zero_loc, 0.0));
  CheckRecord codim = make_record("A_cauchy_schwarz_codim", scenario, cs_n.value(), cs_n.location, tol.inequality);
  codim.informational = true;
  codim.note = "(tr A)^2 <= n |A|^2 with n the codimension";
  out.push_back(codim);
  return out;
}

CheckRecord hessian_bound_check(const GraphData& graph, const std::string& scenario, double tol) {
  Worst w;
  for (int s = 0; s < graph.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    const double dpsi = frobenius_sq(graph.D_psi[us]);
    double d2 = 0.0;
    for (int alpha = 0; alpha < graph.n; ++alpha) d2 += graph.hessian(s, alpha).squaredNorm();
    w.offer(std::pow(1.0 + dpsi, 3) * graph.norm_II_sq[us] - d2, at_sample("", s));
  }
  return make_record("hessian_bound", scenario, w.value(), w.location, tol);
}

CheckRecord eigen_bound_check(const GraphData& graph, const std::string& scenario, double tol) {
  Worst w;
  for (int s = 0; s < graph.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    const double upper = 1.0 + frobenius_sq(graph.D_psi[us]);
    const Eigen::MatrixXd gt = graph.g_tan[us];
    for (const Eigen::MatrixXd* M : {&gt, &graph.g_nor[us]}) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*M, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues().minCoeff();
      const double lmax = es.eigenvalues().maxCoeff();
      const double m = std::min({lmin - 1.0, upper - lmax, 1.0 / lmax - 1.0 / upper, 1.0 - 1.0 / lmin});
      w.offer(m, at_sample("", s));
    }
  }
  return make_record("eigen_bound", scenario, w.value(), w.location, tol);
}

namespace {

// Eigenvalues of g0^-1 g1 for small symmetric positive definite matrices.
Eigen::VectorXd relative_eigenvalues(const SmallMat& g0, const SmallMat& g1) {
  if (g0.rows() == 1) return Eigen::VectorXd::Constant(1, g1(0, 0) / g0(0, 0));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(g1), Eigen::MatrixXd(g0),
                                                               Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

double metric_deviation(const std::vector<SmallMat>& g0, const std::vector<SmallMat>& g1) {
  if (g0.size() != g1.size()) throw Error(ErrorKind::InvalidArgument, "metric fields differ in size");
  double eps = 0.0;
  for (std::size_t s = 0; s < g0.size(); ++s) {
    const Eigen::VectorXd lam = relative_eigenvalues(g0[s], g1[s]);
    eps = std::max({eps, std::abs(lam.minCoeff() - 1.0), std::abs(lam.maxCoeff() - 1.0)});
  }
  return eps;
}

BallInclusionResult ball_inclusion_check(const SampledImmersion& layout, const std::vector<SmallMat>& g0,
                                         const std::vector<SmallMat>& g1, double eps, int p, double r,
                                         const std::string& scenario, int stencil_radius) {
  if (!(eps >= 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must lie in [0, 1)");
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  const double measured = metric_deviation(g0, g1);
  if (measured > eps * (1.0 + 1e-12) + 1e-15) {
    throw Error(ErrorKind::HypothesisViolated, "metrics deviate by " + std::to_string(measured) + " > epsilon " +
                                                   std::to_string(eps));
  }
  const MetricGrid mg0 = metric_grid(layout, g0);
  const MetricGrid mg1 = metric_grid(layout, g1);
  const int source = metric_grid_node(layout, mg0, p);
  const std::vector<double> d0 = metric_distances(mg0, source, stencil_radius);
  const std::vector<double> d1 = metric_distances(mg1, source, stencil_radius);

  BallInclusionResult out;
  out.epsilon = eps;
  const double r_in = r / std::sqrt(1.0 + eps);
  const double r_out = r / std::sqrt(1.0 - eps);
  Worst w;
  auto node_name = [&](int node) {
    if (mg0.grid.ny == 1) return "node " + std::to_string(node);
    return "node (" + std::to_string(node / mg0.grid.ny) + "," + std::to_string(node % mg0.grid.ny) + ")";
  };
  for (std::size_t k = 0; k < d0.size(); ++k) {
    if (d0[k] < r_in) {
      ++out.inner_count;
      w.offer(r - d1[k], node_name(static_cast<int>(k)));
    }
    if (d1[k] < r) {
      ++out.ball_count;
      w.offer(r_out - d0[k], node_name(static_cast<int>(k)));
    }
    if (d0[k] < r_out) ++out.outer_count;
  }
  out.record = make_record("ball_inclusion", scenario, w.value(), w.location, 0.0);
  out.record.pass = out.record.pass && w.value() > 0.0;
  return out;
}

namespace {

// Accumulated metric-change integral at a snapshot; rows are logged at every snapshot step.
double integral_at(const Trajectory& traj, const Snapshot& snap) {
  const auto& rows = traj.diagnostics;
  const auto it = std::lower_bound(rows.begin(), rows.end(), snap.step,
                                   [](const DiagnosticRow& row, long step) { return row.step < step; });
  if (it != rows.end() && it->step == snap.step) return it->int_dtg;
  // Fall back to interpolation in time.
  const auto jt = std::lower_bound(rows.begin(), rows.end(), snap.t,
                                   [](const DiagnosticRow& row, double t) { return row.t < t; });
  if (jt == rows.begin()) return rows.front().int_dtg;
  if (jt == rows.end()) return rows.back().int_dtg;
  const DiagnosticRow& b = *jt;
  const DiagnosticRow& a = *(jt - 1);
  const double w = (snap.t - a.t) / (b.t - a.t);
  return (1.0 - w) * a.int_dtg + w * b.int_dtg;
}

}  // namespace

CheckRecord metric_equivalence_check(const Trajectory& traj, double tol) {
  Worst w;
  int compared = 0;
  for (std::size_t b = 0; b < traj.snapshots.size(); ++b) {
    const Snapshot& base = traj.snapshots[b];
    // Base = earliest snapshot of its epoch.
    bool earliest = true;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const Snapshot& o = traj.snapshots[k];
      if (o.epoch == base.epoch && (o.t < base.t || (o.t == base.t && k < b))) earliest = false;
    }
    if (!earliest) continue;
    const double I0 = integral_at(traj, base);
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const Snapshot& snap = traj.snapshots[k];
      if (snap.epoch != base.epoch || !(snap.t > base.t) || snap.imm.dims != base.imm.dims) continue;
      const double I = integral_at(traj, snap) - I0;
      const double lo = std::exp(-2.0 * I);
      const double hi = std::exp(2.0 * I);
      for (int s = 0; s < snap.geom.sample_count(); ++s) {
        const auto us = static_cast<std::size_t>(s);
        const Eigen::VectorXd lam = relative_eigenvalues(base.geom.g[us], snap.geom.g[us]);
        w.offer(std::min(lam.minCoeff() - lo, hi - lam.maxCoeff()),
                "snapshot " + std::to_string(k) + " vs " + std::to_string(b) + " sample " + std::to_string(s));
      }
      ++compared;
    }
  }
  CheckRecord rec = make_record("metric_equivalence", traj.scenario_id, w.value(), w.location, tol);
  rec.note = std::to_string(compared) + " snapshot pairs";
  return rec;
}

namespace {

int snapshot_at_time(const Trajectory& traj, double t) {
  int best = -1;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    if (std::abs(traj.snapshots[k].t - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
      best = static_cast<int>(k);
      break;
    }
  }
  if (best < 0) throw Error(ErrorKind::InvalidArgument, "no snapshot at t = " + std::to_string(t));
  return best;
}

}  // namespace

IntegratedEstimateResult integrated_estimate_check(const Trajectory& traj, const IntegratedEstimateInput& in,
                                                   const std::string& scenario, double tol) {
  if (!(in.p > 1.0)) throw Error(ErrorKind::InvalidArgument, "p must exceed 1");
  if (!(in.t1 > in.t0)) throw Error(ErrorKind::InvalidArgument, "need t0 < t1");
  if (!(in.t1 < in.T)) throw Error(ErrorKind::PreconditionUnsatisfied, "window reaches the singular time");
  const Snapshot& a = traj.snapshots[static_cast<std::size_t>(snapshot_at_time(traj, in.t0))];
  const Snapshot& b = traj.snapshots[static_cast<std::size_t>(snapshot_at_time(traj, in.t1))];
  if (a.epoch != b.epoch || a.imm.dims != b.imm.dims) {
    throw Error(ErrorKind::IncomparableSnapshots, "window spans a reparametrization");
  }

  IntegratedEstimateResult out;
  double Cp = 0.0;
  double CH = 0.0;
  for (const DiagnosticRow& row : traj.diagnostics) {
    if (row.t < in.t0 || row.t > in.t1) continue;
    Cp = std::max(Cp, std::pow(row.max_II, in.p) * (in.T - row.t));
    CH = std::max(CH, row.max_H);
  }
  if (in.C_p > 0.0 && Cp > in.C_p * (1.0 + 1e-12)) {
    throw Error(ErrorKind::PreconditionUnsatisfied, "|II|^p (T - t) reaches " + std::to_string(Cp) + " > C = " +
                                                        std::to_string(in.C_p));
  }
  if (in.C_H > 0.0 && CH > in.C_H * (1.0 + 1e-12)) {
    throw Error(ErrorKind::PreconditionUnsatisfied, "max|H| reaches " + std::to_string(CH) + " > C_H = " +
                                                        std::to_string(in.C_H));
  }
  out.C_p = in.C_p > 0.0 ? in.C_p : Cp;
  out.C_H = in.C_H > 0.0 ? in.C_H : CH;

  out.K = 1.0;
  for (const Snapshot& snap : traj.snapshots) {
    if (snap.epoch != a.epoch || snap.t < in.t0 || snap.t > in.t1 || snap.imm.dims != a.imm.dims) continue;
    for (int s = 0; s < snap.geom.sample_count(); ++s) {
      const auto us = static_cast<std::size_t>(s);
      out.K = std::max(out.K, relative_eigenvalues(a.geom.g[us], snap.geom.g[us]).maxCoeff());
    }
  }
  out.C_prime = out.K * out.C_H * std::pow(out.C_p, 1.0 / in.p);
  const double e = 1.0 - 1.0 / in.p;
  out.rhs = 2.0 * out.C_prime / e * (std::pow(in.T - in.t0, e) - std::pow(in.T - in.t1, e));

  int worst = -1;
  for (int s = 0; s < a.geom.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    const double lhs = tensor_norm(b.geom.g[us] - a.geom.g[us], a.geom.g_inv[us]);
    if (worst < 0 || lhs > out.lhs) {
      out.lhs = lhs;
      worst = s;
    }
  }
  const double margin = out.rhs > 0.0 ? (out.rhs - out.lhs) / out.rhs : -out.lhs;
  out.record = make_record("integrated_estimate", scenario, margin, "sample " + std::to_string(worst), tol);
  return out;
}

}  // namespace mcf
