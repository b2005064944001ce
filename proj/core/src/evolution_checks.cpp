#include "mcf/evolution.hpp"

#include <algorithm>
#include <cmath>

namespace mcf {

namespace {

// Highest derivative of |II| entering the parabolic curvature scale.
constexpr int kScaleOrders = 4;

void require_comparable(const Snapshot& a, const Snapshot& b) {
  if (a.epoch != b.epoch || a.imm.dims != b.imm.dims || a.imm.kind != b.imm.kind) {
    throw Error(ErrorKind::IncomparableSnapshots, "snapshots at steps " + std::to_string(a.step) + " and " +
                                                      std::to_string(b.step) + " use different parametrizations");
  }
  if (!(b.t > a.t)) throw Error(ErrorKind::IncomparableSnapshots, "snapshot times must increase");
}

double max_spacing(const SampledImmersion& imm) {
  const GridDerivatives d = differentiate(imm);
  double best = 0.0;
  for (int dir = 0; dir < d.directions; ++dir) {
    for (const AmbientVec& v : d.first[dir]) best = std::max(best, v.norm() * imm.spacing[static_cast<std::size_t>(dir)]);
  }
  return best;
}

const Snapshot& at(const Trajectory& traj, int index) {
  if (index < 0 || index >= static_cast<int>(traj.snapshots.size())) {
    throw Error(ErrorKind::InvalidArgument, "snapshot index out of range");
  }
  return traj.snapshots[static_cast<std::size_t>(index)];
}

const Snapshot& successor(const Trajectory& traj, int index) {
  const int next = comparable_successor(traj, index);
  if (next < 0) throw Error(ErrorKind::IncomparableSnapshots, "no comparable successor for snapshot " + std::to_string(index));
  return at(traj, next);
}

}  // namespace

int comparable_successor(const Trajectory& traj, int snapshot_index) {
  const Snapshot& a = at(traj, snapshot_index);
  for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
    if (traj.snapshots[j].partner_of == snapshot_index) return static_cast<int>(j);
  }
  for (std::size_t j = static_cast<std::size_t>(snapshot_index) + 1; j < traj.snapshots.size(); ++j) {
    const Snapshot& b = traj.snapshots[j];
    if (b.t > a.t && b.epoch == a.epoch && b.imm.dims == a.imm.dims) return static_cast<int>(j);
  }
  return -1;
}

EvolutionResidual check_metric_evolution(const Snapshot& a, const Snapshot& b) {
  require_comparable(a, b);
  EvolutionResidual out;
  out.dt = b.t - a.t;
  out.spacing = max_spacing(a.imm);
  for (int s = 0; s < a.geom.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    const SmallMat rate = (b.geom.g[us] - a.geom.g[us]) / out.dt + 2.0 * a.geom.A[us];
    const double r = tensor_norm(rate, a.geom.g_inv[us]);
    if (out.worst_sample < 0 || r > out.residual) {
      out.residual = r;
      out.worst_sample = s;
    }
  }
  return out;
}

EvolutionResidual check_metric_evolution(const Trajectory& traj, int snapshot_index) {
  return check_metric_evolution(at(traj, snapshot_index), successor(traj, snapshot_index));
}

EvolutionResidual check_volume_evolution(const Snapshot& a, const Snapshot& b) {
  require_comparable(a, b);
  EvolutionResidual out;
  out.dt = b.t - a.t;
  out.spacing = max_spacing(a.imm);
  for (int s = 0; s < a.geom.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    const double va = a.geom.vol_density[us];
    const double rate = (b.geom.vol_density[us] - va) / (out.dt * va) + a.geom.norm_H_sq[us];
    if (out.worst_sample < 0 || std::abs(rate) > out.residual) {
      out.residual = std::abs(rate);
      out.worst_sample = s;
    }
  }
  const double va = total_volume(a.imm, a.geom);
  const double vb = total_volume(b.imm, b.geom);
  out.volume_nonincreasing = vb <= va * (1.0 + 1e-12);
  return out;
}

EvolutionResidual check_volume_evolution(const Trajectory& traj, int snapshot_index) {
  return check_volume_evolution(at(traj, snapshot_index), successor(traj, snapshot_index));
}

std::vector<double> signed_curvature(const SampledImmersion& curve) {
  const bool closed = curve.kind == ImmersionKind::ClosedCurve;
  const bool graph = curve.kind == ImmersionKind::DiscGraph && curve.m == 1;
  if (!(closed || graph) || curve.stored_dim() != 2) {
    throw Error(ErrorKind::Unsupported, "signed curvature needs a plane curve");
  }
  const GridDerivatives d = differentiate(curve);
  std::vector<double> kappa(static_cast<std::size_t>(curve.sample_count()));
  for (std::size_t s = 0; s < kappa.size(); ++s) {
    const AmbientVec& d1 = d.first[0][s];
    const AmbientVec& d2 = d.second[0][0][s];
    kappa[s] = (d1(0) * d2(1) - d1(1) * d2(0)) / std::pow(d1.norm(), 3);
  }
  return kappa;
}

EvolutionResidual check_curvature_evolution_curve(const Snapshot& a, const Snapshot& b) {
  require_comparable(a, b);
  const SampledImmersion& curve = a.imm;
  const std::vector<double> ka = signed_curvature(curve);
  const std::vector<double> kb = signed_curvature(b.imm);
  const GridDerivatives d = differentiate(curve);
  const int n = curve.sample_count();
  const bool closed = curve.kind == ImmersionKind::ClosedCurve;
  const double h = curve.spacing[0];

  // kappa_ss = (1/|F'|) d/du ((1/|F'|) d kappa/du), central differences.
  auto wrap = [&](int k) { return closed ? ((k % n) + n) % n : k; };
  std::vector<double> ks(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    if (!closed && (k == 0 || k == n - 1)) continue;
    const double speed = d.first[0][static_cast<std::size_t>(k)].norm();
    ks[static_cast<std::size_t>(k)] = (ka[static_cast<std::size_t>(wrap(k + 1))] - ka[static_cast<std::size_t>(wrap(k - 1))]) / (2.0 * h * speed);
  }
  EvolutionResidual out;
  out.dt = b.t - a.t;
  out.spacing = max_spacing(curve);
  const int lo = closed ? 0 : 2;
  const int hi = closed ? n : n - 2;
  for (int k = lo; k < hi; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double speed = d.first[0][uk].norm();
    const double kss = (ks[static_cast<std::size_t>(wrap(k + 1))] - ks[static_cast<std::size_t>(wrap(k - 1))]) / (2.0 * h * speed);
    const double rate = (kb[uk] - ka[uk]) / out.dt;
    const double r = std::abs(rate - kss - ka[uk] * ka[uk] * ka[uk]);
    if (out.worst_sample < 0 || r > out.residual) {
      out.residual = r;
      out.worst_sample = k;
    }
  }
  return out;
}

EvolutionResidual check_curvature_evolution_curve(const Trajectory& traj, int snapshot_index) {
  return check_curvature_evolution_curve(at(traj, snapshot_index), successor(traj, snapshot_index));
}

double parabolic_curvature_scale(const SampledImmersion& imm, const GeometryField& geom) {
  const int nx = imm.dims[0];
  const int ny = imm.dims[1];
  double lam = 0.0;
  // Repeated central differences of |II| along one grid line, in arc length.
  auto scan = [&](const std::vector<int>& idx, bool periodic) {
    const int n = static_cast<int>(idx.size());
    if (n < 3) return;
    std::vector<double> s(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) {
      s[static_cast<std::size_t>(k)] =
          s[static_cast<std::size_t>(k - 1)] + (imm.positions.row(idx[static_cast<std::size_t>(k)]) -
                                                imm.positions.row(idx[static_cast<std::size_t>(k - 1)])).norm();
    }
    const double period =
        periodic ? s.back() + (imm.positions.row(idx.front()) - imm.positions.row(idx.back())).norm() : 0.0;
    std::vector<double> v(static_cast<std::size_t>(n));
    std::vector<char> ok(static_cast<std::size_t>(n), 1);
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = std::sqrt(geom.norm_II_sq[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]);
    for (int order = 0; order <= kScaleOrders; ++order) {
      for (int k = 0; k < n; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (ok[uk] && !imm.in_pole_band(idx[uk])) lam = std::max(lam, std::pow(std::abs(v[uk]), 1.0 / (order + 1)));
      }
      if (order == kScaleOrders) break;
      std::vector<double> d(v.size(), 0.0);
      std::vector<char> dok(v.size(), 0);
      for (int k = 0; k < n; ++k) {
        int km = k - 1, kp = k + 1;
        double sm = 0.0, sp = 0.0;
        if (periodic) {
          if (km < 0) sm = -period;
          if (kp >= n) sp = period;
          km = (km + n) % n;
          kp %= n;
        } else if (km < 0 || kp >= n) {
          continue;
        }
        const auto ukm = static_cast<std::size_t>(km), ukp = static_cast<std::size_t>(kp);
        if (!ok[ukm] || !ok[ukp]) continue;
        d[static_cast<std::size_t>(k)] = (v[ukp] - v[ukm]) / (s[ukp] + sp - s[ukm] - sm);
        dok[static_cast<std::size_t>(k)] = 1;
      }
      v = std::move(d);
      ok = std::move(dok);
    }
  };
  for (int j = 0; j < ny; ++j) {
    std::vector<int> idx;
    for (int i = 0; i < nx; ++i) idx.push_back(imm.index(i, j));
    scan(idx, imm.boundary[0] == Boundary::Periodic);
  }
  if (imm.grid_dimension() == 2) {
    for (int i = 0; i < nx; ++i) {
      std::vector<int> idx;
      for (int j = 0; j < ny; ++j) idx.push_back(imm.index(i, j));
      scan(idx, imm.boundary[1] == Boundary::Periodic);
    }
  }
  return lam;
}

double consistency_bound(const EvolutionResidual& r, double scale, double factor) {
  return factor * (r.dt + r.spacing * r.spacing) * scale;
}

}  // namespace mcf
