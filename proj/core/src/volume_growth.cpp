#include "mcf/estimates.hpp"

#include "mcf/grid_distance.hpp"
#include "mcf/profile_spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcf {

namespace {

// Surface of revolution seen as a graph over the tangent plane at a meridian sample.
// A chart point (a, b) is lifted along the anchor normal until its meridian-plane image
// (x, sqrt(y^2 + z^2)) lies on the profile spline.
class RevolutionChart {
 public:
  RevolutionChart(const SampledImmersion& imm, int anchor, double reach)
      : spline_(ChordSpline::profile(imm, imm.sample_count())) {
    const int k0 = spline_.ghosts() + anchor;
    const AmbientVec p0 = spline_.value(spline_.knot(k0));
    AmbientVec t = spline_.derivative(spline_.knot(k0));
    t /= t.norm();
    origin_ << p0(0), p0(1), 0.0;
    e1_ << t(0), t(1), 0.0;
    e2_ << 0.0, 0.0, 1.0;
    nu_ << -t(1), t(0), 0.0;
    // Contiguous knots whose (signed) meridian points stay within reach of the anchor.
    lo_ = k0;
    hi_ = k0;
    auto near = [&](int k) { return (spline_.value(spline_.knot(k)) - p0).norm() <= reach; };
    while (lo_ > 0 && near(lo_ - 1)) --lo_;
    while (hi_ + 1 < spline_.size() && near(hi_ + 1)) ++hi_;
    lo_ = std::max(lo_ - 1, 0);
    hi_ = std::min(hi_ + 1, spline_.size() - 1);
  }

  const Eigen::Vector3d& origin() const { return origin_; }

  /// Lifts (a, b); returns false when no surface point is found near the anchor.
  bool lift(double a, double b, Eigen::Vector3d& out) const {
    const Eigen::Vector3d base = origin_ + a * e1_ + b * e2_;
    auto f = [&](double z) { return signed_distance(base + z * nu_); };
    double z0 = 0.0;
    double z1 = 1e-3 * (std::abs(a) + std::abs(b) + 1e-3);
    double f0 = f(z0);
    double f1 = f(z1);
    for (int it = 0; it < 30; ++it) {
      if (f1 == f0) break;
      const double z2 = z1 - f1 * (z1 - z0) / (f1 - f0);
      z0 = z1;
      f0 = f1;
      z1 = z2;
      f1 = f(z1);
      if (std::abs(f1) < 1e-14 * (1.0 + std::abs(z1))) break;
    }
    if (!(std::abs(f1) < 1e-10) || !std::isfinite(z1)) return false;
    out = base + z1 * nu_;
    return true;
  }

 private:
  double signed_distance(const Eigen::Vector3d& q) const {
    const double X = q(0);
    const double r = std::hypot(q(1), q(2));
    AmbientVec m(2);
    m << X, r;
    int best = lo_;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = lo_; k <= hi_; ++k) {
      const double d = (spline_.value(spline_.knot(k)) - m).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    const double s_lo = spline_.knot(std::max(best - 1, lo_));
    const double s_hi = spline_.knot(std::min(best + 1, hi_));
    double s = spline_.knot(best);
    for (int it = 0; it < 8; ++it) {
      const AmbientVec g = spline_.value(s);
      const AmbientVec dg = spline_.derivative(s);
      s = std::clamp(s - (g - m).dot(dg) / dg.squaredNorm(), s_lo, s_hi);
    }
    const AmbientVec g = spline_.value(s);
    AmbientVec dg = spline_.derivative(s);
    dg /= dg.norm();
    return (m(0) - g(0)) * -dg(1) + (m(1) - g(1)) * dg(0);
  }

  ChordSpline spline_;
  Eigen::Vector3d origin_, e1_, e2_, nu_;
  int lo_ = 0;
  int hi_ = 0;
};

double intrinsic_half_diameter(const SampledImmersion& imm, const GeometryField& geom) {
  if (imm.kind == ImmersionKind::ClosedCurve) return 0.25 * total_volume(imm, geom);
  const ChordSpline spline = ChordSpline::profile(imm);
  return 0.5 * (spline.axis_end() - spline.axis_start());
}

}  // namespace

VolumeGrowthResult volume_growth_check(const SampledImmersion& imm, const GeometryField& geom, int p,
                                       const std::vector<double>& radii, const std::string& scenario, double tol,
                                       const VolumeGrowthOptions& options) {
  if (radii.empty()) throw Error(ErrorKind::InvalidArgument, "no radii given");
  if (p < 0 || p >= imm.sample_count()) throw Error(ErrorKind::InvalidArgument, "anchor out of range");
  if (imm.kind == ImmersionKind::DiscGraph) throw Error(ErrorKind::Unsupported, "volume growth needs a closed manifold");
  const double half_diam = intrinsic_half_diameter(imm, geom);
  double r_max = 0.0;
  for (double r : radii) {
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "radii must be positive");
    if (r > half_diam) {
      throw Error(ErrorKind::RadiusTooLarge, "radius " + std::to_string(r) + " exceeds half the intrinsic diameter " +
                                                 std::to_string(half_diam));
    }
    r_max = std::max(r_max, r);
  }

  VolumeGrowthResult out;
  out.scalar_R = geom.scalar_R[static_cast<std::size_t>(p)];
  const int m = imm.kind == ImmersionKind::ClosedCurve ? 1 : 2;
  const double omega = m == 1 ? 2.0 : M_PI;

  std::vector<double> dist;
  std::vector<double> area;
  double smear = 0.0;
  if (m == 1) {
    // Exact cumulative arc length on both sides.
    for (double r : radii) {
      VolumeGrowthRow row;
      row.r = r;
      row.volume = 2.0 * r;
      row.ratio = row.volume / (omega * r);
      row.expansion = 1.0 - out.scalar_R * r * r / (6.0 * (m + 2));
      out.rows.push_back(row);
    }
  } else {
    const double reach = 1.15 * r_max;
    const int half = std::max(options.chart_resolution / 2, 8);
    const double h = reach / half;
    const int side = 2 * half + 1;
    const RevolutionChart chart(imm, p, 2.5 * reach);
    std::vector<Eigen::Vector3d> pos(static_cast<std::size_t>(side * side));
    DistanceGrid grid;
    grid.nx = side;
    grid.ny = side;
    grid.active.assign(pos.size(), 0);
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        const double a = (i - half) * h;
        const double b = (j - half) * h;
        if (std::hypot(a, b) > reach) continue;
        const auto idx = static_cast<std::size_t>(i * side + j);
        grid.active[idx] = chart.lift(a, b, pos[idx]) ? 1 : 0;
      }
    }
    const int centre = half * side + half;
    dist = grid_dijkstra(grid, centre, options.stencil_radius, [&](int from, int to, int, int) {
      return (pos[static_cast<std::size_t>(from)] - pos[static_cast<std::size_t>(to)]).norm();
    });
    area.assign(pos.size(), 0.0);
    for (int i = 1; i + 1 < side; ++i) {
      for (int j = 1; j + 1 < side; ++j) {
        const int k = i * side + j;
        if (!grid.is_active(k)) continue;
        const int ip = k + side, im = k - side, jp = k + 1, jm = k - 1;
        if (!grid.is_active(ip) || !grid.is_active(im) || !grid.is_active(jp) || !grid.is_active(jm)) continue;
        const Eigen::Vector3d pa = (pos[static_cast<std::size_t>(ip)] - pos[static_cast<std::size_t>(im)]) / (2.0 * h);
        const Eigen::Vector3d pb = (pos[static_cast<std::size_t>(jp)] - pos[static_cast<std::size_t>(jm)]) / (2.0 * h);
        area[static_cast<std::size_t>(k)] = pa.cross(pb).norm() * h * h;
      }
    }
    smear = h;
    for (double r : radii) {
      VolumeGrowthRow row;
      row.r = r;
      for (std::size_t k = 0; k < dist.size(); ++k) {
        if (!std::isfinite(dist[k])) continue;
        const double w = std::clamp(0.5 + (r - dist[k]) / smear, 0.0, 1.0);
        if (w > 0.0 && area[k] == 0.0) {
          throw Error(ErrorKind::Unsupported, "tangent chart does not cover the ball of radius " + std::to_string(r));
        }
        row.volume += w * area[k];
      }
      row.ratio = row.volume / (omega * r * r);
      row.expansion = 1.0 - out.scalar_R * r * r / (6.0 * (m + 2));
      out.rows.push_back(row);
    }
  }

  double worst = std::numeric_limits<double>::infinity();
  std::string loc;
  for (const VolumeGrowthRow& row : out.rows) {
    const double m_row = -std::abs(row.ratio - row.expansion) / row.expansion;
    if (m_row < worst) {
      worst = m_row;
      loc = "anchor " + std::to_string(p) + " r " + std::to_string(row.r);
    }
  }
  out.record = make_record("volume_growth", scenario, worst, loc, tol);
  return out;
}

}  // namespace mcf
