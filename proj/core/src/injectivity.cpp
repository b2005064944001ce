#include "mcf/estimates.hpp"

#include "mcf/profile_spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcf {

namespace {

// Meridian data of a profile against arc length from the first pole, extended to all s
// by reflection through both poles (period 2L, rho odd about each pole).
class Meridian {
 public:
  Meridian(const SampledImmersion& imm, const GeometryField& geom) {
    const int n = imm.sample_count();
    const ChordSpline spline = ChordSpline::profile(imm);
    const GridDerivatives d = differentiate(imm);
    L_ = spline.axis_end() - spline.axis_start();
    s_.push_back(0.0);
    rho_.push_back(0.0);
    drho_.push_back(0.0);
    K_.push_back(0.0);
    for (int k = 0; k < n; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      s_.push_back(spline.knot(spline.ghosts() + k) - spline.axis_start());
      rho_.push_back(imm.positions(k, 1));
      drho_.push_back(d.first[0][uk](1) / d.first[0][uk].norm());
      const SmallMat& g = geom.g[uk];
      const SmallMat& h = geom.h_at(k, 0);
      K_.push_back(h(0, 0) * h(1, 1) / (g(0, 0) * g(1, 1)));
    }
    s_.push_back(L_);
    rho_.push_back(0.0);
    drho_.push_back(drho_.back());
    K_.push_back(K_.back());
    drho_[0] = drho_[1];
    K_[0] = K_[1];
  }

  double length() const { return L_; }
  double s_of(int k) const { return s_[static_cast<std::size_t>(k + 1)]; }

  struct Values {
    double rho;
    double drho;
    double K;
  };

  Values at(double s) const {
    double u = std::fmod(s, 2.0 * L_);
    if (u < 0.0) u += 2.0 * L_;
    double sign = 1.0;
    if (u > L_) {
      u = 2.0 * L_ - u;
      sign = -1.0;
    }
    const auto it = std::upper_bound(s_.begin(), s_.end(), u);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - s_.begin()), 1, s_.size() - 1);
    const double w = (u - s_[k - 1]) / (s_[k] - s_[k - 1]);
    auto lerp = [&](const std::vector<double>& v) { return (1.0 - w) * v[k - 1] + w * v[k]; };
    return {sign * lerp(rho_), lerp(drho_), lerp(K_)};
  }

  /// Half lengths of closed geodesics: the meridian loop and parallels where rho' changes sign.
  double half_closed_geodesic() const {
    double best = L_;
    for (std::size_t k = 2; k + 2 < s_.size(); ++k) {
      if ((drho_[k] > 0.0) != (drho_[k + 1] > 0.0)) {
        const double w = drho_[k] / (drho_[k] - drho_[k + 1]);
        const double rho = (1.0 - w) * rho_[k] + w * rho_[k + 1];
        best = std::min(best, M_PI * rho);
      }
    }
    return best;
  }

 private:
  double L_ = 0.0;
  std::vector<double> s_, rho_, drho_, K_;
};

// Shoots the geodesic from arc length s0 at angle phi to the meridian and integrates the
// Jacobi equation y'' + K y = 0 along it; returns the first zero of y or +inf.
double first_conjugate(const Meridian& mer, double s0, double phi, double tau_max) {
  const double rho0 = mer.at(s0).rho;
  const double sin_phi = std::sin(phi);
  const double c = std::abs(sin_phi) < 1e-9 ? 0.0 : rho0 * sin_phi;
  // Geodesics passing within |c| of the axis need steps resolving that distance.
  double h = mer.length() / 2000.0;
  if (c != 0.0) h = std::max(std::min(h, std::abs(c) / 20.0), mer.length() * 1e-6);
  struct State {
    double s, v, y, w;
  };
  auto rhs = [&](const State& x) {
    const Meridian::Values m = mer.at(x.s);
    const double acc = c == 0.0 ? 0.0 : c * c * m.drho / (m.rho * m.rho * m.rho);
    return State{x.v, acc, x.w, -m.K * x.y};
  };
  auto axpy = [](const State& a, double t, const State& b) {
    return State{a.s + t * b.s, a.v + t * b.v, a.y + t * b.y, a.w + t * b.w};
  };
  State x{s0, std::cos(phi), 0.0, 1.0};
  double tau = 0.0;
  while (tau < tau_max) {
    const State k1 = rhs(x);
    const State k2 = rhs(axpy(x, 0.5 * h, k1));
    const State k3 = rhs(axpy(x, 0.5 * h, k2));
    const State k4 = rhs(axpy(x, h, k3));
    State next{x.s + h / 6.0 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s), x.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v),
               x.y + h / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y), x.w + h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w)};
    if (tau > 0.0 && x.y > 0.0 && next.y <= 0.0) return tau + h * x.y / (x.y - next.y);
    x = next;
    tau += h;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

InjectivityResult injectivity_bound_check(const SampledImmersion& imm, const GeometryField& geom,
                                          const std::string& scenario, double tol, const InjectivityOptions& options) {
  if (imm.kind == ImmersionKind::DiscGraph) {
    throw Error(ErrorKind::Unsupported, "injectivity radius is not defined for graphs with boundary");
  }
  double sup_ii = 0.0;
  for (double v : geom.norm_II_sq) sup_ii = std::max(sup_ii, std::sqrt(v));
  InjectivityResult out;
  out.bound = 1.0 / (2.0 * std::sqrt(2.0) * sup_ii);
  std::string loc;

  if (imm.kind == ImmersionKind::ClosedCurve) {
    out.half_closed_geodesic = 0.5 * total_volume(imm, geom);
    out.conjugate_radius = std::numeric_limits<double>::infinity();
    out.inj_estimate = out.half_closed_geodesic;
    loc = "closed curve";
  } else {
    const Meridian mer(imm, geom);
    out.half_closed_geodesic = mer.half_closed_geodesic();
    out.conjugate_radius = std::numeric_limits<double>::infinity();
    const int band = imm.pole_band();
    const int lo = band;
    const int hi = imm.sample_count() - 1 - band;
    const int anchors = std::max(1, std::min(options.anchors, hi - lo + 1));
    for (int a = 0; a < anchors; ++a) {
      const int k = anchors == 1 ? (lo + hi) / 2 : lo + (hi - lo) * a / (anchors - 1);
      for (int dir = 0; dir <= options.directions; ++dir) {
        const double phi = M_PI * dir / options.directions;
        const double conj = first_conjugate(mer, mer.s_of(k), phi, 2.0 * mer.length());
        if (conj < out.conjugate_radius) {
          out.conjugate_radius = conj;
          loc = "sample " + std::to_string(k) + " direction " + std::to_string(dir);
        }
      }
    }
    out.inj_estimate = std::min(out.conjugate_radius, out.half_closed_geodesic);
    if (out.half_closed_geodesic <= out.conjugate_radius) loc = "closed geodesic";
  }
  out.record = make_record("injectivity_bound", scenario, (out.inj_estimate - out.bound) / out.bound, loc, tol);
  return out;
}

}  // namespace mcf
