#include "mcf/profile_spline.hpp"

#include <algorithm>
#include <cmath>

namespace mcf {

ChordSpline::ChordSpline(std::vector<AmbientVec> points) : points_(std::move(points)) {
  const std::size_t count = points_.size();
  if (count < 3) throw Error(ErrorKind::InvalidArgument, "spline needs at least three points");
  knots_.resize(count);
  knots_[0] = 0.0;
  for (std::size_t k = 1; k < count; ++k) {
    const double chord = (points_[k] - points_[k - 1]).norm();
    if (!(chord > 0.0)) throw Error(ErrorKind::InvalidArgument, "spline points must be distinct");
    knots_[k] = knots_[k - 1] + chord;
  }
  tangents_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (k == 0 || k + 1 == count) {
      const std::size_t a = k == 0 ? 0 : k - 1;
      tangents_[k] = (points_[a + 1] - points_[a]) / (knots_[a + 1] - knots_[a]);
      continue;
    }
    const double hl = knots_[k] - knots_[k - 1];
    const double hr = knots_[k + 1] - knots_[k];
    const AmbientVec dl = (points_[k] - points_[k - 1]) / hl;
    const AmbientVec dr = (points_[k + 1] - points_[k]) / hr;
    tangents_[k] = (hr * dl + hl * dr) / (hl + hr);
  }
  axis_start_ = knots_.front();
  axis_end_ = knots_.back();
}

ChordSpline ChordSpline::closed(const SampledImmersion& curve, int ghosts) {
  const int n = curve.sample_count();
  std::vector<AmbientVec> pts;
  pts.reserve(static_cast<std::size_t>(n + 2 * ghosts + 1));
  for (int k = -ghosts; k <= n + ghosts; ++k) pts.push_back(curve.position(((k % n) + n) % n));
  ChordSpline spline(std::move(pts));
  spline.ghosts_ = ghosts;
  return spline;
}

ChordSpline ChordSpline::profile(const SampledImmersion& profile, int ghosts) {
  const int n = profile.sample_count();
  auto mirrored = [&](int q) {
    AmbientVec v = profile.position(q);
    v(1) = -v(1);
    return v;
  };
  std::vector<AmbientVec> pts;
  pts.reserve(static_cast<std::size_t>(n + 2 * ghosts));
  for (int q = ghosts - 1; q >= 0; --q) pts.push_back(mirrored(q));
  for (int k = 0; k < n; ++k) pts.push_back(profile.position(k));
  for (int q = n - 1; q >= n - ghosts; --q) pts.push_back(mirrored(q));
  ChordSpline spline(std::move(pts));
  spline.ghosts_ = ghosts;

  auto axis_crossing = [&](double lo, double hi) {
    // rho changes sign on [lo, hi]
    double flo = spline.value(lo)(1);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = spline.value(mid)(1);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  spline.axis_start_ = axis_crossing(spline.knot(ghosts - 1), spline.knot(ghosts));
  spline.axis_end_ = axis_crossing(spline.knot(ghosts + n - 1), spline.knot(ghosts + n));
  return spline;
}

int ChordSpline::segment(double sigma) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), sigma);
  int k = static_cast<int>(it - knots_.begin()) - 1;
  return std::clamp(k, 0, static_cast<int>(knots_.size()) - 2);
}

AmbientVec ChordSpline::value(double sigma) const {
  const int k = segment(sigma);
  const auto uk = static_cast<std::size_t>(k);
  const double h = knots_[uk + 1] - knots_[uk];
  const double t = (sigma - knots_[uk]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * points_[uk] + h10 * h * tangents_[uk] + h01 * points_[uk + 1] + h11 * h * tangents_[uk + 1];
}

AmbientVec ChordSpline::derivative(double sigma) const {
  const int k = segment(sigma);
  const auto uk = static_cast<std::size_t>(k);
  const double h = knots_[uk + 1] - knots_[uk];
  const double t = (sigma - knots_[uk]) / h;
  const double t2 = t * t;
  const double d00 = (6 * t2 - 6 * t) / h;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h;
  const double d11 = 3 * t2 - 2 * t;
  return d00 * points_[uk] + d10 * tangents_[uk] + d01 * points_[uk + 1] + d11 * tangents_[uk + 1];
}

}  // namespace mcf
