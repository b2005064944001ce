#pragma once

#include "mcf/immersion.hpp"

#include <vector>

namespace mcf {

/// C^1 cubic Hermite interpolant through a polyline, parametrized by cumulative
/// chord length, with parabolic (three-point) tangents.
class ChordSpline {
 public:
  ChordSpline() = default;
  explicit ChordSpline(std::vector<AmbientVec> points);

  /// Periodic spline through the samples of a closed curve; knot of sample k is knot(k + ghosts).
  static ChordSpline closed(const SampledImmersion& curve, int ghosts = 3);
  /// Profile spline extended through the axis by reflection (x, -rho) at both ends.
  static ChordSpline profile(const SampledImmersion& profile, int ghosts = 3);

  AmbientVec value(double sigma) const;
  AmbientVec derivative(double sigma) const;

  double knot(int k) const { return knots_[static_cast<std::size_t>(k)]; }
  int size() const { return static_cast<int>(points_.size()); }
  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }
  int ghosts() const { return ghosts_; }

  /// Parameter where a profile spline crosses the axis (rho = 0), located by
  /// bisection on the interval between the first/last sample and its mirror.
  double axis_start() const { return axis_start_; }
  double axis_end() const { return axis_end_; }

 private:
  int segment(double sigma) const;

  std::vector<AmbientVec> points_;
  std::vector<AmbientVec> tangents_;
  std::vector<double> knots_;
  int ghosts_ = 0;
  double axis_start_ = 0.0;
  double axis_end_ = 0.0;
};

}  // namespace mcf
