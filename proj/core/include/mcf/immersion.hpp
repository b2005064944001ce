#pragma once

#include "mcf/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace mcf {

enum class ImmersionKind { ClosedCurve, DiscGraph, RotationalProfile };

const char* to_string(ImmersionKind kind);
ImmersionKind immersion_kind_from_string(const std::string& name);

/// How finite differences treat the ends of a grid direction.
enum class Boundary {
  Periodic,     // closed direction, indices wrap
  OneSided,     // open boundary, second-order one-sided stencils
  AxisReflect,  // profile end next to the rotation axis: ghost sample is (x, -rho)
};

using PositionArray = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A discretized immersion F: M -> R^(m+n) on a uniform structured parameter grid.
///
/// ClosedCurve: m = 1, one periodic direction, positions in R^(1+n).
/// DiscGraph: m = 1 or 2, the graph x -> (x, psi(x)) sampled on [-r, r]^m.
/// RotationalProfile: m = 2, n = 1. Only the meridian curve (x, rho) is stored;
///   the surface is (x, rho cos(theta), rho sin(theta)) and the angular direction
///   is handled in closed form. Samples sit at cell centres u_k = (k + 1/2) du on
///   (0, pi), so no sample lies on the axis.
struct SampledImmersion {
  ImmersionKind kind = ImmersionKind::ClosedCurve;
  int m = 1;
  int n = 1;
  std::array<int, 2> dims{0, 1};
  std::array<Boundary, 2> boundary{Boundary::Periodic, Boundary::Periodic};
  std::array<double, 2> origin{0.0, 0.0};
  std::array<double, 2> spacing{1.0, 1.0};
  /// One row per sample, row index = i * dims[1] + j.
  PositionArray positions;

  int sample_count() const { return dims[0] * dims[1]; }
  int grid_dimension() const { return kind == ImmersionKind::RotationalProfile ? 1 : m; }
  int ambient_dim() const { return m + n; }
  int stored_dim() const { return static_cast<int>(positions.cols()); }
  int index(int i, int j = 0) const { return i * dims[1] + j; }

  /// Parameter coordinate of grid node i along direction d.
  double param(int d, int i) const { return origin[static_cast<std::size_t>(d)] + i * spacing[static_cast<std::size_t>(d)]; }

  AmbientVec position(int s) const { return positions.row(s).transpose(); }

  /// Number of samples at each profile end excluded from reported maxima.
  int pole_band() const { return kind == ImmersionKind::RotationalProfile ? 2 : 0; }
  bool in_pole_band(int s) const;

  /// Throws ValidationError when shape or sample-count invariants are violated.
  void validate() const;
};

namespace shapes {

SampledImmersion circle(double radius, int samples, bool arc_length_param = false);
SampledImmersion ellipse(double a, double b, int samples);
/// Planar closed curve (x(t), y(t)) for t in [0, 2 pi).
SampledImmersion closed_curve(const std::function<Eigen::Vector2d(double)>& curve, int samples);
/// Closed space curves in R^3 (codimension 2). Presets: "trefoil", "tilted-circle".
SampledImmersion space_curve(const std::string& preset, int samples, double scale = 1.0);
SampledImmersion sphere(double radius, int profile_samples);

/// Two spherical bells of radius bell_r joined by a neck of radius neck_r.
///
/// Axial profile: bell centres at +-c with c = bell_r + neck_len / 2,
///   s(x) = sqrt(bell_r^2 - (|x| - c)^2),  n(x) = neck_r cosh(x / l),
///   rho(x) = (1 - w) n(x) + w s(x),  w = smoothstep5((|x| - x_a) / (x_b - x_a)),
/// where x_a = c - 0.8 bell_r, x_b = c - 0.4 bell_r and l makes n match s at
/// the window midpoint. smoothstep5 is the C^2 quintic 6t^5 - 15t^4 + 10t^3.
/// The meridian is parametrized by x = -(c + bell_r) cos(u).
SampledImmersion dumbbell(double bell_r, double neck_r, double neck_len, int profile_samples);

double dumbbell_radius(double x, double bell_r, double neck_r, double neck_len);

/// Graph of psi over [-r, r]^m, samples_per_side nodes per direction.
SampledImmersion graph(int m, int n, double r, int samples_per_side,
                       const std::function<AmbientVec(const Eigen::VectorXd&)>& psi);

}  // namespace shapes

}  // namespace mcf
