#include "mcf/immersion.hpp"

#include <cmath>
#include <numbers>

namespace mcf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::FrameFailure: return "FrameFailure";
    case ErrorKind::StepRejected: return "StepRejected";
    case ErrorKind::FlowStalled: return "FlowStalled";
    case ErrorKind::IncomparableSnapshots: return "IncomparableSnapshots";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::FitDiverged: return "FitDiverged";
    case ErrorKind::BadAnchor: return "BadAnchor";
    case ErrorKind::GraphFold: return "GraphFold";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::PreconditionUnsatisfied: return "PreconditionUnsatisfied";
    case ErrorKind::RadiusTooLarge: return "RadiusTooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

const char* to_string(ImmersionKind kind) {
  switch (kind) {
    case ImmersionKind::ClosedCurve: return "ClosedCurve";
    case ImmersionKind::DiscGraph: return "DiscGraph";
    case ImmersionKind::RotationalProfile: return "RotationalProfile";
  }
  return "Unknown";
}

ImmersionKind immersion_kind_from_string(const std::string& name) {
  if (name == "ClosedCurve") return ImmersionKind::ClosedCurve;
  if (name == "DiscGraph") return ImmersionKind::DiscGraph;
  if (name == "RotationalProfile") return ImmersionKind::RotationalProfile;
  throw Error(ErrorKind::ParseError, "unknown immersion kind '" + name + "'");
}

bool SampledImmersion::in_pole_band(int s) const {
  if (kind != ImmersionKind::RotationalProfile) return false;
  const int band = pole_band();
  return s < band || s >= sample_count() - band;
}

void SampledImmersion::validate() const {
  std::string problems;
  auto fail = [&](const std::string& msg) { problems += (problems.empty() ? "" : "; ") + msg; };

  if (m < 1 || m > kMaxIntrinsic) fail("intrinsic dimension must be 1 or 2");
  if (n < 1) fail("codimension must be >= 1");
  if (m + n > kMaxAmbient) fail("ambient dimension exceeds " + std::to_string(kMaxAmbient));
  if (dims[0] < 1 || dims[1] < 1) fail("grid dimensions must be positive");
  if (spacing[0] <= 0.0 || spacing[1] <= 0.0) fail("grid spacing must be positive");
  if (positions.rows() != sample_count()) fail("positions rows do not match the parameter grid");

  switch (kind) {
    case ImmersionKind::ClosedCurve:
      if (m != 1) fail("closed curves have m = 1");
      if (dims[0] < 8) fail("closed curves need at least 8 samples");
      if (dims[1] != 1) fail("closed curves use a 1-D grid");
      if (boundary[0] != Boundary::Periodic) fail("closed curve grid must be periodic");
      if (stored_dim() != m + n) fail("positions must live in R^(m+n)");
      break;
    case ImmersionKind::DiscGraph:
      if (dims[0] < 4 || (m == 2 && dims[1] < 4)) fail("graph grids need at least 4 nodes per side");
      if (m == 1 && dims[1] != 1) fail("1-D graphs use a 1-D grid");
      if (stored_dim() != m + n) fail("positions must live in R^(m+n)");
      break;
    case ImmersionKind::RotationalProfile:
      if (m != 2 || n != 1) fail("rotational profiles describe surfaces in R^3");
      if (dims[0] < 8) fail("profiles need at least 8 samples");
      if (dims[1] != 1) fail("profiles use a 1-D grid");
      if (stored_dim() != 2) fail("profile positions are (x, rho) pairs");
      break;
  }
  if (positions.size() > 0 && !positions.allFinite()) fail("positions contain non-finite values");
  if (kind == ImmersionKind::RotationalProfile && positions.rows() == sample_count()) {
    for (int s = 0; s < sample_count(); ++s) {
      if (!(positions(s, 1) > 0.0)) {
        fail("profile radius must be positive at sample " + std::to_string(s));
        break;
      }
    }
  }
  if (!problems.empty()) throw Error(ErrorKind::ValidationError, problems);
}

namespace shapes {

namespace {

constexpr double kPi = std::numbers::pi;

SampledImmersion make_closed(int samples, int ambient) {
  SampledImmersion imm;
  imm.kind = ImmersionKind::ClosedCurve;
  imm.m = 1;
  imm.n = ambient - 1;
  imm.dims = {samples, 1};
  imm.boundary = {Boundary::Periodic, Boundary::Periodic};
  imm.origin = {0.0, 0.0};
  imm.spacing = {2.0 * kPi / samples, 1.0};
  imm.positions.resize(samples, ambient);
  return imm;
}

SampledImmersion make_profile(int samples) {
  SampledImmersion imm;
  imm.kind = ImmersionKind::RotationalProfile;
  imm.m = 2;
  imm.n = 1;
  imm.dims = {samples, 1};
  imm.boundary = {Boundary::AxisReflect, Boundary::Periodic};
  const double du = kPi / samples;
  imm.origin = {0.5 * du, 0.0};
  imm.spacing = {du, 1.0};
  imm.positions.resize(samples, 2);
  return imm;
}

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace

SampledImmersion circle(double radius, int samples, bool arc_length_param) {
  if (radius <= 0.0) throw Error(ErrorKind::InvalidArgument, "circle radius must be positive");
  SampledImmersion imm = make_closed(samples, 2);
  for (int k = 0; k < samples; ++k) {
    const double th = imm.param(0, k);
    imm.positions(k, 0) = radius * std::cos(th);
    imm.positions(k, 1) = radius * std::sin(th);
  }
  if (arc_length_param) imm.spacing[0] *= radius;
  imm.validate();
  return imm;
}

SampledImmersion ellipse(double a, double b, int samples) {
  if (a <= 0.0 || b <= 0.0) throw Error(ErrorKind::InvalidArgument, "ellipse semi-axes must be positive");
  return closed_curve([a, b](double t) { return Eigen::Vector2d(a * std::cos(t), b * std::sin(t)); }, samples);
}

SampledImmersion closed_curve(const std::function<Eigen::Vector2d(double)>& curve, int samples) {
  SampledImmersion imm = make_closed(samples, 2);
  for (int k = 0; k < samples; ++k) {
    const Eigen::Vector2d p = curve(imm.param(0, k));
    imm.positions(k, 0) = p.x();
    imm.positions(k, 1) = p.y();
  }
  imm.validate();
  return imm;
}

SampledImmersion space_curve(const std::string& preset, int samples, double scale) {
  SampledImmersion imm = make_closed(samples, 3);
  for (int k = 0; k < samples; ++k) {
    const double t = imm.param(0, k);
    Eigen::Vector3d p;
    if (preset == "trefoil") {
      const double rad = 2.0 + std::cos(3.0 * t);
      p = {rad * std::cos(2.0 * t), rad * std::sin(2.0 * t), std::sin(3.0 * t)};
    } else if (preset == "tilted-circle") {
      const double tilt = kPi / 6.0;
      p = {std::cos(t), std::sin(t) * std::cos(tilt), std::sin(t) * std::sin(tilt)};
    } else {
      throw Error(ErrorKind::ValidationError, "unknown space-curve preset '" + preset + "'");
    }
    imm.positions.row(k) = scale * p.transpose();
  }
  imm.validate();
  return imm;
}

SampledImmersion sphere(double radius, int profile_samples) {
  if (radius <= 0.0) throw Error(ErrorKind::InvalidArgument, "sphere radius must be positive");
  SampledImmersion imm = make_profile(profile_samples);
  for (int k = 0; k < profile_samples; ++k) {
    const double u = imm.param(0, k);
    imm.positions(k, 0) = -radius * std::cos(u);
    imm.positions(k, 1) = radius * std::sin(u);
  }
  imm.validate();
  return imm;
}

double dumbbell_radius(double x, double bell_r, double neck_r, double neck_len) {
  const double c = bell_r + 0.5 * neck_len;
  const double ax = std::abs(x);
  const double x_a = c - 0.8 * bell_r;
  const double x_b = c - 0.4 * bell_r;
  const double x_mid = 0.5 * (x_a + x_b);
  const double s_mid = std::sqrt(bell_r * bell_r - (x_mid - c) * (x_mid - c));
  const double ell = x_mid / std::acosh(s_mid / neck_r);

  const double d = ax - c;
  const double bell = std::sqrt(std::max(0.0, bell_r * bell_r - d * d));
  if (ax >= x_b) return bell;
  const double neck = neck_r * std::cosh(x / ell);
  if (ax <= x_a) return neck;
  const double w = smoothstep5((ax - x_a) / (x_b - x_a));
  return (1.0 - w) * neck + w * bell;
}

SampledImmersion dumbbell(double bell_r, double neck_r, double neck_len, int profile_samples) {
  if (bell_r <= 0.0 || neck_r <= 0.0 || neck_len <= 0.0) {
    throw Error(ErrorKind::ValidationError, "dumbbell lengths must be positive");
  }
  if (neck_r >= 0.8 * bell_r) {
    throw Error(ErrorKind::ValidationError, "dumbbell neck radius must be below 0.8 * bell radius");
  }
  SampledImmersion imm = make_profile(profile_samples);
  const double half_length = bell_r + 0.5 * neck_len + bell_r;
  for (int k = 0; k < profile_samples; ++k) {
    const double u = imm.param(0, k);
    const double x = -half_length * std::cos(u);
    imm.positions(k, 0) = x;
    imm.positions(k, 1) = dumbbell_radius(x, bell_r, neck_r, neck_len);
  }
  imm.validate();
  return imm;
}

SampledImmersion graph(int m, int n, double r, int samples_per_side,
                       const std::function<AmbientVec(const Eigen::VectorXd&)>& psi) {
  if (m < 1 || m > 2) throw Error(ErrorKind::InvalidArgument, "graph domain dimension must be 1 or 2");
  if (r <= 0.0) throw Error(ErrorKind::InvalidArgument, "graph radius must be positive");
  SampledImmersion imm;
  imm.kind = ImmersionKind::DiscGraph;
  imm.m = m;
  imm.n = n;
  imm.dims = {samples_per_side, m == 2 ? samples_per_side : 1};
  imm.boundary = {Boundary::OneSided, Boundary::OneSided};
  const double h = 2.0 * r / (samples_per_side - 1);
  imm.origin = {-r, m == 2 ? -r : 0.0};
  imm.spacing = {h, m == 2 ? h : 1.0};
  imm.positions.resize(imm.sample_count(), m + n);
  Eigen::VectorXd x(m);
  for (int i = 0; i < imm.dims[0]; ++i) {
    for (int j = 0; j < imm.dims[1]; ++j) {
      x(0) = imm.param(0, i);
      if (m == 2) x(1) = imm.param(1, j);
      const AmbientVec value = psi(x);
      const int s = imm.index(i, j);
      for (int d = 0; d < m; ++d) imm.positions(s, d) = x(d);
      for (int a = 0; a < n; ++a) imm.positions(s, m + a) = value(a);
    }
  }
  imm.validate();
  return imm;
}

}  // namespace shapes

}  // namespace mcf
