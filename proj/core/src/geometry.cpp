#include "mcf/geometry.hpp"

#include <cmath>
#include <numbers>

namespace mcf {

namespace {

using Field = std::vector<AmbientVec>;

struct Line {
  int length;
  int stride;
  int start;
};

// Sample lookup along one grid line, resolving periodic wrap and axis ghosts.
class LineAccess {
 public:
  LineAccess(const Field& field, Line line, Boundary boundary)
      : field_(field), line_(line), boundary_(boundary) {}

  bool has(int k) const {
    if (k >= 0 && k < line_.length) return true;
    return boundary_ != Boundary::OneSided;
  }

  AmbientVec at(int k) const {
    const int n = line_.length;
    if (k >= 0 && k < n) return field_[static_cast<std::size_t>(line_.start + k * line_.stride)];
    if (boundary_ == Boundary::Periodic) {
      const int w = ((k % n) + n) % n;
      return field_[static_cast<std::size_t>(line_.start + w * line_.stride)];
    }
    // AxisReflect: ghost -1-q mirrors q, ghost n+q mirrors n-1-q, as (x, -rho).
    const int q = k < 0 ? -1 - k : 2 * n - 1 - k;
    AmbientVec v = field_[static_cast<std::size_t>(line_.start + q * line_.stride)];
    v(1) = -v(1);
    return v;
  }

  int length() const { return line_.length; }

 private:
  const Field& field_;
  Line line_;
  Boundary boundary_;
};

AmbientVec first_at(const LineAccess& f, int k, double h) {
  if (f.has(k - 1) && f.has(k + 1)) return (f.at(k + 1) - f.at(k - 1)) / (2.0 * h);
  if (k == 0) return (-3.0 * f.at(0) + 4.0 * f.at(1) - f.at(2)) / (2.0 * h);
  const int e = f.length() - 1;
  return (3.0 * f.at(e) - 4.0 * f.at(e - 1) + f.at(e - 2)) / (2.0 * h);
}

AmbientVec second_at(const LineAccess& f, int k, double h) {
  const double h2 = h * h;
  if (f.has(k - 1) && f.has(k + 1)) return (f.at(k + 1) - 2.0 * f.at(k) + f.at(k - 1)) / h2;
  if (k == 0) return (2.0 * f.at(0) - 5.0 * f.at(1) + 4.0 * f.at(2) - f.at(3)) / h2;
  const int e = f.length() - 1;
  return (2.0 * f.at(e) - 5.0 * f.at(e - 1) + 4.0 * f.at(e - 2) - f.at(e - 3)) / h2;
}

Line line_for(const SampledImmersion& imm, int dir, int fixed) {
  if (dir == 0) return {imm.dims[0], imm.dims[1], fixed};
  return {imm.dims[1], 1, fixed * imm.dims[1]};
}

int line_count(const SampledImmersion& imm, int dir) { return dir == 0 ? imm.dims[1] : imm.dims[0]; }

template <typename Op>
Field along(const SampledImmersion& imm, const Field& field, int dir, Boundary boundary, Op op) {
  Field out(field.size());
  const double h = imm.spacing[static_cast<std::size_t>(dir)];
  for (int fixed = 0; fixed < line_count(imm, dir); ++fixed) {
    const Line line = line_for(imm, dir, fixed);
    const LineAccess access(field, line, boundary);
    for (int k = 0; k < line.length; ++k) {
      out[static_cast<std::size_t>(line.start + k * line.stride)] = op(access, k, h);
    }
  }
  return out;
}

// Derivative fields are not mirrored, so mixed derivatives only use wrap or one-sided ends.
Boundary derivative_boundary(Boundary b) { return b == Boundary::AxisReflect ? Boundary::OneSided : b; }

SmallMat inverse_of(const SmallMat& g) {
  if (g.rows() == 1) {
    SmallMat inv(1, 1);
    inv(0, 0) = 1.0 / g(0, 0);
    return inv;
  }
  return g.inverse();
}

}  // namespace

GridDerivatives differentiate(const SampledImmersion& imm) {
  GridDerivatives d;
  d.directions = imm.grid_dimension();
  const int count = imm.sample_count();
  Field positions(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) positions[static_cast<std::size_t>(s)] = imm.position(s);

  for (int dir = 0; dir < d.directions; ++dir) {
    const Boundary b = imm.boundary[static_cast<std::size_t>(dir)];
    d.first[dir] = along(imm, positions, dir, b, first_at);
    d.second[dir][dir] = along(imm, positions, dir, b, second_at);
  }
  if (d.directions == 2) {
    const Field d01 = along(imm, d.first[0], 1, derivative_boundary(imm.boundary[1]), first_at);
    const Field d10 = along(imm, d.first[1], 0, derivative_boundary(imm.boundary[0]), first_at);
    Field mixed(d01.size());
    for (std::size_t s = 0; s < mixed.size(); ++s) mixed[s] = 0.5 * (d01[s] + d10[s]);
    d.second[0][1] = mixed;
    d.second[1][0] = mixed;
  }
  return d;
}

MetricField induced_metric(const SampledImmersion& imm) { return induced_metric(imm, differentiate(imm)); }

MetricField induced_metric(const SampledImmersion& imm, const GridDerivatives& deriv) {
  const int count = imm.sample_count();
  const int m = imm.m;
  MetricField out;
  out.g.resize(static_cast<std::size_t>(count));
  out.g_inv.resize(static_cast<std::size_t>(count));
  out.vol_density.resize(static_cast<std::size_t>(count));

  std::vector<double> det(static_cast<std::size_t>(count));
  double max_det = 0.0;
  for (int s = 0; s < count; ++s) {
    const auto us = static_cast<std::size_t>(s);
    SmallMat g(m, m);
    if (imm.kind == ImmersionKind::RotationalProfile) {
      const double rho = imm.positions(s, 1);
      g << deriv.first[0][us].squaredNorm(), 0.0, 0.0, rho * rho;
    } else {
      for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
          g(i, j) = deriv.first[i][us].dot(deriv.first[j][us]);
          g(j, i) = g(i, j);
        }
      }
    }
    out.g[us] = g;
    det[us] = g.determinant();
    max_det = std::max(max_det, det[us]);
  }
  for (int s = 0; s < count; ++s) {
    const auto us = static_cast<std::size_t>(s);
    if (!(det[us] > kDegenerateTolerance * max_det) || !std::isfinite(det[us])) {
      throw Error(ErrorKind::DegenerateMetric, "det g = " + std::to_string(det[us]) + " at sample " + std::to_string(s));
    }
    out.g_inv[us] = inverse_of(out.g[us]);
    out.vol_density[us] = std::sqrt(det[us]);
  }
  return out;
}

void second_fundamental_form(const SampledImmersion& imm, const GridDerivatives& deriv, GeometryField& geom) {
  const int count = imm.sample_count();
  const int dim = imm.stored_dim();
  const int tangent_count = deriv.directions;
  const int n = imm.n;
  const int m = imm.m;
  geom.normal_frame.assign(static_cast<std::size_t>(count), FrameMat());
  geom.h.assign(static_cast<std::size_t>(count * n), SmallMat::Zero(m, m));

  for (int s = 0; s < count; ++s) {
    const auto us = static_cast<std::size_t>(s);
    // Orthonormal basis of the tangent span, then Gram-Schmidt of e_1..e_dim against it.
    FrameMat basis(dim, dim);
    int found = 0;
    auto absorb = [&](AmbientVec v, double keep_threshold) {
      const double scale = v.norm();
      if (!(scale > 0.0)) return false;
      for (int pass = 0; pass < 2; ++pass) {
        for (int c = 0; c < found; ++c) v -= basis.col(c).dot(v) * basis.col(c);
      }
      const double len = v.norm();
      if (!(len > keep_threshold * scale)) return false;
      basis.col(found++) = v / len;
      return true;
    };
    for (int t = 0; t < tangent_count; ++t) {
      if (!absorb(deriv.first[t][us], 1e-8)) {
        throw Error(ErrorKind::FrameFailure, "tangent vectors rank deficient at sample " + std::to_string(s));
      }
    }
    for (int e = 0; e < dim && found < dim; ++e) {
      absorb(AmbientVec::Unit(dim, e), 1e-3);
    }
    const int normals = found - tangent_count;
    if (normals != n) {
      throw Error(ErrorKind::FrameFailure, "normal space incomplete at sample " + std::to_string(s));
    }
    FrameMat frame = basis.middleCols(tangent_count, n);
    geom.normal_frame[us] = frame;

    for (int a = 0; a < n; ++a) {
      SmallMat& h = geom.h[us * static_cast<std::size_t>(n) + static_cast<std::size_t>(a)];
      const AmbientVec nu = frame.col(a);
      if (imm.kind == ImmersionKind::RotationalProfile) {
        // theta-theta entry in closed form: d^2F/dtheta^2 = (0, -rho) in the meridian plane.
        h(0, 0) = deriv.second[0][0][us].dot(nu);
        h(1, 1) = -imm.positions(s, 1) * nu(1);
        h(0, 1) = h(1, 0) = 0.0;
      } else {
        for (int i = 0; i < m; ++i) {
          for (int j = i; j < m; ++j) {
            h(i, j) = deriv.second[i][j][us].dot(nu);
            h(j, i) = h(i, j);
          }
        }
      }
    }
  }
}

double tensor_norm(const SmallMat& T, const SmallMat& g_inv) {
  const SmallMat P = g_inv * T;
  return std::sqrt(std::max(0.0, (P * P).trace()));
}

void mean_curvature_and_A(GeometryField& geom) {
  const int count = geom.sample_count();
  const int n = geom.n;
  const int m = geom.m;
  geom.H.assign(static_cast<std::size_t>(count), NormalVec::Zero(n));
  geom.H_vector.resize(static_cast<std::size_t>(count));
  geom.A.assign(static_cast<std::size_t>(count), SmallMat::Zero(m, m));
  geom.norm_II_sq.assign(static_cast<std::size_t>(count), 0.0);
  geom.norm_H_sq.assign(static_cast<std::size_t>(count), 0.0);
  geom.norm_A_sq.assign(static_cast<std::size_t>(count), 0.0);

  for (int s = 0; s < count; ++s) {
    const auto us = static_cast<std::size_t>(s);
    const SmallMat& gi = geom.g_inv[us];
    NormalVec H(n);
    SmallMat A = SmallMat::Zero(m, m);
    double ii = 0.0;
    for (int a = 0; a < n; ++a) {
      const SmallMat& h = geom.h_at(s, a);
      H(a) = (gi.cwiseProduct(h)).sum();
      const SmallMat P = gi * h;
      ii += (P * P).trace();
    }
    for (int a = 0; a < n; ++a) A += H(a) * geom.h_at(s, a);
    geom.H[us] = H;
    geom.A[us] = A;
    geom.H_vector[us] = geom.normal_frame[us] * H;
    geom.norm_II_sq[us] = ii;
    geom.norm_H_sq[us] = H.squaredNorm();
    const double a_norm = tensor_norm(A, gi);
    geom.norm_A_sq[us] = a_norm * a_norm;
  }
}

void gauss_scalar_curvature(GeometryField& geom) {
  geom.scalar_R.resize(geom.norm_H_sq.size());
  for (std::size_t s = 0; s < geom.scalar_R.size(); ++s) {
    geom.scalar_R[s] = geom.norm_H_sq[s] - geom.norm_II_sq[s];
  }
}

GeometryField compute_geometry(const SampledImmersion& imm) {
  const GridDerivatives deriv = differentiate(imm);
  MetricField metric = induced_metric(imm, deriv);
  GeometryField geom;
  geom.m = imm.m;
  geom.n = imm.n;
  geom.g = std::move(metric.g);
  geom.g_inv = std::move(metric.g_inv);
  geom.vol_density = std::move(metric.vol_density);
  second_fundamental_form(imm, deriv, geom);
  mean_curvature_and_A(geom);
  gauss_scalar_curvature(geom);
  return geom;
}

std::vector<double> cell_weights(const SampledImmersion& imm) {
  std::vector<double> w(static_cast<std::size_t>(imm.sample_count()), 1.0);
  for (int i = 0; i < imm.dims[0]; ++i) {
    for (int j = 0; j < imm.dims[1]; ++j) {
      double weight = 1.0;
      for (int d = 0; d < imm.grid_dimension(); ++d) {
        const int k = d == 0 ? i : j;
        const int len = imm.dims[static_cast<std::size_t>(d)];
        double cell = imm.spacing[static_cast<std::size_t>(d)];
        if (imm.boundary[static_cast<std::size_t>(d)] == Boundary::OneSided && (k == 0 || k == len - 1)) cell *= 0.5;
        weight *= cell;
      }
      if (imm.kind == ImmersionKind::RotationalProfile) weight *= 2.0 * std::numbers::pi;
      w[static_cast<std::size_t>(imm.index(i, j))] = weight;
    }
  }
  return w;
}

double total_volume(const SampledImmersion& imm, const GeometryField& geom) {
  const std::vector<double> w = cell_weights(imm);
  double total = 0.0;
  for (std::size_t s = 0; s < w.size(); ++s) total += w[s] * geom.vol_density[s];
  return total;
}

SampleMax max_over_samples(const SampledImmersion& imm, const std::vector<double>& values) {
  SampleMax best;
  for (int s = 0; s < static_cast<int>(values.size()); ++s) {
    if (imm.in_pole_band(s)) continue;
    if (best.sample < 0 || values[static_cast<std::size_t>(s)] > best.value) {
      best.value = values[static_cast<std::size_t>(s)];
      best.sample = s;
    }
  }
  return best;
}

GeometrySummary summarize(const SampledImmersion& imm, const GeometryField& geom) {
  auto root = [&](const std::vector<double>& sq) {
    SampleMax mx = max_over_samples(imm, sq);
    mx.value = std::sqrt(std::max(0.0, mx.value));
    return mx;
  };
  GeometrySummary out;
  out.II = root(geom.norm_II_sq);
  out.H = root(geom.norm_H_sq);
  out.A = root(geom.norm_A_sq);
  out.volume = total_volume(imm, geom);
  return out;
}

double min_physical_spacing(const SampledImmersion& imm, const GridDerivatives& deriv) {
  double best = std::numeric_limits<double>::infinity();
  for (int d = 0; d < deriv.directions; ++d) {
    const double h = imm.spacing[static_cast<std::size_t>(d)];
    for (const AmbientVec& v : deriv.first[d]) best = std::min(best, v.norm() * h);
  }
  return best;
}

}  // namespace mcf
