#pragma once

#include "mcf/immersion.hpp"

#include <vector>

namespace mcf {

/// Relative degeneracy threshold: det g_k <= kDegenerateTolerance * max_k det g_k fails.
inline constexpr double kDegenerateTolerance = 1e-12;

/// First and second parameter derivatives of the stored positions.
///
/// first[d][s] is dF/du_d at sample s; second[d][e][s] is d^2F/du_d du_e.
/// Only grid directions are differentiated (one direction for curves and
/// profiles, two for surface graphs).
struct GridDerivatives {
  int directions = 0;
  std::vector<AmbientVec> first[2];
  std::vector<AmbientVec> second[2][2];
};

GridDerivatives differentiate(const SampledImmersion& imm);

struct MetricField {
  std::vector<SmallMat> g;
  std::vector<SmallMat> g_inv;
  std::vector<double> vol_density;
};

/// Per-sample tensors of a sampled immersion. Components h_ij^alpha are taken
/// in an orthonormal normal frame, so normal indices are raised with delta.
struct GeometryField {
  int m = 0;
  int n = 0;
  std::vector<SmallMat> g;
  std::vector<SmallMat> g_inv;
  std::vector<double> vol_density;
  /// Columns are the unit normals nu_alpha in stored coordinates.
  std::vector<FrameMat> normal_frame;
  /// h[s * n + alpha] is the symmetric m x m matrix h_ij^alpha.
  std::vector<SmallMat> h;
  std::vector<NormalVec> H;
  /// Mean curvature vector H^alpha nu_alpha in stored coordinates.
  std::vector<AmbientVec> H_vector;
  std::vector<SmallMat> A;
  std::vector<double> norm_II_sq;
  std::vector<double> norm_H_sq;
  std::vector<double> norm_A_sq;
  std::vector<double> scalar_R;

  int sample_count() const { return static_cast<int>(g.size()); }
  const SmallMat& h_at(int s, int alpha) const { return h[static_cast<std::size_t>(s * n + alpha)]; }
};

/// g_ij = dF/du_i . dF/du_j, its inverse and sqrt(det g). Throws DegenerateMetric.
MetricField induced_metric(const SampledImmersion& imm);
MetricField induced_metric(const SampledImmersion& imm, const GridDerivatives& deriv);

/// Fills normal_frame and h. Throws FrameFailure when the tangent vectors and
/// candidate normals are numerically rank deficient.
void second_fundamental_form(const SampledImmersion& imm, const GridDerivatives& deriv,
                             GeometryField& geom);

/// H^alpha = g^ij h_ij^alpha, A_ij = H^alpha h_ij^alpha and the g-norms of II, H, A.
void mean_curvature_and_A(GeometryField& geom);

/// Twice-traced Gauss equation in flat space: R = |H|^2 - |II|^2.
void gauss_scalar_curvature(GeometryField& geom);

GeometryField compute_geometry(const SampledImmersion& imm);

/// |T|_g for a symmetric 2-tensor: sqrt(tr(g^-1 T g^-1 T)).
double tensor_norm(const SmallMat& T, const SmallMat& g_inv);

/// Parameter-space quadrature weight of each sample (includes 2 pi for profiles).
std::vector<double> cell_weights(const SampledImmersion& imm);

/// Total m-volume: sum of vol_density times the quadrature weights.
double total_volume(const SampledImmersion& imm, const GeometryField& geom);

struct SampleMax {
  double value = 0.0;
  int sample = -1;
};

/// Max over samples outside the pole band; ties go to the lowest index.
SampleMax max_over_samples(const SampledImmersion& imm, const std::vector<double>& values);

struct GeometrySummary {
  SampleMax II;
  SampleMax H;
  SampleMax A;
  double volume = 0.0;
};

/// Maxima of |II|, |H|, |A| (not squared) and the total volume.
GeometrySummary summarize(const SampledImmersion& imm, const GeometryField& geom);

/// Smallest physical grid step |dF/du_d| * du_d over samples and directions.
double min_physical_spacing(const SampledImmersion& imm, const GridDerivatives& deriv);

}  // namespace mcf
