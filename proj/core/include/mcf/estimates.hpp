#pragma once

#include "mcf/flow.hpp"
#include "mcf/graph.hpp"

#include <string>
#include <vector>

namespace mcf {

struct CheckRecord {
  std::string check_id;
  std::string scenario_id;
  /// Signed slack of the inequality; negative means violated.
  double worst_margin = 0.0;
  std::string worst_location;
  bool pass = true;
  double tolerance = 0.0;
  /// Informational records are reported but never fail a run.
  bool informational = false;
  std::string note;
};

/// pass = worst_margin >= -tolerance.
CheckRecord make_record(std::string check_id, std::string scenario_id, double worst_margin, std::string location,
                        double tolerance);

enum class ToleranceProfile { Default, Strict };

ToleranceProfile tolerance_profile_from_string(const std::string& name);
const char* to_string(ToleranceProfile profile);

struct Tolerances {
  /// Relative tolerance for algebraic identities.
  double identity = 1e-12;
  /// Absolute or relative tolerance for algebraic inequalities.
  double inequality = 1e-10;
  /// Relative tolerance for quantities built on discrete geodesics and volumes.
  double discrete = 0.05;
  /// Factor in residual <= factor * (dt + spacing^2) * scale.
  double consistency_factor = 10.0;
};

Tolerances tolerances(ToleranceProfile profile);

// ---- algebraic identities ----

/// trace_A, A_cauchy_schwarz, A_le_H_II, h_symmetry, A_zero_iff_H_zero (gating) and
/// A_cauchy_schwarz_codim ((tr A)^2 <= n |A|^2, informational).
std::vector<CheckRecord> identity_checks(const GeometryField& geom, const std::string& scenario,
                                         const Tolerances& tol = {}, const std::string& where = "");

// ---- graph estimates ----

/// (1 + |Dpsi|^2)^3 |II|_g^2 - |D^2 psi|^2 >= -tol per sample.
CheckRecord hessian_bound_check(const GraphData& graph, const std::string& scenario, double tol = 1e-10);

/// Eigenvalues of g_tan, g_nor in [1, 1 + |Dpsi|^2], inverse eigenvalues in [1/(1 + |Dpsi|^2), 1].
CheckRecord eigen_bound_check(const GraphData& graph, const std::string& scenario, double tol = 1e-10);

/// Projection of a neighbourhood of F(q) onto its tangent plane.
struct TangentGraphPatch {
  int anchor = -1;
  AmbientVec origin;
  /// Columns: orthonormal tangent basis, then orthonormal normal basis (stored coordinates).
  FrameMat tangent;
  FrameMat normal;
  double radius = 0.0;
  /// Samples in the connected component U_{r,q}.
  std::vector<int> component;
  /// Projected coordinates (m) and heights (n) per component sample.
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> psi;
  double sup_Dpsi = 0.0;
  bool fold = false;
};

struct GraphRadiusResult {
  TangentGraphPatch patch;
  CheckRecord record;
  /// alpha / ((1 + alpha^2)^{3/2} sup|II|).
  double r_star = 0.0;
  /// Smallest radius where the graph property or |Dpsi| <= alpha fails (bisection);
  /// +inf when it holds over the whole projected extent.
  double failure_radius = 0.0;
};

struct GraphRadiusOptions {
  int angular_samples = 128;
  int bisection_iterations = 40;
  bool find_failure_radius = true;
};

/// Tests the graph property of U_{r*,q}. Folds are reported as a failed record (note GraphFold).
GraphRadiusResult graph_radius_check(const SampledImmersion& imm, const GeometryField& geom, int q, double alpha,
                                     const std::string& scenario, const GraphRadiusOptions& options = {});

/// Patch at an explicit radius.
TangentGraphPatch tangent_graph_patch(const SampledImmersion& imm, const GeometryField& geom, int q, double radius,
                                      double alpha, int angular_samples = 128);

struct InjectivityResult {
  CheckRecord record;
  double inj_estimate = 0.0;
  double bound = 0.0;
  double conjugate_radius = 0.0;
  double half_closed_geodesic = 0.0;
};

struct InjectivityOptions {
  int anchors = 16;
  int directions = 32;
};

/// Closed curves: inj = L/2. Profiles: min(conjugate radius by shooting, half the shortest
/// closed geodesic among the meridian loop and critical parallels).
InjectivityResult injectivity_bound_check(const SampledImmersion& imm, const GeometryField& geom,
                                          const std::string& scenario, double tol = 0.05,
                                          const InjectivityOptions& options = {});

// ---- metric comparisons ----

/// max |lambda - 1| over samples, lambda eigenvalues of g0^-1 g1.
double metric_deviation(const std::vector<SmallMat>& g0, const std::vector<SmallMat>& g1);

struct BallInclusionResult {
  CheckRecord record;
  double epsilon = 0.0;
  int inner_count = 0;
  int ball_count = 0;
  int outer_count = 0;
};

/// B_{g0}(p, r/sqrt(1+eps)) in B_{g1}(p, r) in B_{g0}(p, r/sqrt(1-eps)) on the grid graph.
/// Throws HypothesisViolated when (1-eps) g0 <= g1 <= (1+eps) g0 fails.
BallInclusionResult ball_inclusion_check(const SampledImmersion& layout, const std::vector<SmallMat>& g0,
                                         const std::vector<SmallMat>& g1, double eps, int p, double r,
                                         const std::string& scenario, int stencil_radius = 5);

/// e^{-2I} g(t0) <= g(t) <= e^{2I} g(t0) for snapshots t > t0 within each parametrization
/// epoch, I the accumulated integral of max|dg/dt|_g.
CheckRecord metric_equivalence_check(const Trajectory& traj, double tol = 1e-10);

struct IntegratedEstimateInput {
  double T = 0.0;
  double p = 2.0;
  /// Bounds assumed on the window; values <= 0 are measured from the trajectory.
  double C_p = 0.0;
  double C_H = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
};

struct IntegratedEstimateResult {
  CheckRecord record;
  double C_p = 0.0;
  double C_H = 0.0;
  double K = 0.0;
  double C_prime = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// |g(t1) - g(t0)|_0 <= 2C'/(1 - 1/p) ((T - t0)^{1-1/p} - (T - t1)^{1-1/p}), C' = K C_H C_p^{1/p}.
/// t0, t1 must be snapshot times of the same epoch. Throws PreconditionUnsatisfied when the
/// supplied p-rate or H bound fails on the window.
IntegratedEstimateResult integrated_estimate_check(const Trajectory& traj, const IntegratedEstimateInput& in,
                                                   const std::string& scenario, double tol = 1e-10);

// ---- volume growth ----

struct VolumeGrowthRow {
  double r = 0.0;
  double volume = 0.0;
  double ratio = 0.0;
  double expansion = 0.0;
};

struct VolumeGrowthResult {
  std::vector<VolumeGrowthRow> rows;
  CheckRecord record;
  double scalar_R = 0.0;
};

struct VolumeGrowthOptions {
  /// Chart grid nodes per unit of the largest radius (profiles).
  int chart_resolution = 400;
  int stencil_radius = 5;
};

/// V(r) / (omega_m r^m) against 1 - R(p) r^2 / (6(m + 2)) on intrinsic balls about sample p.
/// Throws RadiusTooLarge when r exceeds half the intrinsic diameter.
VolumeGrowthResult volume_growth_check(const SampledImmersion& imm, const GeometryField& geom, int p,
                                       const std::vector<double>& radii, const std::string& scenario,
                                       double tol = 0.05, const VolumeGrowthOptions& options = {});

}  // namespace mcf
