#pragma once

#include "mcf/immersion.hpp"

#include <cstdint>
#include <vector>

namespace mcf {

/// Polynomial map psi: R^m -> R^n with exact first and second derivatives.
class PolynomialMap {
 public:
  struct Term {
    int px = 0;
    int py = 0;
    double coeff = 0.0;
  };

  PolynomialMap(int m, int n) : m_(m), n_(n), terms_(static_cast<std::size_t>(n)) {}

  /// Coefficients uniform in [-1, 1]; all monomials of total degree 2..degree.
  static PolynomialMap random(int m, int n, int degree, std::uint64_t seed);

  void add_term(int component, int px, int py, double coeff);

  int m() const { return m_; }
  int n() const { return n_; }

  AmbientVec value(const Eigen::VectorXd& x) const;
  /// n x m Jacobian.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  /// Hessian of component alpha (m x m).
  SmallMat hessian(const Eigen::VectorXd& x, int alpha) const;

 private:
  int m_;
  int n_;
  std::vector<std::vector<Term>> terms_;
};

/// A graph x -> (x, psi(x)) over the disc D_r with the data the graph
/// estimates need: Dpsi, D^2 psi, tangent metric g_ij = delta_ij + D_i psi . D_j psi
/// and normal metric g_ab = delta_ab + D psi_a . D psi_b.
struct GraphData {
  int m = 0;
  int n = 0;
  double r = 0.0;
  std::vector<Eigen::VectorXd> x;
  std::vector<AmbientVec> psi;
  std::vector<Eigen::MatrixXd> D_psi;
  /// D2_psi[s * n + alpha] is the Hessian of psi_alpha.
  std::vector<SmallMat> D2_psi;
  std::vector<SmallMat> g_tan;
  std::vector<Eigen::MatrixXd> g_nor;
  /// |II|_g^2 = h_ija h_klb g^ab g^ik g^jl with h_ija = D_ij psi_a.
  std::vector<double> norm_II_sq;
  /// sup |Dpsi| (Frobenius norm).
  double alpha_bound = 0.0;
  /// Index of each entry in the source immersion, when built from one.
  std::vector<int> source_sample;

  int sample_count() const { return static_cast<int>(x.size()); }
  const SmallMat& hessian(int s, int alpha) const { return D2_psi[static_cast<std::size_t>(s * n + alpha)]; }
};

/// Samples a polynomial graph on a samples_per_side^m grid over [-r, r]^m, keeping nodes in D_r.
GraphData graph_data_from_polynomial(const PolynomialMap& psi, double r, int samples_per_side);

/// Builds GraphData from a sampled DiscGraph using the same finite differences as the
/// geometry module, restricted to the disc of radius r.
GraphData graph_data_from_immersion(const SampledImmersion& imm, double r);

/// Recomputes metrics, |II|_g^2 and alpha_bound from x, D_psi, D2_psi.
void finalize_graph_data(GraphData& data);

}  // namespace mcf
