#include "mcf/geometry.hpp"
#include "mcf/graph.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace mcf;

SampledImmersion parabola_graph(int samples) {
  return shapes::graph(1, 1, 1.0, samples, [](const Eigen::VectorXd& x) {
    AmbientVec v(1);
    v << 0.5 * x(0) * x(0);
    return v;
  });
}

double max_abs_deviation(const std::vector<double>& values, double target) {
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, std::abs(v - target));
  return worst;
}

TEST(InducedMetric, ArcLengthCircleMatchesCentralDifferenceValue) {
  const int n = 64;
  const SampledImmersion c = shapes::circle(1.0, n, true);
  const MetricField m = induced_metric(c);
  const double h = 2.0 * M_PI / n;
  const double discrete = std::pow(std::sin(h) / h, 2);
  for (const SmallMat& g : m.g) EXPECT_NEAR(g(0, 0), discrete, 1e-13);
}

TEST(InducedMetric, ArcLengthCircleConvergesToIsometry) {
  double prev = 0.0;
  for (int n : {64, 128, 256, 512}) {
    const MetricField m = induced_metric(shapes::circle(1.0, n, true));
    double err = 0.0;
    for (const SmallMat& g : m.g) err = std::max(err, std::abs(g(0, 0) - 1.0));
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.05);
    prev = err;
  }
  // Leading error term of (sin h / h)^2 is h^2 / 3.
  EXPECT_LT(prev, 1.01 * std::pow(2.0 * M_PI / 512, 2) / 3.0);
}

TEST(InducedMetric, AngleParametrizedCircleOfRadiusTwo) {
  const int n = 512;
  const double h = 2.0 * M_PI / n;
  const MetricField m = induced_metric(shapes::circle(2.0, n));
  for (const SmallMat& g : m.g) EXPECT_NEAR(g(0, 0), 4.0 * std::pow(std::sin(h) / h, 2), 1e-12);
}

TEST(InducedMetric, ParabolaGraphAtBoundary) {
  const SampledImmersion g = parabola_graph(65);
  const MetricField m = induced_metric(g);
  EXPECT_NEAR(m.g.back()(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(m.g.front()(0, 0), 2.0, 1e-12);
}

TEST(InducedMetric, DegenerateCurveThrows) {
  SampledImmersion c = shapes::circle(1.0, 16);
  c.positions.setZero();
  try {
    induced_metric(c);
    FAIL() << "expected DegenerateMetric";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMetric);
  }
}

TEST(SecondFundamentalForm, UnitCircle) {
  const int n = 1024;
  const double h2 = std::pow(2.0 * M_PI / n, 2);
  const GeometryField geom = compute_geometry(shapes::circle(1.0, n, true));
  for (int s = 0; s < geom.sample_count(); ++s) {
    EXPECT_NEAR(std::abs(geom.h_at(s, 0)(0, 0)), 1.0, h2);
    EXPECT_NEAR(geom.norm_II_sq[static_cast<std::size_t>(s)], 1.0, h2);
  }
}

TEST(SecondFundamentalForm, SphereOfRadiusTwoAwayFromPoles) {
  const SampledImmersion sph = shapes::sphere(2.0, 256);
  const GeometryField geom = compute_geometry(sph);
  for (int s = 0; s < sph.sample_count(); ++s) {
    if (sph.in_pole_band(s)) continue;
    EXPECT_NEAR(geom.norm_II_sq[static_cast<std::size_t>(s)], 0.5, 0.005) << "sample " << s;
  }
}

TEST(SecondFundamentalForm, FlatGraphIsTotallyGeodesic) {
  const SampledImmersion flat = shapes::graph(2, 1, 1.0, 17, [](const Eigen::VectorXd&) { return AmbientVec::Zero(1); });
  const GeometryField geom = compute_geometry(flat);
  for (const SmallMat& h : geom.h) EXPECT_LT(h.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(max_abs_deviation(geom.norm_A_sq, 0.0), 1e-14);
}

TEST(MeanCurvature, UnitCircleClosedForm) {
  const int n = 1024;
  const double h2 = std::pow(2.0 * M_PI / n, 2);
  const GeometryField geom = compute_geometry(shapes::circle(1.0, n, true));
  for (int s = 0; s < geom.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    EXPECT_NEAR(std::sqrt(geom.norm_H_sq[us]), 1.0, h2);
    EXPECT_NEAR(std::sqrt(geom.norm_A_sq[us]), 1.0, h2);
    EXPECT_NEAR((geom.g_inv[us] * geom.A[us]).trace(), geom.norm_H_sq[us], 1e-12);
  }
}

TEST(MeanCurvature, UnitSphereClosedForm) {
  const SampledImmersion sph = shapes::sphere(1.0, 256);
  const GeometryField geom = compute_geometry(sph);
  for (int s = 0; s < sph.sample_count(); ++s) {
    if (sph.in_pole_band(s)) continue;
    const auto us = static_cast<std::size_t>(s);
    EXPECT_NEAR(std::sqrt(geom.norm_H_sq[us]), 2.0, 2e-3);
    EXPECT_NEAR(geom.norm_A_sq[us], 8.0, 2e-2);
    EXPECT_NEAR((geom.g_inv[us] * geom.A[us]).trace(), geom.norm_H_sq[us], 1e-11);
  }
}

TEST(MeanCurvature, PrescribedMinimalTensorGivesZeroA) {
  GeometryField geom;
  geom.m = 2;
  geom.n = 1;
  SmallMat id = SmallMat::Identity(2, 2);
  geom.g = {id};
  geom.g_inv = {id};
  SmallMat h(2, 2);
  h << 1.0, 0.3, 0.3, -1.0;
  geom.h = {h};
  FrameMat nu = FrameMat::Zero(3, 1);
  nu(2, 0) = 1.0;
  geom.normal_frame = {nu};
  mean_curvature_and_A(geom);
  EXPECT_NEAR(geom.norm_H_sq[0], 0.0, 1e-15);
  EXPECT_NEAR(geom.A[0].norm(), 0.0, 1e-15);
  EXPECT_GT(geom.norm_II_sq[0], 0.0);
}

TEST(GaussEquation, CurvesAreIntrinsicallyFlat) {
  const GeometryField geom = compute_geometry(shapes::ellipse(2.0, 1.0, 256));
  EXPECT_LT(max_abs_deviation(geom.scalar_R, 0.0), 1e-12);
}

TEST(GaussEquation, SphereScalarCurvature) {
  for (double r : {1.0, 0.5}) {
    const SampledImmersion sph = shapes::sphere(r, 256);
    const GeometryField geom = compute_geometry(sph);
    for (int s = 0; s < sph.sample_count(); ++s) {
      if (sph.in_pole_band(s)) continue;
      EXPECT_NEAR(geom.scalar_R[static_cast<std::size_t>(s)], 2.0 / (r * r), 2e-3 / (r * r));
    }
  }
}

TEST(Geometry, CurvatureConvergesAtSecondOrder) {
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    const GeometryField geom = compute_geometry(shapes::ellipse(2.0, 1.0, n));
    // Vertex (2, 0) has curvature a / b^2 = 2.
    const double err = std::abs(std::sqrt(geom.norm_II_sq[0]) - 2.0);
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.3);
    prev = err;
  }
}

TEST(Geometry, TotalVolumeOfSphereAndCircle) {
  const SampledImmersion c = shapes::circle(1.5, 512);
  const double h = 2.0 * M_PI / 512;
  EXPECT_NEAR(total_volume(c, compute_geometry(c)), 3.0 * M_PI * std::sin(h) / h, 1e-12);
  const SampledImmersion sph = shapes::sphere(1.0, 256);
  EXPECT_NEAR(total_volume(sph, compute_geometry(sph)), 4.0 * M_PI, 1e-3);
}

TEST(GraphData, MatchesSecondFundamentalFormOfSampledGraph) {
  const PolynomialMap psi = PolynomialMap::random(2, 2, 2, 11);
  const SampledImmersion imm = shapes::graph(2, 2, 1.0, 33, [&](const Eigen::VectorXd& x) { return psi.value(x); });
  const GeometryField geom = compute_geometry(imm);
  const GraphData data = graph_data_from_immersion(imm, 1.0);
  ASSERT_GT(data.sample_count(), 0);
  for (int k = 0; k < data.sample_count(); ++k) {
    const auto src = static_cast<std::size_t>(data.source_sample[static_cast<std::size_t>(k)]);
    EXPECT_NEAR(data.norm_II_sq[static_cast<std::size_t>(k)], geom.norm_II_sq[src], 1e-8);
    EXPECT_NEAR((data.g_tan[static_cast<std::size_t>(k)] - geom.g[src]).norm(), 0.0, 1e-8);
  }
}

TEST(GraphData, PolynomialDerivativesAreExact) {
  PolynomialMap psi(1, 1);
  psi.add_term(0, 2, 0, 0.5);
  const GraphData data = graph_data_from_polynomial(psi, 1.0, 5);
  ASSERT_EQ(data.sample_count(), 5);
  EXPECT_NEAR(data.g_tan.back()(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(data.alpha_bound, 1.0, 1e-15);
  EXPECT_NEAR(data.norm_II_sq.back(), 1.0 / 8.0, 1e-15);
}

TEST(Immersion, ValidateRejectsTooFewSamples) {
  SampledImmersion c = shapes::circle(1.0, 16);
  c.dims[0] = 4;
  c.positions.conservativeResize(4, 2);
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
