// Randomized invariants. Every case draws from a seeded generator so failures reproduce.

#include "mcf/estimates.hpp"
#include "mcf/evolution.hpp"
#include "mcf/scenario.hpp"
#include "mcf/singularity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using namespace mcf;

constexpr int kCases = 12;

// Star-shaped closed curve r(t) = 1 + sum_k a_k cos(k t + phi_k), k = 2..4, kept convex enough to stay embedded.
SampledImmersion random_curve(std::mt19937_64& rng, int samples) {
  std::uniform_real_distribution<double> amp(-0.04, 0.04);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> size(0.3, 3.0);
  double a[5] = {0, 0, amp(rng), amp(rng), amp(rng)};
  double phi[5] = {0, 0, phase(rng), phase(rng), phase(rng)};
  const double scale = size(rng);
  return shapes::closed_curve(
      [=](double t) {
        double r = 1.0;
        for (int k = 2; k <= 4; ++k) r += a[k] * std::cos(k * t + phi[k]);
        return Eigen::Vector2d(scale * r * std::cos(t), scale * r * std::sin(t));
      },
      samples);
}

SampledImmersion random_graph(std::uint64_t seed, int m, int n, int degree, int samples) {
  const PolynomialMap psi = PolynomialMap::random(m, n, degree, seed);
  return shapes::graph(m, n, 1.0, samples, [&](const Eigen::VectorXd& x) { return psi.value(x); });
}

TEST(Properties, IdentitiesHoldOnRandomCurves) {
  std::mt19937_64 rng(101);
  for (int c = 0; c < kCases; ++c) {
    const SampledImmersion imm = random_curve(rng, 128);
    for (const CheckRecord& r : identity_checks(compute_geometry(imm), "curve")) {
      if (!r.informational) EXPECT_TRUE(r.pass) << "case " << c << " " << r.check_id << " " << r.worst_margin;
    }
  }
}

TEST(Properties, IdentitiesHoldOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= kCases; ++seed) {
    for (int n : {1, 2, 3}) {
      const SampledImmersion imm = random_graph(seed, 2, n, 3, 17);
      for (const CheckRecord& r : identity_checks(compute_geometry(imm), "graph")) {
        if (!r.informational) EXPECT_TRUE(r.pass) << "seed " << seed << " n " << n << " " << r.check_id;
      }
    }
  }
}

TEST(Properties, HessianBoundIsEqualityForPlaneCurves) {
  for (std::uint64_t seed = 1; seed <= kCases; ++seed) {
    const GraphData data = graph_data_from_polynomial(PolynomialMap::random(1, 1, 4, seed), 1.0, 65);
    for (int s = 0; s < data.sample_count(); ++s) {
      const double d = data.D_psi[static_cast<std::size_t>(s)](0, 0);
      const double dd = data.hessian(s, 0)(0, 0);
      const double lhs = std::pow(1.0 + d * d, 3) * data.norm_II_sq[static_cast<std::size_t>(s)];
      EXPECT_NEAR(lhs, dd * dd, 1e-10 * std::max(1.0, dd * dd)) << "seed " << seed << " sample " << s;
    }
  }
}

TEST(Properties, HessianBoundIsStrictForSpaceCurves) {
  for (std::uint64_t seed = 1; seed <= kCases; ++seed) {
    const GraphData data = graph_data_from_polynomial(PolynomialMap::random(1, 2, 3, seed), 1.0, 65);
    EXPECT_TRUE(hessian_bound_check(data, "space").pass) << "seed " << seed;
    double best = 0.0;
    for (int s = 0; s < data.sample_count(); ++s) {
      double dd = 0.0;
      for (int a = 0; a < 2; ++a) dd += std::pow(data.hessian(s, a)(0, 0), 2);
      const double grad = data.D_psi[static_cast<std::size_t>(s)].squaredNorm();
      best = std::max(best, std::pow(1.0 + grad, 3) * data.norm_II_sq[static_cast<std::size_t>(s)] - dd);
    }
    EXPECT_GT(best, 1e-8) << "seed " << seed;
  }
}

TEST(Properties, EigenBoundsOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= kCases; ++seed) {
    for (int n : {1, 2, 3}) {
      const GraphData data = graph_data_from_polynomial(PolynomialMap::random(2, n, 3, seed), 1.0, 24);
      EXPECT_TRUE(eigen_bound_check(data, "graph").pass) << "seed " << seed << " n " << n;
    }
  }
}

TEST(Properties, ScalingLawsUnderAmbientDilation) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> factor(0.1, 50.0);
  for (int c = 0; c < kCases; ++c) {
    const SampledImmersion imm = c % 2 == 0 ? random_curve(rng, 96) : random_graph(static_cast<std::uint64_t>(c), 2, 2, 3, 13);
    const double Q = factor(rng);
    const GeometryField g0 = compute_geometry(imm);
    const GeometryField g1 = compute_geometry(scale_about(imm, AmbientVec::Zero(imm.stored_dim()), Q));
    const double m = imm.kind == ImmersionKind::ClosedCurve ? 1.0 : 2.0;
    for (int s = 0; s < imm.sample_count(); ++s) {
      const auto us = static_cast<std::size_t>(s);
      EXPECT_NEAR(g1.norm_II_sq[us] * Q * Q, g0.norm_II_sq[us], 1e-10 * g0.norm_II_sq[us] + 1e-300);
      EXPECT_NEAR(g1.norm_H_sq[us] * Q * Q, g0.norm_H_sq[us], 1e-10 * g0.norm_H_sq[us] + 1e-300);
      EXPECT_NEAR(g1.norm_A_sq[us] * std::pow(Q, 4), g0.norm_A_sq[us], 1e-10 * g0.norm_A_sq[us] + 1e-300);
      EXPECT_NEAR(g1.scalar_R[us] * Q * Q, g0.scalar_R[us], 1e-10 * g0.norm_II_sq[us] + 1e-300);
      // Parameter-space volume density of an m-dimensional grid scales like Q^m.
      EXPECT_NEAR(g1.vol_density[us], std::pow(Q, m) * g0.vol_density[us], 1e-10 * std::pow(Q, m) * g0.vol_density[us]);
    }
  }
}

TEST(Properties, GraphRadiusFailureRadiusExceedsRStar) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> alpha(0.2, 1.0);
  for (int c = 0; c < kCases; ++c) {
    const SampledImmersion imm = random_curve(rng, 128);
    const GeometryField geom = compute_geometry(imm);
    const int q = static_cast<int>(rng() % 128);
    const double a = alpha(rng);
    const GraphRadiusResult r = graph_radius_check(imm, geom, q, a, "curve");
    EXPECT_TRUE(r.record.pass) << "case " << c;
    EXPECT_GE(r.failure_radius, r.r_star) << "case " << c;
  }
}

TEST(Properties, InjectivityRatioIsScaleInvariant) {
  std::mt19937_64 rng(313);
  std::uniform_real_distribution<double> factor(0.01, 100.0);
  for (int c = 0; c < kCases; ++c) {
    const SampledImmersion imm = random_curve(rng, 128);
    const SampledImmersion scaled = scale_about(imm, AmbientVec::Zero(2), factor(rng));
    const InjectivityResult a = injectivity_bound_check(imm, compute_geometry(imm), "curve");
    const InjectivityResult b = injectivity_bound_check(scaled, compute_geometry(scaled), "curve");
    EXPECT_TRUE(a.record.pass && b.record.pass) << "case " << c;
    EXPECT_NEAR(a.inj_estimate / a.bound, b.inj_estimate / b.bound, 1e-9 * a.inj_estimate / a.bound) << "case " << c;
  }
}

TEST(Properties, VolumeRatioTendsToOneOnSmallBalls) {
  std::mt19937_64 rng(323);
  std::uniform_real_distribution<double> radius(0.5, 2.0);
  for (int c = 0; c < 3; ++c) {
    const double R = radius(rng);
    const SampledImmersion sph = shapes::sphere(R, 256);
    const VolumeGrowthResult r =
        volume_growth_check(sph, compute_geometry(sph), 128, {0.4 * R, 0.2 * R, 0.1 * R}, "sphere");
    ASSERT_EQ(r.rows.size(), 3u);
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      EXPECT_LT(std::abs(r.rows[i].ratio - 1.0), std::abs(r.rows[i - 1].ratio - 1.0)) << "case " << c;
    }
  }
}

TEST(Properties, BallInclusionTightensAsEpsilonShrinks) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> conformal(1.01, 1.3);
  for (int c = 0; c < 4; ++c) {
    const SampledImmersion imm = random_graph(static_cast<std::uint64_t>(c + 1), 2, 1, 3, 21);
    const GeometryField geom = compute_geometry(imm);
    const double k = conformal(rng);
    std::vector<SmallMat> g1;
    for (const SmallMat& g : geom.g) g1.push_back(k * g);
    const int p = imm.index(10, 10);
    int prev_inner = -1;
    int prev_outer = 1 << 30;
    for (double eps : {0.9, 0.6, 0.4, k - 1.0}) {
      const BallInclusionResult r = ball_inclusion_check(imm, geom.g, g1, eps, p, 0.5, "graph");
      EXPECT_TRUE(r.record.pass) << "case " << c << " eps " << eps;
      EXPECT_GE(r.inner_count, prev_inner);
      EXPECT_LE(r.outer_count, prev_outer);
      prev_inner = r.inner_count;
      prev_outer = r.outer_count;
    }
  }
}

TEST(Properties, ShortFlowsKeepInvariants) {
  std::mt19937_64 rng(505);
  for (int c = 0; c < 6; ++c) {
    FlowConfig cfg;
    cfg.scenario_id = "random";
    cfg.initial = random_curve(rng, 96);
    cfg.max_steps = 200;
    cfg.snapshot_stride = 50;
    const Trajectory tr = run(cfg);
    EXPECT_EQ(tr.volume_increase_events, 0) << "case " << c;
    EXPECT_GT(displacement_bound(tr).worst_margin, 0.0) << "case " << c;
    const CheckRecord eq = metric_equivalence_check(tr);
    EXPECT_TRUE(eq.pass) << "case " << c;
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      const int j = comparable_successor(tr, static_cast<int>(i));
      if (j < 0) continue;
      const EvolutionResidual r = check_volume_evolution(tr.snapshots[i], tr.snapshots[static_cast<std::size_t>(j)]);
      EXPECT_TRUE(r.volume_nonincreasing);
    }
  }
}

TEST(Properties, TensorNormIsHomogeneous) {
  std::mt19937_64 rng(606);
  std::normal_distribution<double> gauss;
  for (int c = 0; c < 100; ++c) {
    SmallMat a(2, 2), T(2, 2);
    a << gauss(rng), gauss(rng), gauss(rng), gauss(rng);
    const SmallMat g = a * a.transpose() + SmallMat::Identity(2, 2);
    T << gauss(rng), gauss(rng), 0.0, gauss(rng);
    T(1, 0) = T(0, 1);
    const double s = gauss(rng);
    const double base = tensor_norm(T, g.inverse());
    EXPECT_GE(base, 0.0);
    EXPECT_NEAR(tensor_norm(s * T, g.inverse()), std::abs(s) * base, 1e-12 * (1.0 + std::abs(s) * base));
  }
}

TEST(Properties, ScenarioTextRoundTrip) {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> len(0.1, 3.0);
  for (int c = 0; c < kCases; ++c) {
    ScenarioSpec spec;
    spec.name = "case-" + std::to_string(c);
    spec.shape.type = c % 2 == 0 ? ShapeType::Ellipse : ShapeType::Dumbbell;
    spec.shape.a = len(rng);
    spec.shape.b = len(rng);
    spec.shape.bell_r = len(rng);
    spec.shape.neck_r = 0.1 * spec.shape.bell_r;
    spec.shape.neck_len = len(rng);
    spec.samples = 16 + static_cast<int>(rng() % 200);
    spec.dt_safety = 0.05 + 0.4 * len(rng) / 3.0;
    spec.seed = rng();
    spec.validate();
    const std::string text = scenario_to_text(spec);
    const ScenarioSpec back = parse_scenario(text);
    EXPECT_EQ(scenario_to_text(back), text);
    if (spec.shape.type == ShapeType::Ellipse) {
      EXPECT_EQ(back.shape.a, spec.shape.a);
      EXPECT_EQ(back.shape.b, spec.shape.b);
    } else {
      EXPECT_EQ(back.shape.bell_r, spec.shape.bell_r);
      EXPECT_EQ(back.shape.neck_len, spec.shape.neck_len);
    }
    EXPECT_EQ(back.dt_safety, spec.dt_safety);
    EXPECT_EQ(back.seed, spec.seed);
  }
}

}  // namespace
