#include "mcf/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcf {

namespace {

// Samples of the immersed manifold in full ambient space with tangent Jacobians and
// grid adjacency. Profiles are swept over `angular` angles.
struct Cloud {
  int m = 0;
  int ambient = 0;
  std::vector<AmbientVec> pos;
  std::vector<Eigen::MatrixXd> jac;
  std::vector<std::vector<int>> nbr;
  double max_edge = 0.0;
};

Cloud build_cloud(const SampledImmersion& imm, int angular) {
  Cloud c;
  const GridDerivatives d = differentiate(imm);
  if (imm.kind == ImmersionKind::RotationalProfile) {
    const int n = imm.sample_count();
    c.m = 2;
    c.ambient = 3;
    const int total = n * angular;
    c.pos.resize(static_cast<std::size_t>(total));
    c.jac.resize(static_cast<std::size_t>(total));
    c.nbr.resize(static_cast<std::size_t>(total));
    for (int k = 0; k < n; ++k) {
      const double x = imm.positions(k, 0);
      const double rho = imm.positions(k, 1);
      const AmbientVec& t = d.first[0][static_cast<std::size_t>(k)];
      for (int a = 0; a < angular; ++a) {
        const double th = 2.0 * M_PI * a / angular;
        const int id = k * angular + a;
        AmbientVec p(3);
        p << x, rho * std::cos(th), rho * std::sin(th);
        Eigen::MatrixXd J(3, 2);
        J << t(0), 0.0, t(1) * std::cos(th), -rho * std::sin(th), t(1) * std::sin(th), rho * std::cos(th);
        c.pos[static_cast<std::size_t>(id)] = p;
        c.jac[static_cast<std::size_t>(id)] = J;
        auto& nb = c.nbr[static_cast<std::size_t>(id)];
        nb.push_back(k * angular + (a + 1) % angular);
        nb.push_back(k * angular + (a + angular - 1) % angular);
        if (k > 0) nb.push_back((k - 1) * angular + a);
        if (k + 1 < n) nb.push_back((k + 1) * angular + a);
        // Across the axis.
        if (k == 0 || k == n - 1) nb.push_back(k * angular + (a + angular / 2) % angular);
      }
    }
  } else {
    const int total = imm.sample_count();
    c.m = imm.m;
    c.ambient = imm.stored_dim();
    c.pos.resize(static_cast<std::size_t>(total));
    c.jac.resize(static_cast<std::size_t>(total));
    c.nbr.resize(static_cast<std::size_t>(total));
    for (int i = 0; i < imm.dims[0]; ++i) {
      for (int j = 0; j < imm.dims[1]; ++j) {
        const int s = imm.index(i, j);
        c.pos[static_cast<std::size_t>(s)] = imm.position(s);
        Eigen::MatrixXd J(c.ambient, c.m);
        for (int dir = 0; dir < c.m; ++dir) J.col(dir) = d.first[dir][static_cast<std::size_t>(s)];
        c.jac[static_cast<std::size_t>(s)] = J;
        auto& nb = c.nbr[static_cast<std::size_t>(s)];
        const bool periodic = imm.boundary[0] == Boundary::Periodic;
        if (i > 0 || periodic) nb.push_back(imm.index((i + imm.dims[0] - 1) % imm.dims[0], j));
        if (i + 1 < imm.dims[0] || periodic) nb.push_back(imm.index((i + 1) % imm.dims[0], j));
        if (imm.m == 2) {
          if (j > 0) nb.push_back(imm.index(i, j - 1));
          if (j + 1 < imm.dims[1]) nb.push_back(imm.index(i, j + 1));
        }
      }
    }
  }
  for (std::size_t s = 0; s < c.pos.size(); ++s) {
    for (int t : c.nbr[s]) c.max_edge = std::max(c.max_edge, (c.pos[s] - c.pos[static_cast<std::size_t>(t)]).norm());
  }
  return c;
}

// Per-sample projection data relative to the anchor frame.
struct Projection {
  FrameMat tangent;
  FrameMat normal;
  AmbientVec origin;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> z;
  std::vector<double> det;
  std::vector<double> dpsi;
};

Projection project(const Cloud& c, int anchor) {
  Projection pr;
  const Eigen::MatrixXd& J0 = c.jac[static_cast<std::size_t>(anchor)];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(J0);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(c.ambient, c.ambient);
  pr.tangent = Q.leftCols(c.m);
  pr.normal = Q.rightCols(c.ambient - c.m);
  pr.origin = c.pos[static_cast<std::size_t>(anchor)];
  const std::size_t total = c.pos.size();
  pr.x.resize(total);
  pr.z.resize(total);
  pr.det.resize(total);
  pr.dpsi.resize(total);
  const double det0 = (pr.tangent.transpose() * J0).determinant();
  const double orient = det0 < 0.0 ? -1.0 : 1.0;
  for (std::size_t s = 0; s < total; ++s) {
    const AmbientVec y = c.pos[s] - pr.origin;
    pr.x[s] = pr.tangent.transpose() * y;
    pr.z[s] = pr.normal.transpose() * y;
    const Eigen::MatrixXd Jx = pr.tangent.transpose() * c.jac[s];
    const Eigen::MatrixXd Jz = pr.normal.transpose() * c.jac[s];
    pr.det[s] = orient * Jx.determinant();
    pr.dpsi[s] = pr.det[s] > 0.0 ? (Jz * Jx.inverse()).norm() : std::numeric_limits<double>::infinity();
  }
  return pr;
}

struct PatchEval {
  std::vector<int> component;
  double sup_dpsi = 0.0;
  bool fold = false;
};

// Two sheets over the same projected point: close in projection, far apart in space.
bool bucket_fold(const Cloud& c, const Projection& pr, const std::vector<int>& comp) {
  const double cell = std::max(c.max_edge, 1e-300);
  const int m = c.m;
  std::vector<std::pair<std::array<long, 2>, int>> keyed;
  keyed.reserve(comp.size());
  for (int s : comp) {
    const Eigen::VectorXd& x = pr.x[static_cast<std::size_t>(s)];
    std::array<long, 2> key{static_cast<long>(std::floor(x(0) / cell)), m > 1 ? static_cast<long>(std::floor(x(1) / cell)) : 0};
    keyed.emplace_back(key, s);
  }
  std::sort(keyed.begin(), keyed.end());
  auto range = [&](const std::array<long, 2>& key) {
    auto lo = std::lower_bound(keyed.begin(), keyed.end(), std::make_pair(key, std::numeric_limits<int>::min()));
    auto hi = std::upper_bound(keyed.begin(), keyed.end(), std::make_pair(key, std::numeric_limits<int>::max()));
    return std::make_pair(lo, hi);
  };
  for (const auto& [key, s] : keyed) {
    for (long di = -1; di <= 1; ++di) {
      for (long dj = (m > 1 ? -1 : 0); dj <= (m > 1 ? 1 : 0); ++dj) {
        const auto [lo, hi] = range({key[0] + di, key[1] + dj});
        for (auto it = lo; it != hi; ++it) {
          const int t = it->second;
          if (t <= s) continue;
          const double dx = (pr.x[static_cast<std::size_t>(s)] - pr.x[static_cast<std::size_t>(t)]).norm();
          const double dp = (c.pos[static_cast<std::size_t>(s)] - c.pos[static_cast<std::size_t>(t)]).norm();
          if (dp > 2.0 * dx + 3.0 * cell) return true;
        }
      }
    }
  }
  return false;
}

PatchEval evaluate(const Cloud& c, const Projection& pr, int anchor, double r, double alpha) {
  PatchEval ev;
  std::vector<char> seen(c.pos.size(), 0);
  std::vector<int> stack{anchor};
  seen[static_cast<std::size_t>(anchor)] = 1;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    ev.component.push_back(s);
    for (int t : c.nbr[static_cast<std::size_t>(s)]) {
      if (seen[static_cast<std::size_t>(t)] || !(pr.x[static_cast<std::size_t>(t)].norm() < r)) continue;
      seen[static_cast<std::size_t>(t)] = 1;
      stack.push_back(t);
    }
  }
  std::sort(ev.component.begin(), ev.component.end());
  for (int s : ev.component) {
    if (!(pr.det[static_cast<std::size_t>(s)] > 0.0)) ev.fold = true;
    ev.sup_dpsi = std::max(ev.sup_dpsi, pr.dpsi[static_cast<std::size_t>(s)]);
  }
  if (!ev.fold && ev.sup_dpsi <= alpha) ev.fold = bucket_fold(c, pr, ev.component);
  return ev;
}

int cloud_index(const SampledImmersion& imm, int q, int angular) {
  if (q < 0 || q >= imm.sample_count()) throw Error(ErrorKind::InvalidArgument, "anchor out of range");
  return imm.kind == ImmersionKind::RotationalProfile ? q * angular : q;
}

TangentGraphPatch make_patch(const Projection& pr, const PatchEval& ev, int q, double r) {
  TangentGraphPatch patch;
  patch.anchor = q;
  patch.origin = pr.origin;
  patch.tangent = pr.tangent;
  patch.normal = pr.normal;
  patch.radius = r;
  patch.component = ev.component;
  patch.sup_Dpsi = ev.sup_dpsi;
  patch.fold = ev.fold;
  for (int s : ev.component) {
    patch.x.push_back(pr.x[static_cast<std::size_t>(s)]);
    patch.psi.push_back(pr.z[static_cast<std::size_t>(s)]);
  }
  return patch;
}

}  // namespace

TangentGraphPatch tangent_graph_patch(const SampledImmersion& imm, const GeometryField& geom, int q, double radius,
                                      double alpha, int angular_samples) {
  (void)geom;
  const Cloud c = build_cloud(imm, angular_samples);
  const int anchor = cloud_index(imm, q, angular_samples);
  const Projection pr = project(c, anchor);
  return make_patch(pr, evaluate(c, pr, anchor, radius, alpha), q, radius);
}

GraphRadiusResult graph_radius_check(const SampledImmersion& imm, const GeometryField& geom, int q, double alpha,
                                     const std::string& scenario, const GraphRadiusOptions& options) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  double sup_ii = 0.0;
  for (double v : geom.norm_II_sq) sup_ii = std::max(sup_ii, std::sqrt(v));
  GraphRadiusResult out;
  out.r_star = sup_ii > 0.0 ? alpha / (std::pow(1.0 + alpha * alpha, 1.5) * sup_ii) : std::numeric_limits<double>::infinity();

  const Cloud c = build_cloud(imm, options.angular_samples);
  const int anchor = cloud_index(imm, q, options.angular_samples);
  const Projection pr = project(c, anchor);
  double extent = 0.0;
  for (const auto& x : pr.x) extent = std::max(extent, x.norm());
  const double r_check = std::min(out.r_star, extent * (1.0 + 1e-12) + 1e-300);

  const PatchEval ev = evaluate(c, pr, anchor, r_check, alpha);
  out.patch = make_patch(pr, ev, q, r_check);
  const std::string loc = "anchor " + std::to_string(q);
  if (ev.fold) {
    out.record = make_record("graph_radius", scenario, -1.0, loc, 0.0);
    out.record.note = "GraphFold";
  } else {
    out.record = make_record("graph_radius", scenario, alpha - ev.sup_dpsi, loc, 0.0);
  }

  out.failure_radius = std::numeric_limits<double>::infinity();
  if (options.find_failure_radius) {
    auto ok = [&](double r) {
      const PatchEval e = evaluate(c, pr, anchor, r, alpha);
      return !e.fold && e.sup_dpsi <= alpha;
    };
    double hi = extent * (1.0 + 1e-9) + 1e-300;
    if (!ok(hi)) {
      double lo = 0.0;
      for (int it = 0; it < options.bisection_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid)) lo = mid; else hi = mid;
      }
      out.failure_radius = hi;
    }
  }
  return out;
}

}  // namespace mcf
