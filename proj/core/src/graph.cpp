#include "mcf/graph.hpp"

#include "mcf/geometry.hpp"

#include <cmath>
#include <random>

namespace mcf {

namespace {

double ipow(double base, int e) {
  double out = 1.0;
  for (int k = 0; k < e; ++k) out *= base;
  return out;
}

// d^k/dx^k x^p evaluated at x.
double dpow(double x, int p, int k) {
  if (k > p) return 0.0;
  double factor = 1.0;
  for (int i = 0; i < k; ++i) factor *= (p - i);
  return factor * ipow(x, p - k);
}

}  // namespace

PolynomialMap PolynomialMap::random(int m, int n, int degree, std::uint64_t seed) {
  PolynomialMap map(m, n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  for (int a = 0; a < n; ++a) {
    for (int total = 2; total <= degree; ++total) {
      if (m == 1) {
        map.add_term(a, total, 0, coeff(rng));
      } else {
        for (int px = total; px >= 0; --px) map.add_term(a, px, total - px, coeff(rng));
      }
    }
  }
  return map;
}

void PolynomialMap::add_term(int component, int px, int py, double coeff) {
  if (component < 0 || component >= n_) throw Error(ErrorKind::InvalidArgument, "polynomial component out of range");
  if (m_ == 1 && py != 0) throw Error(ErrorKind::InvalidArgument, "1-D polynomial terms cannot depend on y");
  terms_[static_cast<std::size_t>(component)].push_back({px, py, coeff});
}

AmbientVec PolynomialMap::value(const Eigen::VectorXd& x) const {
  AmbientVec out = AmbientVec::Zero(n_);
  const double y = m_ == 2 ? x(1) : 1.0;
  for (int a = 0; a < n_; ++a) {
    for (const Term& t : terms_[static_cast<std::size_t>(a)]) out(a) += t.coeff * ipow(x(0), t.px) * ipow(y, t.py);
  }
  return out;
}

Eigen::MatrixXd PolynomialMap::jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_, m_);
  const double y = m_ == 2 ? x(1) : 1.0;
  for (int a = 0; a < n_; ++a) {
    for (const Term& t : terms_[static_cast<std::size_t>(a)]) {
      J(a, 0) += t.coeff * dpow(x(0), t.px, 1) * ipow(y, t.py);
      if (m_ == 2) J(a, 1) += t.coeff * ipow(x(0), t.px) * dpow(y, t.py, 1);
    }
  }
  return J;
}

SmallMat PolynomialMap::hessian(const Eigen::VectorXd& x, int alpha) const {
  SmallMat H = SmallMat::Zero(m_, m_);
  const double y = m_ == 2 ? x(1) : 1.0;
  for (const Term& t : terms_[static_cast<std::size_t>(alpha)]) {
    H(0, 0) += t.coeff * dpow(x(0), t.px, 2) * ipow(y, t.py);
    if (m_ == 2) {
      const double mixed = t.coeff * dpow(x(0), t.px, 1) * dpow(y, t.py, 1);
      H(0, 1) += mixed;
      H(1, 0) += mixed;
      H(1, 1) += t.coeff * ipow(x(0), t.px) * dpow(y, t.py, 2);
    }
  }
  return H;
}

void finalize_graph_data(GraphData& data) {
  const int count = data.sample_count();
  const int m = data.m;
  const int n = data.n;
  data.g_tan.resize(static_cast<std::size_t>(count));
  data.g_nor.resize(static_cast<std::size_t>(count));
  data.norm_II_sq.resize(static_cast<std::size_t>(count));
  data.alpha_bound = 0.0;
  for (int s = 0; s < count; ++s) {
    const auto us = static_cast<std::size_t>(s);
    const Eigen::MatrixXd& D = data.D_psi[us];  // n x m
    SmallMat gt = SmallMat::Identity(m, m);
    gt += D.transpose() * D;
    const Eigen::MatrixXd gn = Eigen::MatrixXd::Identity(n, n) + D * D.transpose();
    data.g_tan[us] = gt;
    data.g_nor[us] = gn;
    data.alpha_bound = std::max(data.alpha_bound, D.norm());

    const SmallMat gt_inv = gt.inverse();
    const Eigen::MatrixXd gn_inv = gn.inverse();
    double sum = 0.0;
    for (int a = 0; a < n; ++a) {
      const SmallMat Pa = gt_inv * data.hessian(s, a);
      for (int b = 0; b < n; ++b) {
        if (gn_inv(a, b) == 0.0) continue;
        const SmallMat Pb = gt_inv * data.hessian(s, b);
        sum += gn_inv(a, b) * (Pa * Pb).trace();
      }
    }
    data.norm_II_sq[us] = sum;
  }
}

GraphData graph_data_from_polynomial(const PolynomialMap& psi, double r, int samples_per_side) {
  GraphData data;
  data.m = psi.m();
  data.n = psi.n();
  data.r = r;
  const double h = 2.0 * r / (samples_per_side - 1);
  const int ny = psi.m() == 2 ? samples_per_side : 1;
  for (int i = 0; i < samples_per_side; ++i) {
    for (int j = 0; j < ny; ++j) {
      Eigen::VectorXd x(psi.m());
      x(0) = -r + i * h;
      if (psi.m() == 2) x(1) = -r + j * h;
      if (x.norm() > r * (1.0 + 1e-12)) continue;
      data.x.push_back(x);
      data.psi.push_back(psi.value(x));
      data.D_psi.push_back(psi.jacobian(x));
      for (int a = 0; a < psi.n(); ++a) data.D2_psi.push_back(psi.hessian(x, a));
    }
  }
  finalize_graph_data(data);
  return data;
}

GraphData graph_data_from_immersion(const SampledImmersion& imm, double r) {
  if (imm.kind != ImmersionKind::DiscGraph) throw Error(ErrorKind::Unsupported, "graph data needs a DiscGraph immersion");
  const GridDerivatives deriv = differentiate(imm);
  GraphData data;
  data.m = imm.m;
  data.n = imm.n;
  data.r = r;
  for (int s = 0; s < imm.sample_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    Eigen::VectorXd x = imm.positions.row(s).head(imm.m).transpose();
    if (x.norm() > r * (1.0 + 1e-12)) continue;
    Eigen::MatrixXd D(imm.n, imm.m);
    for (int i = 0; i < imm.m; ++i) {
      for (int a = 0; a < imm.n; ++a) D(a, i) = deriv.first[i][us](imm.m + a);
    }
    data.x.push_back(x);
    data.psi.push_back(imm.positions.row(s).tail(imm.n).transpose());
    data.D_psi.push_back(D);
    for (int a = 0; a < imm.n; ++a) {
      SmallMat H(imm.m, imm.m);
      for (int i = 0; i < imm.m; ++i) {
        for (int j = 0; j < imm.m; ++j) H(i, j) = deriv.second[i][j][us](imm.m + a);
      }
      data.D2_psi.push_back(H);
    }
    data.source_sample.push_back(s);
  }
  finalize_graph_data(data);
  return data;
}

}  // namespace mcf
