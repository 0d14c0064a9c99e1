#include "immreg/intrinsic.hpp"

#include "immreg/error.hpp"
#include "immreg/geometry.hpp"

#include <cmath>
#include <numbers>

namespace immreg {

namespace {

// Indices of the (theta, phi) derivative orders for a multi-index.
struct Order {
  int t = 0;
  int p = 0;
};

Order add(Order a, int axis) {
  if (axis == 0) ++a.t;
  else ++a.p;
  return a;
}

Eigen::RowVector3d drow(const ImmersionMap& F, Order o, int node) {
  return F.derivative(o.t, o.p).row(node);
}

// Derivatives of one scalar field sampled on the grid by finite differences.
struct FdDerivatives {
  Vector t, p, tt, tp, pp;
};

class FdStencils {
 public:
  FdStencils(const SphereGrid& grid, int half_width) : grid_(grid) {
    const int nlat = grid.nlat();
    const int nlon = grid.nlon();
    hw_theta_ = std::min(half_width, (3 * nlat - 1) / 2);
    hw_phi_ = std::min(half_width, (nlon - 1) / 2);
    // Extended theta coordinates: mirrored rings across both poles.
    for (int k = -nlat; k < 2 * nlat; ++k) ext_theta_.push_back(ext_theta(k));
    theta_weights_.resize(nlat);
    for (int i = 0; i < nlat; ++i) {
      std::vector<double> x;
      for (int k = i - hw_theta_; k <= i + hw_theta_; ++k) x.push_back(ext_theta_[k + nlat]);
      theta_weights_[i] = fornberg_weights(grid.ring_theta(i), x, 2);
    }
    const double h = 2 * std::numbers::pi / nlon;
    std::vector<double> x;
    for (int k = -hw_phi_; k <= hw_phi_; ++k) x.push_back(k * h);
    phi_weights_ = fornberg_weights(0.0, x, 2);
  }

  // parity: sign of f under (theta, phi) -> (-theta, phi + pi).
  FdDerivatives apply(const Vector& f, double parity) const {
    FdDerivatives out;
    out.p = phi_derivative(f, 1);
    out.pp = phi_derivative(f, 2);
    out.t = theta_derivative(f, parity, 1);
    out.tt = theta_derivative(f, parity, 2);
    out.tp = theta_derivative(out.p, parity, 1);
    return out;
  }

 private:
  double ext_theta(int k) const {
    const int nlat = grid_.nlat();
    if (k < 0) return -grid_.ring_theta(-1 - k);
    if (k >= nlat) return 2 * std::numbers::pi - grid_.ring_theta(2 * nlat - 1 - k);
    return grid_.ring_theta(k);
  }

  double ext_value(const Vector& f, double parity, int k, int j) const {
    const int nlat = grid_.nlat();
    const int nlon = grid_.nlon();
    const int jm = (j + nlon / 2) % nlon;
    if (k < 0) return parity * f[grid_.node(-1 - k, jm)];
    if (k >= nlat) return parity * f[grid_.node(2 * nlat - 1 - k, jm)];
    return f[grid_.node(k, j)];
  }

  Vector phi_derivative(const Vector& f, int order) const {
    const int nlon = grid_.nlon();
    Vector out(f.size());
    for (int i = 0; i < grid_.nlat(); ++i)
      for (int j = 0; j < nlon; ++j) {
        double s = 0.0;
        for (int k = -hw_phi_; k <= hw_phi_; ++k)
          s += phi_weights_[order][k + hw_phi_] * f[grid_.node(i, ((j + k) % nlon + nlon) % nlon)];
        out[grid_.node(i, j)] = s;
      }
    return out;
  }

  Vector theta_derivative(const Vector& f, double parity, int order) const {
    Vector out(f.size());
    for (int i = 0; i < grid_.nlat(); ++i)
      for (int j = 0; j < grid_.nlon(); ++j) {
        double s = 0.0;
        for (int k = -hw_theta_; k <= hw_theta_; ++k)
          s += theta_weights_[i][order][k + hw_theta_] * ext_value(f, parity, i + k, j);
        out[grid_.node(i, j)] = s;
      }
    return out;
  }

  SphereGrid grid_;
  int hw_theta_ = 0;
  int hw_phi_ = 0;
  std::vector<double> ext_theta_;
  std::vector<std::vector<std::vector<double>>> theta_weights_;
  std::vector<std::vector<double>> phi_weights_;
};

}  // namespace

std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x,
                                                  int max_order) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

Matrix MetricField::components() const {
  Matrix g(size(), 3);
  for (int i = 0; i < size(); ++i)
    for (int k = 0; k < 3; ++k) g(i, k) = jets[i].g[k];
  return g;
}

MetricField metric_from_immersion(const ImmersionMap& F) {
  MetricField m{F.grid(), {}};
  const int n = F.grid().size();
  m.jets.resize(n);
  const Order base[2] = {{1, 0}, {0, 1}};
  const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  const int second[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int node = 0; node < n; ++node) {
    auto& jet = m.jets[node];
    for (int s = 0; s < 3; ++s) {
      const Order oi = base[pairs[s][0]];
      const Order oj = base[pairs[s][1]];
      jet.g[s] = drow(F, oi, node).dot(drow(F, oj, node));
      for (int k = 0; k < 2; ++k)
        jet.dg[k][s] = drow(F, add(oi, k), node).dot(drow(F, oj, node)) +
                       drow(F, oi, node).dot(drow(F, add(oj, k), node));
      for (int q = 0; q < 3; ++q) {
        const int k = second[q][0];
        const int l = second[q][1];
        jet.d2g[q][s] = drow(F, add(add(oi, k), l), node).dot(drow(F, oj, node)) +
                        drow(F, add(oi, k), node).dot(drow(F, add(oj, l), node)) +
                        drow(F, add(oi, l), node).dot(drow(F, add(oj, k), node)) +
                        drow(F, oi, node).dot(drow(F, add(add(oj, k), l), node));
      }
    }
  }
  return m;
}

MetricField conformal_round_metric(const HarmonicField& u) {
  const SphereGrid& grid = u.grid();
  const int n = grid.size();
  const Vector& v = u.samples();
  const Vector ut = u.derivative(1, 0), up = u.derivative(0, 1);
  const Vector utt = u.derivative(2, 0), utp = u.derivative(1, 1), upp = u.derivative(0, 2);
  MetricField m{grid, std::vector<MetricJet<double>>(n)};
  for (int i = 0; i < n; ++i) {
    const double th = grid.theta()[i];
    const double s = std::exp(2 * v[i]);
    const double du[2] = {ut[i], up[i]};
    const double d2u[3] = {utt[i], utp[i], upp[i]};
    const double ds[2] = {2 * du[0] * s, 2 * du[1] * s};
    const double d2s[3] = {(4 * du[0] * du[0] + 2 * d2u[0]) * s,
                           (4 * du[0] * du[1] + 2 * d2u[1]) * s,
                           (4 * du[1] * du[1] + 2 * d2u[2]) * s};
    // Round metric (1, 0, sin^2 theta) and its theta derivatives.
    const Sym2<double> r{1.0, 0.0, std::sin(th) * std::sin(th)};
    const std::array<Sym2<double>, 2> dr{Sym2<double>{0.0, 0.0, std::sin(2 * th)},
                                         Sym2<double>{0.0, 0.0, 0.0}};
    const std::array<Sym2<double>, 3> d2r{Sym2<double>{0.0, 0.0, 2 * std::cos(2 * th)},
                                          Sym2<double>{}, Sym2<double>{}};
    auto& jet = m.jets[i];
    const int kl[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int c = 0; c < 3; ++c) {
      jet.g[c] = s * r[c];
      for (int k = 0; k < 2; ++k) jet.dg[k][c] = ds[k] * r[c] + s * dr[k][c];
      for (int q = 0; q < 3; ++q) {
        const int k = kl[q][0], l = kl[q][1];
        jet.d2g[q][c] = d2s[q] * r[c] + ds[k] * dr[l][c] + ds[l] * dr[k][c] + s * d2r[q][c];
      }
    }
  }
  return m;
}

MetricField metric_from_samples(const SphereGrid& grid, const Matrix& gamma_samples,
                                int half_width) {
  if (gamma_samples.rows() != grid.size() || gamma_samples.cols() != 3)
    throw ShapeError("metric_from_samples: expected (nodes x 3) metric samples");
  const FdStencils fd(grid, half_width);
  // gamma_tt and gamma_pp are even under the antipodal chart map, gamma_tp odd.
  const double parity[3] = {1.0, -1.0, 1.0};
  std::array<FdDerivatives, 3> d;
  for (int c = 0; c < 3; ++c) d[c] = fd.apply(gamma_samples.col(c), parity[c]);
  MetricField m{grid, std::vector<MetricJet<double>>(grid.size())};
  for (int i = 0; i < grid.size(); ++i) {
    auto& jet = m.jets[i];
    for (int c = 0; c < 3; ++c) {
      jet.g[c] = gamma_samples(i, c);
      jet.dg[0][c] = d[c].t[i];
      jet.dg[1][c] = d[c].p[i];
      jet.d2g[0][c] = d[c].tt[i];
      jet.d2g[1][c] = d[c].tp[i];
      jet.d2g[2][c] = d[c].pp[i];
    }
  }
  return m;
}

Vector gauss_curvature(const MetricField& m) {
  Vector k(m.size());
  for (int i = 0; i < m.size(); ++i) k[i] = brioschi(m.jets[i]);
  return k;
}

}  // namespace immreg
